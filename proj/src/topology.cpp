#include "d2color/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "d2color/errors.hpp"
#include "d2color/rng.hpp"

namespace d2c {

std::string_view to_string(TopologyKind kind) {
  return kind == TopologyKind::Tree ? "tree" : "general";
}

TopologyKind parse_topology_kind(std::string_view text) {
  if (text == "tree") return TopologyKind::Tree;
  if (text == "general") return TopologyKind::General;
  throw Error(ErrorKind::MalformedInput, "unknown topology kind '" + std::string(text) + "'");
}

std::string_view to_string(IdentityMode mode) {
  return mode == IdentityMode::GlobalUnique ? "global_unique" : "distance2_unique_with_reuse";
}

bool Topology::adjacent(ProcessIndex a, ProcessIndex b) const {
  const auto& nb = adjacency_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::optional<ProcessIndex> Topology::neighbor_with_identity(ProcessIndex i, Identity id) const {
  for (ProcessIndex j : adjacency_[i]) {
    if (identities_[j] == id) return j;
  }
  return std::nullopt;
}

std::vector<Edge> Topology::edges() const {
  std::vector<Edge> out;
  for (ProcessIndex i : all_processes(size())) {
    for (ProcessIndex j : adjacency_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t Topology::max_degree() const {
  std::size_t best = 0;
  for (const auto& nb : adjacency_) best = std::max(best, nb.size());
  return best;
}

namespace {

void check_identities(const PerProcess<std::vector<ProcessIndex>>& adjacency,
                      const PerProcess<Identity>& ids) {
  // Any two processes within distance 2 lie together in some closed
  // neighbourhood, so checking every N[v] covers all pairs.
  for (ProcessIndex v : all_processes(adjacency.size())) {
    std::vector<std::pair<Identity, ProcessIndex>> seen;
    seen.emplace_back(ids[v], v);
    for (ProcessIndex u : adjacency[v]) seen.emplace_back(ids[u], u);
    std::sort(seen.begin(), seen.end());
    for (std::size_t k = 1; k < seen.size(); ++k) {
      if (seen[k].first == seen[k - 1].first) {
        throw Error(ErrorKind::IdentityClashWithin2Hops,
                    "processes " + seen[k - 1].second.str() + " and " + seen[k].second.str() +
                        " share identity " + std::to_string(seen[k].first) +
                        " within distance 2");
      }
    }
  }
}

}  // namespace

Topology build_topology(std::size_t n, const std::vector<Edge>& edges,
                        const std::optional<std::vector<Identity>>& identities,
                        TopologyKind kind) {
  if (n == 0) throw Error(ErrorKind::InvalidEdge, "topology needs at least one process");
  Topology t;
  t.kind_ = kind;
  t.adjacency_ = PerProcess<std::vector<ProcessIndex>>(n);

  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& [a, b] : edges) {
    if (a.value < 1 || a.value > n || b.value < 1 || b.value > n) {
      throw Error(ErrorKind::InvalidEdge,
                  "edge (" + a.str() + "," + b.str() + ") outside [1," + std::to_string(n) + "]");
    }
    if (a == b) throw Error(ErrorKind::InvalidEdge, "self-loop at " + a.str());
    auto key = std::minmax(a.value, b.value);
    if (!seen.insert({key.first, key.second}).second) {
      throw Error(ErrorKind::DuplicateEdge, "edge (" + a.str() + "," + b.str() + ") repeated");
    }
    t.adjacency_[a].push_back(b);
    t.adjacency_[b].push_back(a);
  }
  for (auto& nb : t.adjacency_) std::sort(nb.begin(), nb.end());

  if (kind == TopologyKind::Tree && edges.size() != n - 1) {
    throw Error(ErrorKind::NotATree, std::to_string(edges.size()) + " edges for " +
                                         std::to_string(n) + " processes");
  }

  // Connectivity.
  PerProcess<char> reached(n, 0);
  std::deque<ProcessIndex> queue{ProcessIndex{1}};
  reached[ProcessIndex{1}] = true;
  std::size_t count = 1;
  while (!queue.empty()) {
    ProcessIndex v = queue.front();
    queue.pop_front();
    for (ProcessIndex u : t.adjacency_[v]) {
      if (!reached[u]) {
        reached[u] = true;
        ++count;
        queue.push_back(u);
      }
    }
  }
  if (count != n) {
    // n-1 edges and disconnected means a cycle somewhere; report the tree
    // violation first when the caller asked for a tree.
    if (kind == TopologyKind::Tree) {
      throw Error(ErrorKind::NotATree, "n-1 edges but not connected (contains a cycle)");
    }
    throw Error(ErrorKind::DisconnectedGraph,
                std::to_string(n - count) + " processes unreachable from process 1");
  }

  if (identities) {
    if (identities->size() != n) {
      throw Error(ErrorKind::MalformedInput, "identity list has " +
                                                 std::to_string(identities->size()) +
                                                 " entries for " + std::to_string(n) + " processes");
    }
    t.identities_ = PerProcess<Identity>(n);
    for (std::size_t k = 0; k < n; ++k) {
      if ((*identities)[k] < 0) {
        throw Error(ErrorKind::MalformedInput, "identities must be non-negative");
      }
      t.identities_.raw()[k] = (*identities)[k];
    }
  } else {
    t.identities_ = PerProcess<Identity>(n);
    for (std::size_t k = 0; k < n; ++k) t.identities_.raw()[k] = static_cast<Identity>(k + 1);
  }
  check_identities(t.adjacency_, t.identities_);
  return t;
}

Topology generate_random_tree(std::size_t n, std::size_t max_degree, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::InvalidEdge, "n must be at least 1");
  if (n >= 3 && max_degree < 2) {
    throw Error(ErrorKind::InfeasibleDegreeCap,
                "a tree on " + std::to_string(n) + " processes needs max_degree >= 2");
  }
  if (n == 2 && max_degree < 1) {
    throw Error(ErrorKind::InfeasibleDegreeCap, "two processes need max_degree >= 1");
  }
  Rng rng(seed);
  std::vector<std::size_t> degree(n + 1, 0);
  // Processes that can still accept a child. With cap >= 2 the newest
  // process always has spare degree, so the pool never empties.
  std::vector<std::uint32_t> open{1};
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (std::uint32_t v = 2; v <= n; ++v) {
    const auto slot = rng.uniform(0, open.size() - 1);
    const std::uint32_t parent = open[slot];
    edges.emplace_back(ProcessIndex{parent}, ProcessIndex{v});
    ++degree[parent];
    ++degree[v];
    if (degree[parent] >= max_degree) {
      open[slot] = open.back();
      open.pop_back();
    }
    if (degree[v] < max_degree) open.push_back(v);
  }
  return build_topology(n, edges, std::nullopt, TopologyKind::Tree);
}

Topology generate_random_connected_graph(std::size_t n, std::size_t extra_edges,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  std::set<std::pair<std::uint32_t, std::uint32_t>> present;
  for (std::uint32_t v = 2; v <= n; ++v) {
    auto parent = static_cast<std::uint32_t>(rng.uniform(1, v - 1));
    edges.emplace_back(ProcessIndex{parent}, ProcessIndex{v});
    present.insert({parent, v});
  }
  const std::size_t possible = n * (n - 1) / 2 - (n - 1);
  const std::size_t wanted = std::min(extra_edges, possible);
  while (present.size() < (n - 1) + wanted) {
    auto a = static_cast<std::uint32_t>(rng.uniform(1, n));
    auto b = static_cast<std::uint32_t>(rng.uniform(1, n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (present.insert({a, b}).second) edges.emplace_back(ProcessIndex{a}, ProcessIndex{b});
  }
  return build_topology(n, edges, std::nullopt, TopologyKind::General);
}

Topology assign_identities(const Topology& topology, IdentityMode mode, std::uint64_t seed) {
  const std::size_t n = topology.size();
  std::vector<Identity> ids(n, 0);
  if (mode == IdentityMode::GlobalUnique) {
    for (std::size_t k = 0; k < n; ++k) ids[k] = static_cast<Identity>(k + 1);
  } else {
    Rng rng(seed);
    const ProcessIndex start{static_cast<std::uint32_t>(rng.uniform(1, n))};
    std::vector<bool> assigned(n + 1, false);
    std::vector<bool> visited(n + 1, false);
    std::deque<ProcessIndex> queue{start};
    visited[start.value] = true;
    while (!queue.empty()) {
      ProcessIndex v = queue.front();
      queue.pop_front();
      std::set<Identity> taken;
      for (ProcessIndex u : topology.neighbors(v)) {
        if (assigned[u.value]) taken.insert(ids[u.value - 1]);
        for (ProcessIndex w : topology.neighbors(u)) {
          if (w != v && assigned[w.value]) taken.insert(ids[w.value - 1]);
        }
      }
      Identity pick = 1;
      while (taken.count(pick)) ++pick;
      ids[v.value - 1] = pick;
      assigned[v.value] = true;
      for (ProcessIndex u : topology.neighbors(v)) {
        if (!visited[u.value]) {
          visited[u.value] = true;
          queue.push_back(u);
        }
      }
    }
  }
  return build_topology(n, topology.edges(), ids, topology.kind());
}

Topology with_leaf(const Topology& topology, ProcessIndex parent, Identity leaf_identity) {
  auto edges = topology.edges();
  const auto leaf = ProcessIndex{static_cast<std::uint32_t>(topology.size() + 1)};
  edges.emplace_back(parent, leaf);
  std::vector<Identity> ids = topology.identities().raw();
  ids.push_back(leaf_identity);
  return build_topology(topology.size() + 1, edges, ids, topology.kind());
}

PerProcess<std::size_t> bfs_distances(const Topology& topology, ProcessIndex source) {
  constexpr auto kUnreached = static_cast<std::size_t>(-1);
  PerProcess<std::size_t> dist(topology.size(), kUnreached);
  std::deque<ProcessIndex> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    ProcessIndex v = queue.front();
    queue.pop_front();
    for (ProcessIndex u : topology.neighbors(v)) {
      if (dist[u] == kUnreached) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

std::size_t graph_distance(const Topology& topology, ProcessIndex a, ProcessIndex b) {
  if (a == b) return 0;
  return bfs_distances(topology, a)[b];
}

GraphMetrics metrics(const Topology& topology, ProcessIndex root) {
  GraphMetrics m;
  m.degrees = PerProcess<std::size_t>(topology.size());
  for (ProcessIndex i : all_processes(topology.size())) {
    m.degrees[i] = topology.degree(i);
    m.delta = std::max(m.delta, m.degrees[i]);
  }
  const auto dist = bfs_distances(topology, root);
  for (std::size_t d : dist) m.depth = std::max(m.depth, d);
  return m;
}

namespace {

std::vector<Edge> make_edges(std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> list) {
  std::vector<Edge> out;
  for (auto [a, b] : list) out.emplace_back(ProcessIndex{a}, ProcessIndex{b});
  return out;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"singleton", "path3", "star4", "table1", "binary15"};
}

Topology builtin_topology(std::string_view name) {
  if (name == "singleton") return build_topology(1, {}, std::nullopt, TopologyKind::Tree);
  if (name == "path3") {
    return build_topology(3, make_edges({{1, 2}, {2, 3}}), std::nullopt, TopologyKind::Tree);
  }
  if (name == "star4") {
    return build_topology(5, make_edges({{1, 2}, {1, 3}, {1, 4}, {1, 5}}), std::nullopt,
                          TopologyKind::Tree);
  }
  if (name == "table1") {
    // Reception pattern of the published five-process arbitrary-graph execution:
    // p1~{p2,p4}, p2~{p1,p3,p5}, p3~{p2,p4}.
    return build_topology(5, make_edges({{1, 2}, {1, 4}, {2, 3}, {2, 5}, {3, 4}}), std::nullopt,
                          TopologyKind::General);
  }
  if (name == "binary15") {
    std::vector<Edge> edges;
    for (std::uint32_t v = 2; v <= 15; ++v) edges.emplace_back(ProcessIndex{v / 2}, ProcessIndex{v});
    return build_topology(15, edges, std::nullopt, TopologyKind::Tree);
  }
  throw Error(ErrorKind::MalformedInput, "unknown builtin topology '" + std::string(name) + "'");
}

std::string to_json(const Topology& topology) {
  nlohmann::ordered_json j;
  j["format"] = "d2color-topology/1";
  j["n"] = topology.size();
  j["kind"] = std::string(to_string(topology.kind()));
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : topology.edges()) edges.push_back({a.value, b.value});
  j["edges"] = edges;
  j["identities"] = topology.identities().raw();
  return j.dump(2) + "\n";
}

Topology topology_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("topology file: ") + e.what());
  }
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto kind = parse_topology_kind(j.value("kind", std::string("general")));
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw Error(ErrorKind::MalformedInput, "edge entries must be [a, b] pairs");
      }
      edges.emplace_back(ProcessIndex{e[0].get<std::uint32_t>()},
                         ProcessIndex{e[1].get<std::uint32_t>()});
    }
    std::optional<std::vector<Identity>> ids;
    if (j.contains("identities")) ids = j["identities"].get<std::vector<Identity>>();
    return build_topology(n, edges, ids, kind);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("topology file: ") + e.what());
  }
}

void write_topology_file(const std::string& path, const Topology& topology) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MalformedInput, "cannot write " + path);
  out << to_json(topology);
}

Topology read_topology_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MalformedInput, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return topology_from_json(ss.str());
}

}  // namespace d2c
