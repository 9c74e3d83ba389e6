#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "d2color/types.hpp"

namespace d2c {

enum class TopologyKind { Tree, General };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view text);

using Edge = std::pair<ProcessIndex, ProcessIndex>;

/// Immutable communication graph. Adjacency lists are kept sorted by index.
/// Non-empty instances only come out of build_topology(), so they have passed
/// validation.
class Topology {
 public:
  Topology() = default;

  std::size_t size() const { return adjacency_.size(); }
  TopologyKind kind() const { return kind_; }

  const std::vector<ProcessIndex>& neighbors(ProcessIndex i) const { return adjacency_[i]; }
  std::size_t degree(ProcessIndex i) const { return adjacency_[i].size(); }
  Identity identity(ProcessIndex i) const { return identities_[i]; }
  const PerProcess<Identity>& identities() const { return identities_; }

  bool adjacent(ProcessIndex a, ProcessIndex b) const;

  /// Neighbour of `i` whose identity is `id`; identities are unique within a
  /// closed neighbourhood so the answer is unambiguous.
  std::optional<ProcessIndex> neighbor_with_identity(ProcessIndex i, Identity id) const;

  /// Edge list with first < second, sorted.
  std::vector<Edge> edges() const;

  std::size_t max_degree() const;

  bool operator==(const Topology&) const = default;

 private:
  friend Topology build_topology(std::size_t, const std::vector<Edge>&,
                                 const std::optional<std::vector<Identity>>&, TopologyKind);

  PerProcess<std::vector<ProcessIndex>> adjacency_;
  PerProcess<Identity> identities_;
  TopologyKind kind_ = TopologyKind::General;
};

struct GraphMetrics {
  std::size_t delta = 0;
  std::size_t depth = 0;
  PerProcess<std::size_t> degrees;
};

/// Validates and builds. Identities default to 1..n.
/// Throws Error{DisconnectedGraph, NotATree, DuplicateEdge, InvalidEdge,
/// IdentityClashWithin2Hops}.
Topology build_topology(std::size_t n, const std::vector<Edge>& edges,
                        const std::optional<std::vector<Identity>>& identities = std::nullopt,
                        TopologyKind kind = TopologyKind::General);

/// Random recursive tree: each new process attaches to a uniformly chosen
/// earlier process that still has spare degree. Pure function of its inputs.
Topology generate_random_tree(std::size_t n, std::size_t max_degree, std::uint64_t seed);

/// Random spanning tree plus `extra_edges` random chords (kind = General).
Topology generate_random_connected_graph(std::size_t n, std::size_t extra_edges,
                                         std::uint64_t seed);

enum class IdentityMode { GlobalUnique, Distance2UniqueWithReuse };

std::string_view to_string(IdentityMode mode);

/// Reassigns identities. In reuse mode identities are handed out greedily in
/// BFS order (from a seed-chosen start) as the smallest value >= 1 not used
/// within distance 2.
Topology assign_identities(const Topology& topology, IdentityMode mode, std::uint64_t seed);

/// Returns a copy with an extra process attached to `parent`.
Topology with_leaf(const Topology& topology, ProcessIndex parent, Identity leaf_identity);

/// Hop distance (BFS). 0 iff a == b.
std::size_t graph_distance(const Topology& topology, ProcessIndex a, ProcessIndex b);

/// BFS distances from `source` to every process.
PerProcess<std::size_t> bfs_distances(const Topology& topology, ProcessIndex source);

GraphMetrics metrics(const Topology& topology, ProcessIndex root);

/// Named fixtures: singleton, path3, star4, table1, binary15.
Topology builtin_topology(std::string_view name);
std::vector<std::string> builtin_names();

/// JSON topology file (see README for the schema).
std::string to_json(const Topology& topology);
Topology topology_from_json(std::string_view text);
void write_topology_file(const std::string& path, const Topology& topology);
Topology read_topology_file(const std::string& path);

}  // namespace d2c
