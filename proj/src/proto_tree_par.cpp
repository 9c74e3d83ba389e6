#include "d2color/proto_tree_par.hpp"

#include <algorithm>

#include "d2color/verifier.hpp"

namespace d2c {

void ParTreeProtocol::attach(const Topology& topology) {
  topology_ = topology;
  states_ = PerProcess<ParState>(topology.size());
  for (ProcessIndex i : all_processes(topology.size())) {
    auto& s = states_[i];
    s.nb_cl = static_cast<std::int64_t>(topology.degree(i)) + 1;
    s.max_nb_cl = s.nb_cl;
  }
  claimant_.reset();
}

bool ParTreeProtocol::is_root(ProcessIndex self) const {
  return states_[self].parent == topology_->identity(self);
}

void ParTreeProtocol::extend(const Topology& topology, ProcessIndex joiner, ProcessIndex parent) {
  auto& p = states_[parent];
  if (p.state != 6) {
    throw Error(ErrorKind::ProtocolViolation,
                "join at process " + parent.str() + " before it finished the END wave");
  }
  const std::int64_t delta = p.max_nb_cl - 1;
  const auto old_degree = static_cast<std::int64_t>(topology.degree(parent)) - 1;
  if (old_degree >= delta) {
    throw Error(ErrorKind::ParentSaturated,
                "process " + parent.str() + " already has degree " + std::to_string(delta));
  }
  topology_ = topology;
  ParState s;
  s.state = kJoinWaiting;
  s.nb_cl = 2;
  s.max_nb_cl = p.max_nb_cl;
  states_.push_back(s);
  states_[parent].pending_joins.push_back(topology.identity(joiner));
}

void ParTreeProtocol::on_external(ProcessIndex target, const ProtocolMessage& msg, Clock clock) {
  if (!std::holds_alternative<Start>(msg)) {
    throw Error(ErrorKind::ProtocolViolation, "par_tree accepts only START externally");
  }
  auto& s = states_[target];
  if (s.state != 0) {
    throw Error(ErrorKind::ProtocolViolation, "START at non-idle process " + target.str());
  }
  const Identity id = topology_->identity(target);
  on_color(target, ColorPar{{{id, (clock + 1) % s.nb_cl}}, id, kNoColor, s.nb_cl});
}

void ParTreeProtocol::on_color(ProcessIndex self, const ColorPar& msg) {
  auto& s = states_[self];
  if (s.colored || s.state == kJoinWaiting) return;
  const Identity id = topology_->identity(self);
  auto mine = std::find_if(msg.pairs.begin(), msg.pairs.end(),
                           [&](const ColorPair& p) { return p.id == id; });
  if (mine == msg.pairs.end()) {
    throw Error(ErrorKind::MissingPairForUncoloredChild,
                "process " + self.str() + " is uncoloured but absent from COLOR_PAR of " +
                    std::to_string(msg.sender));
  }
  s.parent = msg.sender;
  s.sender_cl = msg.sender_cl;
  s.to_color.clear();
  for (ProcessIndex q : topology_->neighbors(self)) {
    const Identity qid = topology_->identity(q);
    if (qid != msg.sender) s.to_color.insert(qid);
  }
  s.color = mine->color;
  s.colored = true;
  s.nb_cl_parent = msg.nb_cl_parent;
  if (msg.sender != id) s.neighbor_colors[msg.sender] = msg.sender_cl;
  s.state = s.to_color.empty() ? 3 : 1;
}

void ParTreeProtocol::on_term(ProcessIndex self, const TermPar& msg) {
  auto& s = states_[self];
  if (msg.dest != topology_->identity(self)) return;
  if (s.state != 2 || !s.to_color.contains(msg.id)) {
    throw Error(ErrorKind::ProtocolViolation,
                "unexpected TERM_PAR from " + std::to_string(msg.id) + " at process " + self.str());
  }
  s.to_color.erase(msg.id);
  s.max_nb_cl = std::max(s.max_nb_cl, msg.max_nb_cl);
  if (!s.to_color.empty()) return;
  if (!is_root(self)) {
    s.state = 3;
  } else if (options_.end_phase) {
    s.state = 5;
    claimant_ = self;
  } else {
    s.state = 4;
    claimant_ = self;
  }
}

void ParTreeProtocol::on_end(ProcessIndex self, const End& msg) {
  auto& s = states_[self];
  if (s.state == 4 && s.parent == msg.parent) {
    s.max_nb_cl = std::max(s.max_nb_cl, msg.max_cl);
    s.state = 5;
  }
}

void ParTreeProtocol::on_new(ProcessIndex self, const New& msg, Clock clock) {
  auto& s = states_[self];
  if (s.state != kJoinWaiting || msg.new_id != topology_->identity(self)) return;
  // A joiner is a leaf: its only neighbour is the parent.
  const ProcessIndex parent = topology_->neighbors(self).front();
  s.parent = topology_->identity(parent);
  s.color = msg.cl;
  s.colored = true;
  // NEW goes out in the parent's slot, which reveals the parent's colour.
  s.sender_cl = clock % (msg.delta + 1);
  s.neighbor_colors[*s.parent] = s.sender_cl;
  s.nb_cl_parent = msg.delta + 1;
  s.max_nb_cl = msg.delta + 1;
  s.state = 6;
}

ProtocolMessage ParTreeProtocol::serve_join(ProcessIndex self) {
  auto& s = states_[self];
  const Identity joiner = s.pending_joins.front();
  s.pending_joins.erase(s.pending_joins.begin());
  const std::int64_t delta = s.max_nb_cl - 1;
  Color cl = 0;
  auto taken = [&](Color c) {
    if (c == *s.color) return true;
    for (const auto& [nid, ncl] : s.neighbor_colors) {
      if (ncl == c) return true;
    }
    return false;
  };
  while (cl <= delta && taken(cl)) ++cl;
  if (cl > delta) {
    throw Error(ErrorKind::ParentSaturated, "no free colour at process " + self.str());
  }
  s.neighbor_colors[joiner] = cl;
  return New{cl, delta, joiner};
}

ClockAction ParTreeProtocol::on_clock(ProcessIndex self, Clock clock) {
  auto& s = states_[self];
  const Identity id = topology_->identity(self);
  if ((s.state == 1 || s.state == 3) && clock % s.nb_cl_parent == *s.color) {
    if (s.state == 1) {
      ColorPar msg{{}, id, *s.color, s.nb_cl};
      Color c = 0;
      for (Identity child : s.to_color) {
        while (c == *s.color || c == s.sender_cl) ++c;
        msg.pairs.push_back({child, c});
        s.neighbor_colors[child] = c;
        ++c;
      }
      s.state = 2;
      return {true, std::move(msg)};
    }
    // Only a singleton root reaches state 3 with itself as parent.
    if (is_root(self)) {
      claimant_ = self;
      s.state = options_.end_phase ? 5 : 4;
      return {true, std::nullopt};
    }
    s.state = 4;
    return {true, TermPar{*s.parent, id, s.max_nb_cl}};
  }
  if (s.state == 5) {
    const bool slot = clock % s.max_nb_cl == *s.color;
    if (!slot && !(options_.sibling_end_parallel && !is_root(self))) return {};
    s.state = 6;
    const bool root_override = options_.root_always_ends && is_root(self);
    if (topology_->degree(self) != 1 || root_override) {
      return {true, End{id, s.max_nb_cl}};
    }
    return {true, std::nullopt};
  }
  if (s.state == 6 && !s.pending_joins.empty() && clock % s.max_nb_cl == *s.color) {
    return {true, serve_join(self)};
  }
  return {};
}

void ParTreeProtocol::on_receive(ProcessIndex self, const ProtocolMessage& msg, Clock clock) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ColorPar>) {
          on_color(self, m);
        } else if constexpr (std::is_same_v<T, TermPar>) {
          on_term(self, m);
        } else if constexpr (std::is_same_v<T, End>) {
          on_end(self, m);
        } else if constexpr (std::is_same_v<T, New>) {
          on_new(self, m, clock);
        } else {
          throw Error(ErrorKind::ProtocolViolation,
                      "par_tree cannot handle " + std::string(to_string(kind_of(msg))));
        }
      },
      msg);
}

ProcessSnapshot ParTreeProtocol::snapshot(ProcessIndex self) const {
  const auto& s = states_[self];
  ProcessSnapshot snap;
  snap.process = self;
  snap.state = s.state;
  snap.color = s.color;
  snap.parent = s.parent;
  snap.bound = s.max_nb_cl;
  snap.nb_cl_parent = s.nb_cl_parent;
  return snap;
}

bool ParTreeProtocol::may_act(ProcessIndex self) const {
  const auto& s = states_[self];
  return s.state == 1 || s.state == 3 || s.state == 5 || s.state == kJoinWaiting ||
         (s.state == 6 && !s.pending_joins.empty());
}

RunStatus ParTreeProtocol::outcome() const {
  if (!options_.end_phase) return claimant_ ? RunStatus::Terminated : RunStatus::Running;
  for (const auto& s : states_) {
    if (s.state != 6 || !s.pending_joins.empty()) return RunStatus::Running;
  }
  return RunStatus::AllTerminal;
}

bool ParTreeProtocol::clash_permitted(const ClashEvent& event,
                                      std::span<const BroadcastRecord> broadcasts) const {
  if (!options_.sibling_end_parallel || event.kind != ClashKind::Collision) return false;
  for (ProcessIndex p : event.participants) {
    for (const auto& b : broadcasts) {
      if (b.origin == p && !std::holds_alternative<End>(b.message)) return false;
    }
  }
  return true;
}

Identity fresh_join_identity(const Topology& topology, ProcessIndex parent) {
  std::set<Identity> used{topology.identity(parent)};
  for (ProcessIndex q : topology.neighbors(parent)) used.insert(topology.identity(q));
  Identity id = 1;
  while (used.contains(id)) ++id;
  return id;
}

ColoredTree merge_colored_trees(const ColoredTree& a, ProcessIndex x, const ColoredTree& b,
                                ProcessIndex y) {
  const std::size_t da = a.topology.max_degree();
  const std::size_t db = b.topology.max_degree();
  if (da != db) {
    throw Error(ErrorKind::DegreeMismatch,
                "max degrees differ: " + std::to_string(da) + " vs " + std::to_string(db));
  }
  if (a.topology.degree(x) >= da || b.topology.degree(y) >= db) {
    throw Error(ErrorKind::SaturatedEndpoint, "an endpoint already has degree " + std::to_string(da));
  }
  auto excluded = [](const Topology& t, ProcessIndex p, Identity other) {
    if (t.identity(p) == other) return true;
    for (ProcessIndex q : t.neighbors(p)) {
      if (t.identity(q) == other) return true;
    }
    return false;
  };
  if (excluded(b.topology, y, a.topology.identity(x)) ||
      excluded(a.topology, x, b.topology.identity(y))) {
    throw Error(ErrorKind::IdentityPreconditionViolated,
                "endpoint identity already present near the other endpoint");
  }

  const auto offset = static_cast<std::uint32_t>(a.topology.size());
  std::vector<Edge> edges = a.topology.edges();
  for (const auto& [u, v] : b.topology.edges()) {
    edges.emplace_back(ProcessIndex{u.value + offset}, ProcessIndex{v.value + offset});
  }
  edges.emplace_back(x, ProcessIndex{y.value + offset});
  std::vector<Identity> ids = a.topology.identities().raw();
  for (Identity id : b.topology.identities().raw()) ids.push_back(id);

  ColoredTree merged{build_topology(ids.size(), edges, ids, TopologyKind::Tree), {}};
  merged.colors = a.colors;
  for (Color c : b.colors) merged.colors.push_back(c);

  const auto check = check_coloring(merged.topology, merged.colors, da, true);
  if (!check.consistency) {
    const auto& v = *check.offending;
    throw Error(ErrorKind::ConsistencyBroken,
                "processes " + v.a.str() + " and " + v.b.str() + " at distance " +
                    std::to_string(v.distance) + " share colour " + std::to_string(v.color));
  }
  return merged;
}

}  // namespace d2c
