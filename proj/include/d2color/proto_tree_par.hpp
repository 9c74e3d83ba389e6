#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "d2color/engine.hpp"

namespace d2c {

struct ParOptions {
  /// Run the END wave after the root learns the tree is coloured.
  bool end_phase = true;
  /// A child that received END forwards it in the next round instead of
  /// waiting for its slot; END-only collisions at the parent are tolerated.
  bool sibling_end_parallel = false;
  /// A degree-1 root still broadcasts END.
  bool root_always_ends = false;
};

/// Local variables of the parallel protocol with its END wave.
/// States: 0 idle, 1 colour children, 2 wait for children, 3 report,
/// 4 reported, 5 forward END, 6 done. 7 marks a joiner waiting for NEW.
struct ParState {
  int state = 0;
  std::int64_t nb_cl = 1;
  std::int64_t nb_cl_parent = 0;
  std::int64_t max_nb_cl = 1;
  std::optional<Identity> parent;
  Color sender_cl = kNoColor;
  std::set<Identity> to_color;
  std::optional<Color> color;
  bool colored = false;
  /// Colours this process knows its neighbours hold (parent and assigned
  /// children), used to serve joins.
  std::map<Identity, Color> neighbor_colors;
  /// Joiner identities waiting for a NEW from this process.
  std::vector<Identity> pending_joins;
};

inline constexpr int kJoinWaiting = 7;

class ParTreeProtocol final : public Protocol {
 public:
  explicit ParTreeProtocol(ParOptions options = {}) : options_(options) {}

  std::string_view name() const override { return "par_tree"; }
  void attach(const Topology& topology) override;
  /// Registers a joining leaf. The parent must have finished the END wave and
  /// have degree below the Δ it learned. Throws Error{ParentSaturated}.
  void extend(const Topology& topology, ProcessIndex joiner, ProcessIndex parent) override;
  void on_external(ProcessIndex target, const ProtocolMessage& msg, Clock clock) override;
  ClockAction on_clock(ProcessIndex self, Clock clock) override;
  void on_receive(ProcessIndex self, const ProtocolMessage& msg, Clock clock) override;
  ProcessSnapshot snapshot(ProcessIndex self) const override;
  bool may_act(ProcessIndex self) const override;
  std::optional<ProcessIndex> claimant() const override { return claimant_; }
  RunStatus outcome() const override;
  bool clash_permitted(const ClashEvent& event,
                       std::span<const BroadcastRecord> broadcasts) const override;

  const ParState& state(ProcessIndex i) const { return states_[i]; }
  const ParOptions& options() const { return options_; }

 private:
  void on_color(ProcessIndex self, const ColorPar& msg);
  void on_term(ProcessIndex self, const TermPar& msg);
  void on_end(ProcessIndex self, const End& msg);
  void on_new(ProcessIndex self, const New& msg, Clock clock);
  ProtocolMessage serve_join(ProcessIndex self);
  bool is_root(ProcessIndex self) const;

  ParOptions options_;
  std::optional<Topology> topology_;
  PerProcess<ParState> states_;
  std::optional<ProcessIndex> claimant_;
};

/// Identity for a leaf joining at `parent`: smallest value >= 1 outside
/// {id_parent} and the parent's neighbour identities.
Identity fresh_join_identity(const Topology& topology, ProcessIndex parent);

struct ColoredTree {
  Topology topology;
  PerProcess<Color> colors;
};

/// Joins two coloured trees with the edge (x, y), keeping every colour.
/// Processes of `b` are renumbered after those of `a`.
/// Throws Error{DegreeMismatch, SaturatedEndpoint, IdentityPreconditionViolated,
/// ConsistencyBroken}.
ColoredTree merge_colored_trees(const ColoredTree& a, ProcessIndex x, const ColoredTree& b,
                                ProcessIndex y);

}  // namespace d2c
