#pragma once

#include <optional>
#include <set>
#include <vector>

#include "d2color/engine.hpp"
#include "d2color/rng.hpp"

namespace d2c {

enum class ChildOrder { Smallest, SeededRandom };

std::string_view to_string(ChildOrder order);
ChildOrder parse_child_order(std::string_view text);

struct SeqOptions {
  ChildOrder order = ChildOrder::Smallest;
  std::uint64_t seed = 0;
};

/// Local variables of the sequential depth-first protocol.
/// States: 0 idle, 1 active (colour next child), 2 waiting for TERM,
/// 3 active (report), 4 done.
struct SeqState {
  int state = 0;
  std::optional<Identity> parent;
  Color sender_cl = kNoColor;
  std::vector<Color> d1colors;
  std::set<Identity> to_color;
  std::optional<Color> color;
  std::int64_t max_d = 0;
};

class SeqTreeProtocol final : public Protocol {
 public:
  explicit SeqTreeProtocol(SeqOptions options = {}) : options_(options) {}

  std::string_view name() const override { return "seq_tree"; }
  void attach(const Topology& topology) override;
  void on_external(ProcessIndex target, const ProtocolMessage& msg, Clock clock) override;
  ClockAction on_clock(ProcessIndex self, Clock clock) override;
  void on_receive(ProcessIndex self, const ProtocolMessage& msg, Clock clock) override;
  ProcessSnapshot snapshot(ProcessIndex self) const override;
  bool may_act(ProcessIndex self) const override;
  std::optional<ProcessIndex> claimant() const override { return claimant_; }
  RunStatus outcome() const override;

  const SeqState& state(ProcessIndex i) const { return states_[i]; }

 private:
  void on_color(ProcessIndex self, const ColorSeq& msg);
  void on_term(ProcessIndex self, const TermSeq& msg);
  Identity pick_next(ProcessIndex self);

  SeqOptions options_;
  std::optional<Topology> topology_;
  PerProcess<SeqState> states_;
  std::vector<Rng> rngs_;
  std::optional<ProcessIndex> claimant_;
};

}  // namespace d2c
