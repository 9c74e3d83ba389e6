#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "d2color/engine.hpp"

namespace d2c {

/// Per-process list of children to colour, consumed in order. Entries that
/// are no longer candidates are skipped; when exhausted the smallest
/// identity is used.
using ChildSchedule = std::map<Identity, std::vector<Identity>>;

/// The choices made in the published five-process execution.
ChildSchedule table1_schedule();

/// d1 entry: a colour and the neighbour it was learned from.
struct D1Entry {
  Color color = 0;
  Identity source = 0;
  bool operator==(const D1Entry&) const = default;
};

/// Local variables of the arbitrary-graph protocol. Every clock branch
/// returns the process to state 0.
struct ArbState {
  int state = 0;
  std::vector<D1Entry> d1;
  std::vector<Color> d2;
  Identity sender = 0;
  std::optional<Identity> parent;
  std::set<Identity> to_color;
  std::optional<Color> color;
  Color corrected_cl = kNoColor;
};

class ArbitraryProtocol final : public Protocol {
 public:
  explicit ArbitraryProtocol(ChildSchedule schedule = {}) : schedule_(std::move(schedule)) {}

  std::string_view name() const override { return "arbitrary"; }
  void attach(const Topology& topology) override;
  void on_external(ProcessIndex target, const ProtocolMessage& msg, Clock clock) override;
  ClockAction on_clock(ProcessIndex self, Clock clock) override;
  void on_receive(ProcessIndex self, const ProtocolMessage& msg, Clock clock) override;
  ProcessSnapshot snapshot(ProcessIndex self) const override;
  bool may_act(ProcessIndex self) const override;
  std::optional<ProcessIndex> claimant() const override { return claimant_; }
  RunStatus outcome() const override;

  const ArbState& state(ProcessIndex i) const { return states_[i]; }

 private:
  void on_color(ProcessIndex self, const ColorArb& msg);
  void on_term(ProcessIndex self, const TermArb& msg);
  void on_correct(ProcessIndex self, const Correct& msg);
  void on_corrected(ProcessIndex self, const CorrectedColor& msg);
  void on_resume(ProcessIndex self, const ResumeColoring& msg);
  Identity pick_next(ProcessIndex self);
  void claim(ProcessIndex self);

  ChildSchedule schedule_;
  std::map<Identity, std::size_t> schedule_pos_;
  std::optional<Topology> topology_;
  PerProcess<ArbState> states_;
  std::optional<ProcessIndex> claimant_;
};

}  // namespace d2c
