#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "d2color/errors.hpp"
#include "d2color/message.hpp"
#include "d2color/rng.hpp"
#include "d2color/topology.hpp"

namespace d2c {

enum class ClashKind { Collision, Conflict };

std::string_view to_string(ClashKind kind);

/// A process whose reception is corrupted in a round.
///   collision: >= 2 neighbours of `victim` broadcast;
///   conflict:  `victim` and >= 1 neighbour broadcast.
/// Participants are the broadcasting processes involved (victim included for
/// a conflict).
struct ClashEvent {
  Clock round = 0;
  ProcessIndex victim;
  ClashKind kind = ClashKind::Collision;
  std::vector<ProcessIndex> participants;
  bool permitted = false;

  bool operator==(const ClashEvent&) const = default;
};

/// Clash events produced by the given set of simultaneous broadcasters.
/// Events are ordered by victim, conflict before collision.
std::vector<ClashEvent> detect_clashes(const Topology& topology,
                                       std::span<const ProcessIndex> broadcasters, Clock round);

struct BroadcastRecord {
  Clock round = 0;
  ProcessIndex origin;
  ProtocolMessage message;
  std::vector<ProcessIndex> receivers;

  bool operator==(const BroadcastRecord&) const = default;
};

struct ExternalRecord {
  ProcessIndex target;
  ProtocolMessage message;
  bool operator==(const ExternalRecord&) const = default;
};

/// Protocol-visible state of one process. Fields a protocol does not use stay
/// empty.
struct ProcessSnapshot {
  ProcessIndex process;
  int state = 0;
  std::optional<Color> color;
  std::optional<Identity> parent;
  std::vector<Color> d1;
  std::vector<Color> d2;
  /// max_d (sequential) or max_nb_cl (parallel).
  std::optional<std::int64_t> bound;
  std::optional<std::int64_t> nb_cl_parent;

  bool operator==(const ProcessSnapshot&) const = default;
};

/// Topology extension applied before a round executes.
struct JoinRecord {
  ProcessIndex parent;
  ProcessIndex joiner;
  Identity identity = 0;
  bool operator==(const JoinRecord&) const = default;
};

struct RoundRecord {
  Clock round = 0;
  std::vector<JoinRecord> joins;
  std::vector<ExternalRecord> externals;
  std::vector<BroadcastRecord> broadcasts;
  std::vector<ClashEvent> clashes;
  std::vector<ProcessSnapshot> snapshots;
  std::vector<ProcessIndex> claims;

  bool operator==(const RoundRecord&) const = default;
};

enum class RunStatus {
  Running,
  /// The root claimed termination.
  Terminated,
  /// Every process reached its terminal state (parallel protocol with the
  /// END wave).
  AllTerminal,
  /// Nothing can happen any more but termination was not reached.
  Partial,
  BudgetExhausted,
  ClashAborted,
};

std::string_view to_string(RunStatus status);
RunStatus parse_run_status(std::string_view text);

struct TraceHeader {
  std::string protocol;
  std::size_t n = 0;
  ProcessIndex root{1};
  Clock start_round = 0;
  /// Scenario parameters in emission order.
  std::vector<std::pair<std::string, std::string>> params;

  std::optional<std::string> param(const std::string& key) const;
  bool operator==(const TraceHeader&) const = default;
};

struct RunTrace {
  TraceHeader header;
  std::vector<ProcessSnapshot> initial;
  std::vector<RoundRecord> rounds;
  RunStatus status = RunStatus::Running;

  bool operator==(const RunTrace&) const = default;
};

/// Newline-delimited text, one record per line, stable field order.
std::string serialize_trace(const RunTrace& trace);
RunTrace parse_trace(std::string_view text);
std::string format_snapshot(const ProcessSnapshot& snap);

/// Result of a clock-guard handler: whether local state changed and the
/// (at most one) message to broadcast.
struct ClockAction {
  bool changed = false;
  std::optional<ProtocolMessage> broadcast;
};

/// A protocol is a set of per-process state machines. Handlers only touch the
/// state of the process they are invoked for, so execution order inside a
/// round phase does not matter.
class Protocol {
 public:
  virtual ~Protocol() = default;

  virtual std::string_view name() const = 0;

  /// Initialises per-process state for `topology`.
  virtual void attach(const Topology& topology) = 0;
  /// `topology` now has an extra leaf `joiner` hanging off `parent`.
  virtual void extend(const Topology& topology, ProcessIndex joiner, ProcessIndex parent);

  virtual void on_external(ProcessIndex target, const ProtocolMessage& msg, Clock clock) = 0;
  virtual ClockAction on_clock(ProcessIndex self, Clock clock) = 0;
  virtual void on_receive(ProcessIndex self, const ProtocolMessage& msg, Clock clock) = 0;

  virtual ProcessSnapshot snapshot(ProcessIndex self) const = 0;

  /// True when a clock-guard handler can still fire for `self` without a
  /// further reception.
  virtual bool may_act(ProcessIndex self) const = 0;

  /// Process that has claimed termination, if any.
  virtual std::optional<ProcessIndex> claimant() const = 0;

  /// Running until the protocol's own completion condition holds.
  virtual RunStatus outcome() const = 0;

  /// Clashes the protocol deliberately tolerates (never by default).
  virtual bool clash_permitted(const ClashEvent& event,
                               std::span<const BroadcastRecord> broadcasts) const;
};

enum class ClashPolicy { FailFast, RecordAndCorrupt };
enum class HandlerOrder { Ascending, Shuffled };

std::string_view to_string(ClashPolicy policy);
ClashPolicy parse_clash_policy(std::string_view text);

class ClashDetectedError : public Error {
 public:
  explicit ClashDetectedError(std::vector<ClashEvent> events);
  const std::vector<ClashEvent>& events() const { return events_; }

 private:
  std::vector<ClashEvent> events_;
};

struct SimulationOptions {
  ClashPolicy policy = ClashPolicy::FailFast;
  HandlerOrder order = HandlerOrder::Ascending;
  std::uint64_t order_seed = 0;
};

/// Drives the global clock. Per round: clock += 1, clock-guard handlers,
/// broadcast collection, clash detection, deliveries (medium, then
/// external), reception handlers, snapshots of changed processes.
class Simulation {
 public:
  Simulation(Topology topology, std::unique_ptr<Protocol> protocol, TraceHeader header,
             SimulationOptions options = {});

  /// External (out-of-band) delivery at the reception phase of `round`.
  /// Throws Error{DuplicateStart} on a second START.
  void schedule_external(Clock round, ProcessIndex target, ProtocolMessage msg);

  const RoundRecord& step_round();

  /// Steps until the protocol reports an outcome, nothing can happen any
  /// more, or `max_rounds` rounds have been executed by this call.
  RunStatus run(std::size_t max_rounds);

  void set_clash_policy(ClashPolicy policy) { options_.policy = policy; }

  /// Adds a leaf to the topology; the protocol is told through extend().
  ProcessIndex add_leaf(ProcessIndex parent, Identity identity);

  Clock clock() const { return clock_; }
  const Topology& topology() const { return topology_; }
  Protocol& protocol() { return *protocol_; }
  const Protocol& protocol() const { return *protocol_; }
  const RunTrace& trace() const { return trace_; }
  RunStatus status() const { return trace_.status; }

 private:
  std::vector<ProcessIndex> handler_order();
  bool externals_pending() const;

  Topology topology_;
  std::unique_ptr<Protocol> protocol_;
  SimulationOptions options_;
  Rng order_rng_;
  Clock clock_ = -1;
  bool start_scheduled_ = false;
  std::multimap<Clock, ExternalRecord> externals_;
  std::vector<JoinRecord> pending_joins_;
  PerProcess<ProcessSnapshot> last_snapshot_;
  std::optional<ProcessIndex> recorded_claim_;
  RunTrace trace_;
};

}  // namespace d2c
