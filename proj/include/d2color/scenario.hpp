#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2color/engine.hpp"
#include "d2color/proto_arbitrary.hpp"
#include "d2color/proto_tree_par.hpp"
#include "d2color/proto_tree_seq.hpp"

namespace d2c {

enum class ProtocolKind { SeqTree, ParTree, Arbitrary };

std::string_view to_string(ProtocolKind kind);
ProtocolKind parse_protocol_kind(std::string_view text);

struct Scenario {
  Topology topology;
  /// Recorded in the trace header; "custom" for generated or file topologies.
  std::string source = "custom";
  ProtocolKind protocol = ProtocolKind::SeqTree;
  ProcessIndex root{1};
  Clock start_round = 0;
  ParOptions par;
  SeqOptions seq;
  ClashPolicy policy = ClashPolicy::FailFast;
  HandlerOrder order = HandlerOrder::Ascending;
  std::uint64_t seed = 0;
  std::size_t max_rounds = 1'000'000;
  /// Arbitrary-graph next-child choices; `pinned_name` labels them in the trace.
  ChildSchedule schedule;
  std::string pinned_name;
  /// Leaves to attach (by parent) once the first run has finished.
  std::vector<ProcessIndex> joins;
};

struct ScenarioResult {
  RunTrace trace;
  RunStatus status = RunStatus::Running;
  Topology initial_topology;
  Topology final_topology;
  /// Set when the run stopped on an exception (clash or protocol error).
  std::optional<ErrorKind> error;
  std::string error_message;
};

/// Throws Error{NotATree} when a tree protocol is paired with a general graph.
ScenarioResult run_scenario(const Scenario& scenario);

}  // namespace d2c
