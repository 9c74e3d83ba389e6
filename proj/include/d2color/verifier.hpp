#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "d2color/engine.hpp"
#include "d2color/topology.hpp"

namespace d2c {

/// Final colour per process; kNoColor marks an uncoloured process.
using Coloring = PerProcess<Color>;

std::size_t palette_size(const Coloring& coloring);

struct ConsistencyViolation {
  ProcessIndex a;
  ProcessIndex b;
  std::size_t distance = 0;
  Color color = 0;
};

struct ColoringCheck {
  bool validity_checked = false;
  bool validity = true;
  /// Uncoloured processes, or colours outside {0..Δ} when validity is checked.
  std::vector<ProcessIndex> invalid;
  bool consistency = true;
  std::optional<ConsistencyViolation> offending;
  std::size_t palette_size = 0;
};

/// Brute-force check over all pairs within BFS distance 2. Uses only the
/// topology and the colours.
ColoringCheck check_coloring(const Topology& topology, const Coloring& coloring, std::size_t delta,
                             bool check_validity);

/// BFS-order greedy: smallest colour unused within distance 2.
Coloring greedy_reference_coloring(const Topology& topology);

/// Δ+1 slotted rounds where every process broadcasts when
/// t mod (Δ+1) = colour; returns the number of clash events.
std::size_t tdma_replay(const Topology& topology, const Coloring& coloring, std::size_t delta);

struct NamedCheck {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct BoundCheck {
  std::string name;
  double limit = 0;
  double observed = 0;
  bool pass = true;
};

inline constexpr double kRoundConstant = 4.0;

struct VerificationReport {
  std::string protocol;
  std::size_t n = 0;
  std::size_t delta = 0;
  std::size_t depth = 0;
  ColoringCheck coloring;
  RunStatus termination = RunStatus::Running;
  std::optional<ProcessIndex> claimant;
  std::map<std::string, std::size_t> message_counts;
  std::size_t total_broadcasts = 0;
  std::optional<Clock> completion_round;
  std::vector<BoundCheck> bounds;
  std::vector<NamedCheck> invariants;
  std::size_t tdma_clashes = 0;
  /// observed completion / (d·Δ), when defined.
  std::optional<double> round_ratio;

  bool terminated() const;
  bool passed() const;
};

std::string serialize_report(const VerificationReport& report);

/// Final protocol-visible state of every process, replayed from the trace.
PerProcess<ProcessSnapshot> final_snapshots(const RunTrace& trace);

/// Applies the trace's join records to `initial`.
Topology final_topology(const Topology& initial, const RunTrace& trace);

/// Message-count and round bounds for the protocol named in the trace.
std::vector<BoundCheck> check_bounds(const RunTrace& trace, const Topology& topology);

/// Cells of the published five-process execution that differ from `trace`.
/// Empty means an exact match.
std::vector<std::string> table1_mismatches(const RunTrace& trace);

/// Every check the trace supports, against the topology the run started on.
VerificationReport verify_trace(const Topology& initial, const RunTrace& trace);

}  // namespace d2c
