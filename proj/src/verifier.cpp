#include "d2color/verifier.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <set>
#include <sstream>

namespace d2c {

std::size_t palette_size(const Coloring& coloring) {
  std::set<Color> used;
  for (Color c : coloring) {
    if (c != kNoColor) used.insert(c);
  }
  return used.size();
}

ColoringCheck check_coloring(const Topology& topology, const Coloring& coloring, std::size_t delta,
                             bool check_validity) {
  ColoringCheck out;
  out.validity_checked = check_validity;
  out.palette_size = palette_size(coloring);
  for (ProcessIndex i : all_processes(topology.size())) {
    const Color c = coloring[i];
    const bool bad = c == kNoColor || (check_validity && (c < 0 || c > static_cast<Color>(delta)));
    if (bad) out.invalid.push_back(i);
  }
  out.validity = out.invalid.empty();

  for (ProcessIndex i : all_processes(topology.size())) {
    if (coloring[i] == kNoColor) continue;
    // Distance-1 and distance-2 partners with a larger index.
    std::set<ProcessIndex> near;
    for (ProcessIndex j : topology.neighbors(i)) {
      near.insert(j);
      for (ProcessIndex k : topology.neighbors(j)) near.insert(k);
    }
    for (ProcessIndex j : near) {
      if (j <= i || coloring[j] != coloring[i]) continue;
      out.consistency = false;
      out.offending = ConsistencyViolation{i, j, topology.adjacent(i, j) ? 1u : 2u, coloring[i]};
      return out;
    }
  }
  return out;
}

Coloring greedy_reference_coloring(const Topology& topology) {
  Coloring out(topology.size(), kNoColor);
  if (topology.size() == 0) return out;
  std::vector<bool> seen(topology.size() + 1, false);
  std::deque<ProcessIndex> queue{ProcessIndex{1}};
  seen[1] = true;
  while (!queue.empty()) {
    const ProcessIndex v = queue.front();
    queue.pop_front();
    std::set<Color> used;
    for (ProcessIndex j : topology.neighbors(v)) {
      used.insert(out[j]);
      for (ProcessIndex k : topology.neighbors(j)) {
        if (k != v) used.insert(out[k]);
      }
    }
    Color c = 0;
    while (used.contains(c)) ++c;
    out[v] = c;
    for (ProcessIndex j : topology.neighbors(v)) {
      if (!seen[j.value]) {
        seen[j.value] = true;
        queue.push_back(j);
      }
    }
  }
  return out;
}

std::size_t tdma_replay(const Topology& topology, const Coloring& coloring, std::size_t delta) {
  std::size_t clashes = 0;
  const auto slots = static_cast<Color>(delta) + 1;
  for (Color t = 0; t < slots; ++t) {
    std::vector<ProcessIndex> talking;
    for (ProcessIndex i : all_processes(topology.size())) {
      if (coloring[i] != kNoColor && t % slots == coloring[i]) talking.push_back(i);
    }
    clashes += detect_clashes(topology, talking, t).size();
  }
  return clashes;
}

bool VerificationReport::terminated() const {
  return termination == RunStatus::Terminated || termination == RunStatus::AllTerminal;
}

bool VerificationReport::passed() const {
  if (!terminated() || !coloring.validity || !coloring.consistency || tdma_clashes != 0) return false;
  for (const auto& b : bounds) {
    if (!b.pass) return false;
  }
  for (const auto& c : invariants) {
    if (!c.pass) return false;
  }
  return true;
}

std::string serialize_report(const VerificationReport& r) {
  std::ostringstream os;
  os << "d2color-report 1\n";
  os << "protocol name=" << r.protocol << " n=" << r.n << " delta=" << r.delta << " depth=" << r.depth
     << '\n';
  os << "termination status=" << to_string(r.termination)
     << " claimant=" << (r.claimant ? r.claimant->str() : "-")
     << " completion_round=" << (r.completion_round ? std::to_string(*r.completion_round) : "-")
     << '\n';
  os << "validity checked=" << (r.coloring.validity_checked ? 1 : 0)
     << " pass=" << (r.coloring.validity ? 1 : 0) << " offenders=";
  if (r.coloring.invalid.empty()) os << '-';
  for (std::size_t k = 0; k < r.coloring.invalid.size(); ++k) {
    os << (k ? "," : "") << r.coloring.invalid[k].value;
  }
  os << '\n';
  os << "consistency pass=" << (r.coloring.consistency ? 1 : 0);
  if (r.coloring.offending) {
    const auto& v = *r.coloring.offending;
    os << " pair=" << v.a.value << ',' << v.b.value << " distance=" << v.distance
       << " color=" << v.color;
  }
  os << '\n';
  os << "palette size=" << r.coloring.palette_size << '\n';
  os << "messages total=" << r.total_broadcasts;
  for (const auto& [k, v] : r.message_counts) os << ' ' << k << '=' << v;
  os << '\n';
  os << std::setprecision(6);
  for (const auto& b : r.bounds) {
    os << "bound name=" << b.name << " limit=" << b.limit << " observed=" << b.observed
       << " pass=" << (b.pass ? 1 : 0) << '\n';
  }
  if (r.round_ratio) os << "ratio rounds_over_d_delta=" << *r.round_ratio << '\n';
  for (const auto& c : r.invariants) {
    os << "check name=" << c.name << " pass=" << (c.pass ? 1 : 0);
    if (!c.detail.empty()) os << " detail=\"" << c.detail << '"';
    os << '\n';
  }
  os << "tdma clashes=" << r.tdma_clashes << '\n';
  os << "verdict " << (r.passed() ? "pass" : "fail") << '\n';
  return os.str();
}

PerProcess<ProcessSnapshot> final_snapshots(const RunTrace& trace) {
  PerProcess<ProcessSnapshot> out;
  for (const auto& s : trace.initial) out.push_back(s);
  for (const auto& r : trace.rounds) {
    for (const auto& j : r.joins) {
      ProcessSnapshot placeholder;
      placeholder.process = j.joiner;
      placeholder.state = -1;
      out.push_back(placeholder);
    }
    for (const auto& s : r.snapshots) out[s.process] = s;
  }
  return out;
}

Topology final_topology(const Topology& initial, const RunTrace& trace) {
  Topology t = initial;
  for (const auto& r : trace.rounds) {
    for (const auto& j : r.joins) t = with_leaf(t, j.parent, j.identity);
  }
  return t;
}

namespace {

std::map<std::string, std::size_t> count_messages(const RunTrace& trace) {
  std::map<std::string, std::size_t> out;
  for (const auto& r : trace.rounds) {
    for (const auto& b : r.broadcasts) ++out[std::string(to_string(kind_of(b.message)))];
  }
  return out;
}

std::size_t count(const std::map<std::string, std::size_t>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

std::optional<Clock> claim_round(const RunTrace& trace) {
  for (const auto& r : trace.rounds) {
    if (!r.claims.empty()) return r.round;
  }
  return std::nullopt;
}

}  // namespace

std::vector<BoundCheck> check_bounds(const RunTrace& trace, const Topology& topology) {
  std::vector<BoundCheck> out;
  const auto m = metrics(topology, trace.header.root);
  const auto n = static_cast<double>(topology.size());
  const auto delta = static_cast<double>(m.delta);
  const auto counts = count_messages(trace);
  const auto& proto = trace.header.protocol;

  if (proto == "seq_tree") {
    const double color_limit = m.delta == 0 ? 0 : delta + (n - delta) * (delta - 1);
    const auto colors = static_cast<double>(count(counts, "COLOR_SEQ"));
    out.push_back({"seq_color_count", color_limit, colors, colors <= color_limit});
    const auto terms = static_cast<double>(count(counts, "TERM_SEQ"));
    out.push_back({"seq_term_count_exact", n - 1, terms, terms == n - 1});
  } else if (proto == "par_tree") {
    const auto sent = static_cast<double>(count(counts, "COLOR_PAR") + count(counts, "TERM_PAR"));
    out.push_back({"par_coloring_broadcasts", 2 * n - delta, sent, sent <= 2 * n - delta});
    const double d_delta = static_cast<double>(m.depth) * delta;
    // A singleton still needs the one tick that lets its root claim.
    const double limit = d_delta > 0 ? kRoundConstant * d_delta : 1;
    if (auto done = claim_round(trace)) {
      const auto observed = static_cast<double>(*done - trace.header.start_round);
      out.push_back({"par_completion_rounds", limit, observed, observed <= limit});
    } else {
      out.push_back({"par_completion_rounds", limit, -1, false});
    }
  }
  return out;
}

namespace {

struct Cell {
  Clock clock = 0;
  std::uint32_t process = 0;
  std::optional<int> state;
  std::optional<Color> color;
  std::optional<std::string> broadcast;
  bool claim = false;
};

std::string describe(const Cell& c) {
  std::ostringstream os;
  os << "clock " << c.clock << " p" << c.process << ':';
  if (c.state) os << " s=" << *c.state;
  if (c.color) os << " color=" << *c.color;
  if (c.broadcast) os << " br " << *c.broadcast;
  if (c.claim) os << " claim";
  return os.str();
}

/// Cells as printed in the published table, keyed by the table's clock.
std::vector<Cell> table1_expected() {
  auto br = [](ProtocolMessage m) { return std::optional<std::string>(format_message(m)); };
  return {
      {0, 1, 2, 0, {}, false},
      {1, 1, 0, {}, br(ColorArb{2, 1, 0, 1, {-1}}), false},
      {2, 2, 2, 1, {}, false},
      {3, 2, 0, {}, br(ColorArb{3, 2, 1, 2, {0}}), false},
      {4, 3, 2, 2, {}, false},
      {5, 3, 0, {}, br(ColorArb{4, 3, 2, 0, {1}}), false},
      {6, 4, 1, {}, {}, false},
      {7, 4, 0, 2, br(Correct{3, 4, 2, {0}}), false},
      {8, 3, 4, 3, {}, false},
      {9, 3, 0, {}, br(CorrectedColor{4, 2, 3, 3}), false},
      {10, 2, 6, {}, {}, false},
      {11, 2, 0, {}, br(CorrectedColor{-1, -1, 2, 3}), false},
      {13, 3, 5, {}, {}, false},
      {14, 3, 0, {}, br(ResumeColoring{4, 3}), false},
      {15, 4, 3, {}, {}, false},
      {16, 4, 0, {}, br(TermArb{3, 4, 2}), false},
      {17, 3, 3, {}, {}, false},
      {18, 3, 0, {}, br(TermArb{2, 3, 3}), false},
      {19, 2, 2, {}, {}, false},
      {20, 2, 0, {}, br(ColorArb{5, 2, 1, 2, {0, 3}}), false},
      {21, 5, 3, {}, {}, false},
      {22, 5, 0, {}, br(TermArb{2, 5, 2}), false},
      {23, 2, 3, {}, {}, false},
      {24, 2, 0, {}, br(TermArb{1, 2, 1}), false},
      {25, 1, {}, {}, {}, true},
  };
}

}  // namespace

std::vector<std::string> table1_mismatches(const RunTrace& trace) {
  std::vector<std::string> out;
  // Engine round k: broadcasts at table clock 2k-1, receptions at 2k. The
  // table is one tick late from clock 13 on.
  auto table_clock = [](Clock projected) { return projected >= 12 ? projected + 1 : projected; };

  std::map<std::pair<Clock, std::uint32_t>, Cell> observed;
  auto cell_at = [&](Clock clock, ProcessIndex p) -> Cell& {
    auto& c = observed[{clock, p.value}];
    c.clock = clock;
    c.process = p.value;
    return c;
  };
  PerProcess<ProcessSnapshot> last;
  for (const auto& s : trace.initial) last.push_back(s);
  for (const auto& r : trace.rounds) {
    std::set<ProcessIndex> talkers;
    for (const auto& b : r.broadcasts) {
      talkers.insert(b.origin);
      cell_at(table_clock(2 * r.round - 1), b.origin).broadcast = format_message(b.message);
    }
    for (const auto& s : r.snapshots) {
      const auto& prev = last[s.process];
      const Clock clock = table_clock(talkers.contains(s.process) ? 2 * r.round - 1 : 2 * r.round);
      if (s.state != prev.state) cell_at(clock, s.process).state = s.state;
      if (s.color != prev.color && s.color) cell_at(clock, s.process).color = *s.color;
      last[s.process] = s;
    }
    for (ProcessIndex c : r.claims) cell_at(table_clock(2 * r.round), c).claim = true;
  }

  for (const auto& e : table1_expected()) {
    auto it = observed.find({e.clock, e.process});
    if (it == observed.end()) {
      out.push_back("missing " + describe(e));
      continue;
    }
    const Cell& o = it->second;
    const bool ok = o.state == e.state && (!e.color || o.color == e.color) &&
                    o.broadcast == e.broadcast && o.claim == e.claim;
    if (!ok) out.push_back("expected " + describe(e) + " got " + describe(o));
    observed.erase(it);
  }
  // Colour-only changes are not printed in the table.
  for (const auto& [key, o] : observed) {
    if (o.state || o.broadcast || o.claim) out.push_back("unexpected " + describe(o));
  }

  const std::vector<Color> final_expected{0, 1, 3, 2, 2};
  const auto finals = final_snapshots(trace);
  std::vector<Color> final_observed;
  for (const auto& s : finals) final_observed.push_back(s.color.value_or(kNoColor));
  if (final_observed != final_expected) out.push_back("final colours differ");
  return out;
}

VerificationReport verify_trace(const Topology& initial, const RunTrace& trace) {
  VerificationReport rep;
  const Topology topo = final_topology(initial, trace);
  const auto& proto = trace.header.protocol;
  const auto m = metrics(topo, trace.header.root);
  rep.protocol = proto;
  rep.n = topo.size();
  rep.delta = m.delta;
  rep.depth = m.depth;
  rep.termination = trace.status;
  rep.message_counts = count_messages(trace);
  for (const auto& [k, v] : rep.message_counts) rep.total_broadcasts += v;
  rep.completion_round = claim_round(trace);
  for (const auto& r : trace.rounds) {
    if (!r.claims.empty()) {
      rep.claimant = r.claims.front();
      break;
    }
  }

  const auto finals = final_snapshots(trace);
  Coloring coloring(topo.size(), kNoColor);
  for (ProcessIndex i : all_processes(topo.size())) coloring[i] = finals[i].color.value_or(kNoColor);
  const bool tree_protocol = proto == "seq_tree" || proto == "par_tree";
  rep.coloring = check_coloring(topo, coloring, m.delta, tree_protocol);

  // TDMA replay with enough slots for every colour in use.
  Color max_color = static_cast<Color>(m.delta);
  for (Color c : coloring) max_color = std::max(max_color, c);
  rep.tdma_clashes = tdma_replay(topo, coloring, static_cast<std::size_t>(max_color));

  rep.bounds = check_bounds(trace, initial);
  if (proto == "par_tree" && m.delta > 0 && rep.completion_round) {
    const auto im = metrics(initial, trace.header.root);
    if (im.depth * im.delta > 0) {
      rep.round_ratio = static_cast<double>(*rep.completion_round - trace.header.start_round) /
                        static_cast<double>(im.depth * im.delta);
    }
  }

  // Independent clash recheck over the broadcast records.
  {
    NamedCheck recheck{"clash_recheck", true, ""};
    NamedCheck clash_free{"clash_free", true, ""};
    NamedCheck single{"single_broadcast_per_process", true, ""};
    const bool end_relaxed = trace.header.param("sibling_end_parallel") == "1";
    Topology t = initial;
    for (const auto& r : trace.rounds) {
      for (const auto& j : r.joins) t = with_leaf(t, j.parent, j.identity);
      std::vector<ProcessIndex> origins;
      for (const auto& b : r.broadcasts) origins.push_back(b.origin);
      std::set<ProcessIndex> distinct(origins.begin(), origins.end());
      if (distinct.size() != origins.size() && single.pass) {
        single = {single.name, false, "round " + std::to_string(r.round)};
      }
      auto expected = detect_clashes(t, origins, r.round);
      bool same = expected.size() == r.clashes.size();
      for (std::size_t k = 0; same && k < expected.size(); ++k) {
        same = expected[k].victim == r.clashes[k].victim && expected[k].kind == r.clashes[k].kind &&
               expected[k].participants == r.clashes[k].participants;
      }
      std::set<ProcessIndex> victims;
      for (const auto& e : expected) victims.insert(e.victim);
      for (const auto& b : r.broadcasts) {
        std::vector<ProcessIndex> want;
        for (ProcessIndex q : t.neighbors(b.origin)) {
          if (!victims.contains(q)) want.push_back(q);
        }
        same = same && want == b.receivers;
      }
      if (!same && recheck.pass) recheck = {recheck.name, false, "round " + std::to_string(r.round)};
      for (const auto& e : expected) {
        bool tolerated = end_relaxed && e.kind == ClashKind::Collision;
        for (const auto& b : r.broadcasts) {
          const bool involved =
              std::find(e.participants.begin(), e.participants.end(), b.origin) != e.participants.end();
          if (involved && !std::holds_alternative<End>(b.message)) tolerated = false;
        }
        if (!tolerated && clash_free.pass) {
          clash_free = {clash_free.name, false,
                        std::string(to_string(e.kind)) + " at process " + e.victim.str() +
                            " in round " + std::to_string(r.round)};
        }
      }
    }
    rep.invariants.push_back(recheck);
    rep.invariants.push_back(clash_free);
    rep.invariants.push_back(single);
  }

  if (proto == "seq_tree" || proto == "arbitrary") {
    NamedCheck flow{"sequential_flow", true, ""};
    for (const auto& r : trace.rounds) {
      if (r.broadcasts.size() > 1) {
        flow = {flow.name, false, "round " + std::to_string(r.round)};
        break;
      }
    }
    rep.invariants.push_back(flow);
  }

  if (proto == "seq_tree") {
    NamedCheck d1_check{"d1colors_below_delta", true, ""};
    const auto delta = static_cast<std::int64_t>(metrics(initial, trace.header.root).delta);
    auto real = [](const std::vector<Color>& v) {
      return static_cast<std::int64_t>(std::count_if(v.begin(), v.end(), [](Color c) { return c != kNoColor; }));
    };
    auto fail = [&](const std::string& why) {
      if (d1_check.pass) d1_check = {d1_check.name, false, why};
    };
    for (const auto& s : trace.initial) {
      if ((s.state == 1 || s.state == 2) && real(s.d1) >= delta) fail("initial p" + s.process.str());
    }
    for (const auto& r : trace.rounds) {
      for (const auto& s : r.snapshots) {
        if ((s.state == 1 || s.state == 2) && real(s.d1) >= delta) {
          fail("round " + std::to_string(r.round) + " p" + s.process.str());
        }
      }
      for (const auto& b : r.broadcasts) {
        if (const auto* c = std::get_if<ColorSeq>(&b.message); c && real(c->d1colors) >= delta) {
          fail("payload in round " + std::to_string(r.round));
        }
      }
    }
    rep.invariants.push_back(d1_check);

    NamedCheck root_delta{"root_learns_delta", false, "no claim"};
    if (rep.claimant) {
      const auto& s = finals[*rep.claimant];
      root_delta.pass = s.bound == delta;
      root_delta.detail = "max_d=" + (s.bound ? std::to_string(*s.bound) : std::string("-"));
    }
    rep.invariants.push_back(root_delta);
  }

  if (proto == "par_tree") {
    NamedCheck edge{"child_color_within_parent_degree", true, ""};
    for (ProcessIndex i : all_processes(topo.size())) {
      const auto& s = finals[i];
      if (!s.parent || *s.parent == topo.identity(i) || !s.color) continue;
      auto p = topo.neighbor_with_identity(i, *s.parent);
      if (!p) {
        edge = {edge.name, false, "p" + i.str() + " parent not a neighbour"};
        break;
      }
      if (*s.color < 0 || *s.color > static_cast<Color>(topo.degree(*p))) {
        edge = {edge.name, false,
                "p" + i.str() + " color " + std::to_string(*s.color) + " parent degree " +
                    std::to_string(topo.degree(*p))};
        break;
      }
    }
    rep.invariants.push_back(edge);

    if (trace.header.param("end_phase") != "0") {
      NamedCheck wave{"end_wave_complete", true, ""};
      const auto want = static_cast<std::int64_t>(m.delta) + 1;
      for (const auto& s : finals) {
        if (s.state != 6 || s.bound != want) {
          wave = {wave.name, false,
                  "p" + s.process.str() + " state " + std::to_string(s.state) + " max_nb_cl " +
                      (s.bound ? std::to_string(*s.bound) : std::string("-"))};
          break;
        }
      }
      rep.invariants.push_back(wave);
    }
  }

  if (proto == "arbitrary" && trace.header.param("pinned") == "table1") {
    const auto diffs = table1_mismatches(trace);
    rep.invariants.push_back({"table1_replay", diffs.empty(), diffs.empty() ? "" : diffs.front()});
  }
  return rep;
}

}  // namespace d2c
