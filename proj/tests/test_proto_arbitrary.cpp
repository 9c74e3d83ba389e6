#include <doctest.h>

#include "d2color/proto_arbitrary.hpp"
#include "d2color/scenario.hpp"
#include "d2color/verifier.hpp"

using namespace d2c;

namespace {

ProcessIndex P(std::uint32_t v) { return ProcessIndex{v}; }

Scenario table1() {
  Scenario s;
  s.topology = builtin_topology("table1");
  s.source = "table1";
  s.protocol = ProtocolKind::Arbitrary;
  s.schedule = table1_schedule();
  s.pinned_name = "table1";
  return s;
}

/// State of process `p` right after engine round `round`.
ProcessSnapshot state_after(const RunTrace& t, Clock round, ProcessIndex p) {
  ProcessSnapshot s = t.initial[p.value - 1];
  for (const auto& r : t.rounds) {
    if (r.round > round) break;
    for (const auto& snap : r.snapshots) {
      if (snap.process == p) s = snap;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("START on the five-process network") {
  ArbitraryProtocol p;
  p.attach(builtin_topology("table1"));
  p.on_external(P(1), Start{}, 0);
  CHECK(p.state(P(1)).color == 0);
  CHECK(p.state(P(1)).state == 2);

  ArbitraryProtocol single;
  single.attach(builtin_topology("singleton"));
  single.on_external(P(1), Start{}, 0);
  CHECK(single.state(P(1)).state == 3);
}

TEST_CASE("published execution, cell by cell") {
  const auto r = run_scenario(table1());
  REQUIRE(!r.error);
  CHECK(r.status == RunStatus::Terminated);
  const auto& t = r.trace;

  // Table clock 2k is engine round k.
  CHECK(state_after(t, 1, P(2)).state == 2);
  CHECK(state_after(t, 1, P(2)).color == 1);
  CHECK(state_after(t, 3, P(4)).state == 1);
  CHECK(state_after(t, 4, P(3)).color == 3);
  CHECK(state_after(t, 4, P(3)).state == 4);
  CHECK(state_after(t, 7, P(4)).state == 3);
  // Overheard knowledge at p5 after clock 4.
  CHECK(state_after(t, 2, P(5)).d2 == std::vector<Color>{0, 2});
  CHECK(state_after(t, 2, P(5)).d1 == std::vector<Color>{1});

  REQUIRE(t.rounds.size() >= 5);
  REQUIRE(t.rounds[4].broadcasts.size() == 1);
  CHECK(t.rounds[4].broadcasts[0].message == ProtocolMessage{Correct{3, 4, 2, {0}}});
  CHECK(t.rounds[5].broadcasts[0].message == ProtocolMessage{CorrectedColor{4, 2, 3, 3}});
  CHECK(t.rounds[6].broadcasts[0].message == ProtocolMessage{CorrectedColor{-1, -1, 2, 3}});

  const auto finals = final_snapshots(t);
  std::vector<Color> colors;
  for (const auto& s : finals) colors.push_back(*s.color);
  CHECK(colors == std::vector<Color>{0, 1, 3, 2, 2});

  const auto diffs = table1_mismatches(t);
  for (const auto& d : diffs) MESSAGE(d);
  CHECK(diffs.empty());
  CHECK(verify_trace(r.initial_topology, t).passed());
}

TEST_CASE("unpinned run on the same network") {
  auto s = table1();
  s.schedule.clear();
  s.pinned_name.clear();
  const auto r = run_scenario(s);
  CHECK(r.status == RunStatus::Terminated);
  CHECK(verify_trace(r.initial_topology, r.trace).coloring.consistency);
}

TEST_CASE("rollback of an empty colour sequence") {
  ArbitraryProtocol p;
  p.attach(builtin_topology("path3"));
  CHECK_THROWS_AS(p.on_receive(P(1), CorrectedColor{9, 1, 2, 3}, 0), Error);
  CHECK_THROWS_AS(p.on_receive(P(1), CorrectedColor{-1, -1, 2, 3}, 0), Error);
}

TEST_CASE("RESUME_COLORING") {
  ArbitraryProtocol p;
  p.attach(builtin_topology("path3"));
  p.on_receive(P(3), ResumeColoring{3, 2}, 0);
  CHECK(p.state(P(3)).state == 2);  // 2 still in to_color
  CHECK(p.state(P(3)).parent == 2);
  p.on_receive(P(1), ResumeColoring{9, 2}, 0);
  CHECK(p.state(P(1)).state == 0);
}

TEST_CASE("sequential flow and consistency on random trees") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Scenario s;
    s.topology = generate_random_tree(25, 2 + seed % 5, seed);
    s.protocol = ProtocolKind::Arbitrary;
    s.max_rounds = 20000;
    const auto r = run_scenario(s);
    REQUIRE(r.status == RunStatus::Terminated);
    for (const auto& round : r.trace.rounds) CHECK(round.broadcasts.size() <= 1);
    for (const auto& round : r.trace.rounds) CHECK(round.clashes.empty());
    const auto v = verify_trace(r.initial_topology, r.trace);
    CHECK(v.coloring.consistency);
  }
}

TEST_CASE("general graph counterexample: two RESUMEs in one round") {
  // 15 and 16 both hold colour 5 and neighbour 11. When 11 relays the
  // corrected colour with wildcard destinations, both take it as their own.
  Scenario s;
  s.topology = generate_random_connected_graph(20, 8, 0);
  s.protocol = ProtocolKind::Arbitrary;
  s.max_rounds = 20000;
  const auto r = run_scenario(s);
  CHECK(r.status == RunStatus::ClashAborted);
  REQUIRE(r.trace.rounds.size() == 46);
  const auto& last = r.trace.rounds.back();
  REQUIRE(last.broadcasts.size() == 2);
  CHECK(last.broadcasts[0].origin == P(15));
  CHECK(last.broadcasts[1].origin == P(16));
  CHECK(kind_of(last.broadcasts[0].message) == MessageKind::ResumeColoring);
  REQUIRE(last.clashes.size() == 1);
  CHECK(last.clashes[0].victim == P(11));
}
