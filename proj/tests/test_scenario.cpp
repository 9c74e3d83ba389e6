#include <doctest.h>

#include "d2color/scenario.hpp"
#include "d2color/verifier.hpp"

using namespace d2c;

TEST_CASE("tree protocols refuse general graphs") {
  Scenario s;
  s.topology = builtin_topology("table1");
  s.protocol = ProtocolKind::ParTree;
  CHECK_THROWS_AS(run_scenario(s), Error);
}

TEST_CASE("budget exhausted") {
  Scenario s;
  s.topology = builtin_topology("binary15");
  s.max_rounds = 0;
  CHECK(run_scenario(s).status == RunStatus::BudgetExhausted);
  s.max_rounds = 3;
  CHECK(run_scenario(s).status == RunStatus::BudgetExhausted);
}

TEST_CASE("header records the scenario") {
  Scenario s;
  s.topology = builtin_topology("star4");
  s.source = "star4";
  s.protocol = ProtocolKind::ParTree;
  s.par.sibling_end_parallel = true;
  const auto r = run_scenario(s);
  CHECK(r.trace.header.protocol == "par_tree");
  CHECK(r.trace.header.param("source") == "star4");
  CHECK(r.trace.header.param("sibling_end_parallel") == "1");
  CHECK(r.trace.header.param("end_phase") == "1");
}

TEST_CASE("start round shifts the root colour") {
  Scenario s;
  s.topology = builtin_topology("star4");
  s.protocol = ProtocolKind::ParTree;
  s.start_round = 3;
  const auto r = run_scenario(s);
  CHECK(r.status == RunStatus::AllTerminal);
  CHECK(final_snapshots(r.trace)[ProcessIndex{1}].color == 4);
  CHECK(verify_trace(r.initial_topology, r.trace).passed());
}

TEST_CASE("protocol names") {
  for (auto k : {ProtocolKind::SeqTree, ProtocolKind::ParTree, ProtocolKind::Arbitrary}) {
    CHECK(parse_protocol_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_protocol_kind("nope"), Error);
}
