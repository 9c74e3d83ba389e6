#include <doctest.h>

#include "d2color/scenario.hpp"
#include "d2color/verifier.hpp"

using namespace d2c;

namespace {

ProcessIndex P(std::uint32_t v) { return ProcessIndex{v}; }

Coloring make(std::vector<Color> v) {
  Coloring c(v.size());
  c.raw() = std::move(v);
  return c;
}

}  // namespace

TEST_CASE("check_coloring") {
  const auto path = builtin_topology("path3");
  auto ok = check_coloring(path, make({0, 1, 2}), 2, true);
  CHECK(ok.validity);
  CHECK(ok.consistency);
  CHECK(ok.palette_size == 3);

  auto bad = check_coloring(path, make({0, 1, 0}), 2, true);
  CHECK(!bad.consistency);
  REQUIRE(bad.offending);
  CHECK(bad.offending->a == P(1));
  CHECK(bad.offending->b == P(3));
  CHECK(bad.offending->distance == 2);

  auto out_of_range = check_coloring(path, make({0, 1, 3}), 2, true);
  CHECK(!out_of_range.validity);
  CHECK(out_of_range.invalid == std::vector<ProcessIndex>{P(3)});
  CHECK(check_coloring(path, make({0, 1, 3}), 2, false).validity);

  CHECK(check_coloring(builtin_topology("table1"), make({0, 1, 3, 2, 2}), 3, false).consistency);
  CHECK(!check_coloring(path, make({0, -1, 2}), 2, true).validity);
}

TEST_CASE("greedy reference colouring") {
  const auto star = build_topology(5, {{P(1), P(2)}, {P(1), P(3)}, {P(1), P(4)}, {P(1), P(5)}});
  CHECK(palette_size(greedy_reference_coloring(star)) == 5);
  const auto path = build_topology(6, {{P(1), P(2)}, {P(2), P(3)}, {P(3), P(4)}, {P(4), P(5)}, {P(5), P(6)}});
  CHECK(palette_size(greedy_reference_coloring(path)) == 3);
  CHECK(palette_size(greedy_reference_coloring(builtin_topology("singleton"))) == 1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = generate_random_connected_graph(50, 30, seed);
    CHECK(check_coloring(g, greedy_reference_coloring(g), g.max_degree(), false).consistency);
  }
}

TEST_CASE("tdma replay") {
  CHECK(tdma_replay(builtin_topology("singleton"), make({0}), 0) == 0);
  const auto star = builtin_topology("star4");
  CHECK(tdma_replay(star, make({0, 1, 2, 3, 4}), 4) == 0);
  // Siblings 2 and 3 share a colour: collision at the centre.
  CHECK(tdma_replay(star, make({0, 1, 1, 3, 4}), 4) >= 1);
}

TEST_CASE("tdma replay is zero exactly for consistent colourings") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto t = generate_random_tree(200, 5, seed);
    const auto delta = t.max_degree();
    Scenario s;
    s.topology = t;
    s.protocol = ProtocolKind::ParTree;
    s.par.root_always_ends = true;
    const auto r = run_scenario(s);
    Coloring c(t.size());
    for (const auto& snap : final_snapshots(r.trace)) c[snap.process] = *snap.color;
    CHECK(check_coloring(t, c, delta, true).consistency);
    CHECK(tdma_replay(t, c, delta) == 0);

    // Copy a colour onto a distance-2 partner.
    Rng rng(seed);
    const ProcessIndex a{static_cast<std::uint32_t>(rng.uniform(1, t.size()))};
    const auto& na = t.neighbors(a);
    const ProcessIndex mid = na[rng.uniform(0, na.size() - 1)];
    ProcessIndex b = mid;
    for (ProcessIndex q : t.neighbors(mid)) {
      if (q != a) b = q;
    }
    c[b] = c[a];
    CHECK(!check_coloring(t, c, delta, true).consistency);
    CHECK(tdma_replay(t, c, delta) >= 1);
  }
}

TEST_CASE("bounds") {
  Scenario seq;
  seq.topology = builtin_topology("path3");
  const auto r = run_scenario(seq);
  const auto b = check_bounds(r.trace, r.initial_topology);
  REQUIRE(b.size() == 2);
  CHECK(b[1].name == "seq_term_count_exact");
  CHECK(b[1].observed == 2);
  CHECK(b[1].pass);

  Scenario star;
  star.topology = builtin_topology("star4");
  const auto rs = run_scenario(star);
  const auto bs = check_bounds(rs.trace, rs.initial_topology);
  CHECK(bs[0].limit == 7);
  CHECK(bs[0].pass);

  Scenario par;
  par.topology = builtin_topology("star4");
  par.protocol = ProtocolKind::ParTree;
  const auto rp = run_scenario(par);
  const auto bp = check_bounds(rp.trace, rp.initial_topology);
  CHECK(bp[0].name == "par_coloring_broadcasts");
  CHECK(bp[0].limit == 6);
  CHECK(bp[0].pass);
  CHECK(bp[1].limit == 16);
  CHECK(bp[1].pass);
}

TEST_CASE("edited trace fails verification") {
  Scenario s;
  s.topology = builtin_topology("binary15");
  s.protocol = ProtocolKind::ParTree;
  const auto r = run_scenario(s);
  auto trace = r.trace;
  CHECK(verify_trace(r.initial_topology, trace).passed());
  // Overwrite the last snapshot of a leaf with its sibling's colour.
  const auto finals = final_snapshots(trace);
  auto& last_round = trace.rounds.back();
  ProcessSnapshot edited = finals[P(9)];
  edited.color = finals[P(8)].color;
  last_round.snapshots.push_back(edited);
  const auto rep = verify_trace(r.initial_topology, parse_trace(serialize_trace(trace)));
  CHECK(!rep.coloring.consistency);
  CHECK(!rep.passed());
  CHECK(serialize_report(rep).find("verdict fail") != std::string::npos);
}
