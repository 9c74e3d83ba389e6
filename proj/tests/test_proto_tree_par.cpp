#include <doctest.h>

#include "d2color/proto_tree_par.hpp"
#include "d2color/scenario.hpp"
#include "d2color/verifier.hpp"

using namespace d2c;

namespace {

ProcessIndex P(std::uint32_t v) { return ProcessIndex{v}; }

ParTreeProtocol attached(const Topology& t, ParOptions o = {}) {
  ParTreeProtocol p(o);
  p.attach(t);
  return p;
}

Scenario par_scenario(Topology t, ParOptions o = {}) {
  Scenario s;
  s.topology = std::move(t);
  s.protocol = ProtocolKind::ParTree;
  s.par = o;
  return s;
}

ErrorKind kind_of_throw(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::MalformedInput;
}

PerProcess<Color> colors_of(const ScenarioResult& r) {
  PerProcess<Color> out;
  for (const auto& s : final_snapshots(r.trace)) out.push_back(s.color.value_or(kNoColor));
  return out;
}

}  // namespace

TEST_CASE("root colour from the START clock") {
  auto p = attached(builtin_topology("star4"));
  p.on_external(P(1), Start{}, 0);
  CHECK(p.state(P(1)).color == 1);
  CHECK(p.state(P(1)).nb_cl_parent == 5);

  auto single = attached(builtin_topology("singleton"));
  single.on_external(P(1), Start{}, 0);
  CHECK(single.state(P(1)).color == 0);
  CHECK(single.state(P(1)).state == 3);

  // nb_cl = 4 at clock 5.
  const auto t = build_topology(4, {{P(1), P(2)}, {P(1), P(3)}, {P(1), P(4)}});
  auto q = attached(t);
  q.on_external(P(1), Start{}, 5);
  CHECK(q.state(P(1)).color == 2);
}

TEST_CASE("children get the palette minus colour and sender colour") {
  const auto star = build_topology(4, {{P(1), P(2)}, {P(1), P(3)}, {P(1), P(4)}});
  auto p = attached(star);
  p.on_external(P(1), Start{}, 0);
  auto a = p.on_clock(P(1), 1);
  REQUIRE(a.broadcast);
  CHECK(*a.broadcast == ProtocolMessage{ColorPar{{{2, 0}, {3, 2}, {4, 3}}, 1, 1, 4}});
  CHECK(p.state(P(1)).state == 2);

  const auto& msg = std::get<ColorPar>(*a.broadcast);
  for (std::uint32_t c = 2; c <= 4; ++c) p.on_receive(P(c), msg, 1);
  CHECK(p.state(P(2)).color == 0);
  CHECK(p.state(P(3)).color == 2);
  CHECK(p.state(P(4)).color == 3);
  CHECK(p.state(P(2)).state == 3);

  // Already coloured: discarded.
  p.on_receive(P(2), ColorPar{{{2, 3}}, 1, 1, 4}, 2);
  CHECK(p.state(P(2)).color == 0);
}

TEST_CASE("internal node colours its children") {
  // 1 - 2, 2 - 3, 2 - 4. Node 2 gets colour 0 from parent colour 1.
  const auto t = build_topology(4, {{P(1), P(2)}, {P(2), P(3)}, {P(2), P(4)}});
  auto p = attached(t);
  p.on_receive(P(2), ColorPar{{{2, 0}}, 1, 1, 2}, 1);
  auto a = p.on_clock(P(2), 2);
  REQUIRE(a.broadcast);
  const auto& m = std::get<ColorPar>(*a.broadcast);
  CHECK(m.pairs == std::vector<ColorPair>{{3, 2}, {4, 3}});
}

TEST_CASE("missing pair for an uncoloured child") {
  auto p = attached(builtin_topology("path3"));
  CHECK(kind_of_throw([&] { p.on_receive(P(2), ColorPar{{{9, 0}}, 1, 1, 2}, 1); }) ==
        ErrorKind::MissingPairForUncoloredChild);
}

TEST_CASE("TERM_PAR and END") {
  auto p = attached(builtin_topology("star4"));
  p.on_external(P(1), Start{}, 0);
  p.on_clock(P(1), 1);
  p.on_receive(P(1), TermPar{7, 2, 2}, 2);  // not for 1
  CHECK(p.state(P(1)).to_color.size() == 4);
  CHECK(kind_of_throw([&] { p.on_receive(P(1), TermPar{1, 9, 2}, 2); }) == ErrorKind::ProtocolViolation);
  for (Identity c = 2; c <= 5; ++c) p.on_receive(P(1), TermPar{1, c, 2}, 2);
  CHECK(p.state(P(1)).state == 5);
  CHECK(p.state(P(1)).max_nb_cl == 5);
  CHECK(p.claimant() == P(1));

  auto leaf = attached(builtin_topology("star4"));
  leaf.on_receive(P(2), ColorPar{{{2, 0}, {3, 2}, {4, 3}, {5, 4}}, 1, 1, 5}, 1);
  leaf.on_clock(P(2), 5);  // 5 mod 5 = 0 is its slot
  CHECK(leaf.state(P(2)).state == 4);
  leaf.on_receive(P(2), End{9, 5}, 6);  // wrong parent
  CHECK(leaf.state(P(2)).state == 4);
  leaf.on_receive(P(2), End{1, 5}, 6);
  CHECK(leaf.state(P(2)).state == 5);
  // A leaf leaves state 5 silently.
  auto a = leaf.on_clock(P(2), 10);
  CHECK(!a.broadcast);
  CHECK(leaf.state(P(2)).state == 6);
}

TEST_CASE("star and binary tree runs") {
  for (const char* name : {"star4", "binary15", "path3"}) {
    CAPTURE(name);
    auto s = par_scenario(builtin_topology(name));
    if (std::string(name) == "path3") s.root = P(2);
    const auto r = run_scenario(s);
    REQUIRE(!r.error);
    CHECK(r.status == RunStatus::AllTerminal);
    const auto rep = verify_trace(r.initial_topology, r.trace);
    CAPTURE(serialize_report(rep));
    CHECK(rep.passed());
    CHECK(rep.coloring.palette_size <= rep.delta + 1);
  }
  const auto r = run_scenario(par_scenario(builtin_topology("star4")));
  const auto rep = verify_trace(r.initial_topology, r.trace);
  CHECK(rep.message_counts.at("COLOR_PAR") + rep.message_counts.at("TERM_PAR") <= 6);
}

TEST_CASE("degree-1 root stays silent unless overridden") {
  const auto two = build_topology(2, {{P(1), P(2)}}, std::nullopt, TopologyKind::Tree);
  const auto literal = run_scenario(par_scenario(two));
  CHECK(literal.status == RunStatus::Partial);
  CHECK(final_snapshots(literal.trace)[P(2)].state == 4);

  const auto fixed = run_scenario(par_scenario(two, {true, false, true}));
  CHECK(fixed.status == RunStatus::AllTerminal);

  // Path rooted at an end, then at the middle.
  auto s = par_scenario(builtin_topology("path3"));
  CHECK(run_scenario(s).status == RunStatus::Partial);
  s.root = P(2);
  CHECK(run_scenario(s).status == RunStatus::AllTerminal);
}

TEST_CASE("without the END wave the root claims") {
  const auto r = run_scenario(par_scenario(builtin_topology("binary15"), {false, false, false}));
  CHECK(r.status == RunStatus::Terminated);
  CHECK(verify_trace(r.initial_topology, r.trace).passed());
}

TEST_CASE("sibling END parallelism") {
  const auto r = run_scenario(par_scenario(builtin_topology("binary15"), {true, true, false}));
  REQUIRE(!r.error);
  CHECK(r.status == RunStatus::AllTerminal);
  std::size_t tolerated = 0;
  for (const auto& round : r.trace.rounds) {
    for (const auto& c : round.clashes) tolerated += c.permitted;
  }
  CHECK(tolerated > 0);
  CHECK(verify_trace(r.initial_topology, r.trace).passed());
}

TEST_CASE("join on a path") {
  auto s = par_scenario(builtin_topology("path3"));
  s.root = P(2);
  s.joins = {P(3)};
  const auto r = run_scenario(s);
  REQUIRE(!r.error);
  CHECK(r.status == RunStatus::AllTerminal);
  CHECK(r.final_topology.size() == 4);
  const auto colors = colors_of(r);
  // Joiner avoids the colours of 3 and 2.
  CHECK(colors[P(4)] != colors[P(3)]);
  CHECK(colors[P(4)] != colors[P(2)]);
  CHECK(colors[P(4)] <= 2);
  CHECK(verify_trace(r.initial_topology, r.trace).passed());

  auto saturated = par_scenario(builtin_topology("path3"));
  saturated.root = P(2);
  saturated.joins = {P(2)};
  const auto bad = run_scenario(saturated);
  REQUIRE(bad.error);
  CHECK(*bad.error == ErrorKind::ParentSaturated);
}

TEST_CASE("fresh join identity") {
  const auto t = builtin_topology("star4");
  CHECK(fresh_join_identity(t, P(2)) == 3);  // excludes 2 and 1
}

TEST_CASE("merge") {
  const auto path = build_topology(3, {{P(1), P(2)}, {P(2), P(3)}}, std::nullopt, TopologyKind::Tree);
  const auto other = build_topology(3, {{P(1), P(2)}, {P(2), P(3)}}, std::vector<Identity>{4, 5, 6},
                                    TopologyKind::Tree);
  ColoredTree a{path, PerProcess<Color>(3)};
  a.colors.raw() = {0, 1, 2};
  ColoredTree b{other, PerProcess<Color>(3)};
  b.colors.raw() = {1, 2, 0};

  // 3 (colour 2, neighbour colour 1) meets 4 (colour 1): 4 and 2 would share colour 1.
  CHECK(kind_of_throw([&] { merge_colored_trees(a, P(3), b, P(1)); }) == ErrorKind::ConsistencyBroken);

  b.colors.raw() = {0, 2, 1};
  CHECK(kind_of_throw([&] { merge_colored_trees(a, P(3), b, P(1)); }) == ErrorKind::ConsistencyBroken);

  // Equal endpoint colours.
  b.colors.raw() = {2, 0, 1};
  CHECK(kind_of_throw([&] { merge_colored_trees(a, P(3), b, P(1)); }) == ErrorKind::ConsistencyBroken);

  // Compatible: a ends 1,2 ; b starts 0,... needs 0 ∉ {2,1}, b's neighbour ∉ {2}.
  b.colors.raw() = {0, 1, 2};
  const auto merged = merge_colored_trees(a, P(3), b, P(1));
  CHECK(merged.topology.size() == 6);
  CHECK(merged.colors.raw() == std::vector<Color>{0, 1, 2, 0, 1, 2});
  CHECK(check_coloring(merged.topology, merged.colors, 2, true).consistency);

  const auto star = builtin_topology("star4");
  ColoredTree s{star, PerProcess<Color>(5)};
  s.colors.raw() = {0, 1, 2, 3, 4};
  CHECK(kind_of_throw([&] { merge_colored_trees(a, P(3), s, P(2)); }) == ErrorKind::DegreeMismatch);
  CHECK(kind_of_throw([&] { merge_colored_trees(a, P(2), b, P(1)); }) == ErrorKind::SaturatedEndpoint);

  const auto clash_ids = build_topology(3, {{P(1), P(2)}, {P(2), P(3)}}, std::vector<Identity>{3, 7, 8},
                                        TopologyKind::Tree);
  ColoredTree c{clash_ids, b.colors};
  CHECK(kind_of_throw([&] { merge_colored_trees(a, P(3), c, P(1)); }) ==
        ErrorKind::IdentityPreconditionViolated);
}
