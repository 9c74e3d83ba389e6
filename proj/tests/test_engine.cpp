#include <doctest.h>

#include "d2color/engine.hpp"
#include "d2color/proto_tree_par.hpp"
#include "d2color/proto_tree_seq.hpp"

using namespace d2c;

namespace {

ProcessIndex P(std::uint32_t v) { return ProcessIndex{v}; }

/// Every process broadcasts in round 0 and records what it hears.
class Flood final : public Protocol {
 public:
  std::string_view name() const override { return "flood"; }
  void attach(const Topology& t) override {
    n_ = t.size();
    heard_.assign(n_ + 1, 0);
    ids_ = t.identities();
  }
  void on_external(ProcessIndex, const ProtocolMessage&, Clock) override {}
  ClockAction on_clock(ProcessIndex self, Clock clock) override {
    if (clock != 0) return {};
    return {false, End{ids_[self], 0}};
  }
  void on_receive(ProcessIndex self, const ProtocolMessage&, Clock) override { ++heard_[self.value]; }
  ProcessSnapshot snapshot(ProcessIndex self) const override {
    ProcessSnapshot s;
    s.process = self;
    s.state = heard_[self.value];
    return s;
  }
  bool may_act(ProcessIndex) const override { return false; }
  std::optional<ProcessIndex> claimant() const override { return std::nullopt; }
  RunStatus outcome() const override { return RunStatus::Running; }

  std::size_t n_ = 0;
  std::vector<int> heard_;
  PerProcess<Identity> ids_;
};

TraceHeader header(std::string protocol) {
  TraceHeader h;
  h.protocol = std::move(protocol);
  return h;
}

}  // namespace

TEST_CASE("clash detection follows the definitions") {
  const auto path = builtin_topology("path3");
  // Two neighbours of 2 broadcast: collision at 2 only.
  std::vector<ProcessIndex> b{P(1), P(3)};
  auto ev = detect_clashes(path, b, 0);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].victim == P(2));
  CHECK(ev[0].kind == ClashKind::Collision);
  CHECK(ev[0].participants == std::vector<ProcessIndex>{P(1), P(3)});

  // Two adjacent broadcasters: conflict at both.
  std::vector<ProcessIndex> c{P(1), P(2)};
  ev = detect_clashes(path, c, 4);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].kind == ClashKind::Conflict);
  CHECK(ev[0].victim == P(1));
  CHECK(ev[1].victim == P(2));
  CHECK(ev[1].round == 4);

  // Star: centre and leaves all broadcast.
  const auto star = builtin_topology("star4");
  std::vector<ProcessIndex> all{P(1), P(2), P(3), P(4), P(5)};
  ev = detect_clashes(star, all, 0);
  int conflicts = 0;
  int collisions = 0;
  for (const auto& e : ev) (e.kind == ClashKind::Conflict ? conflicts : collisions)++;
  CHECK(conflicts == 5);
  CHECK(collisions == 1);
  std::vector<ProcessIndex> lone{P(3)};
  CHECK(detect_clashes(star, lone, 0).empty());
}

TEST_CASE("record_and_corrupt: every process with a neighbour hears nothing") {
  const auto t = generate_random_tree(30, 4, 3);
  auto flood = std::make_unique<Flood>();
  Flood* f = flood.get();
  Simulation sim(t, std::move(flood), header("flood"), {ClashPolicy::RecordAndCorrupt});
  sim.step_round();
  for (ProcessIndex i : all_processes(t.size())) CHECK(f->heard_[i.value] == 0);
  const auto& r = sim.trace().rounds.front();
  CHECK(r.broadcasts.size() == 30);
  for (const auto& b : r.broadcasts) CHECK(b.receivers.empty());
  CHECK(!r.clashes.empty());
}

TEST_CASE("fail_fast aborts at round 0") {
  const auto t = builtin_topology("binary15");
  Simulation sim(t, std::make_unique<Flood>(), header("flood"));
  try {
    sim.step_round();
    FAIL("expected ClashDetectedError");
  } catch (const ClashDetectedError& e) {
    CHECK(e.kind() == ErrorKind::ClashDetected);
    CHECK(!e.events().empty());
    CHECK(e.events().front().round == 0);
  }
  CHECK(sim.status() == RunStatus::ClashAborted);
  CHECK(sim.trace().rounds.size() == 1);
}

TEST_CASE("empty rounds still advance the clock") {
  Simulation sim(builtin_topology("path3"), std::make_unique<SeqTreeProtocol>(), header("seq_tree"));
  CHECK(sim.clock() == -1);
  sim.step_round();
  sim.step_round();
  CHECK(sim.clock() == 1);
  CHECK(sim.trace().rounds[1].broadcasts.empty());
}

TEST_CASE("START handling") {
  Simulation sim(builtin_topology("path3"), std::make_unique<SeqTreeProtocol>(), header("seq_tree"));
  sim.schedule_external(0, P(1), Start{});
  CHECK_THROWS_AS(sim.schedule_external(1, P(2), Start{}), Error);
  try {
    sim.schedule_external(2, P(3), Start{});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateStart);
  }
}

TEST_CASE("run statuses") {
  {
    Simulation sim(builtin_topology("path3"), std::make_unique<SeqTreeProtocol>(), header("seq_tree"));
    sim.schedule_external(0, P(1), Start{});
    CHECK(sim.run(0) == RunStatus::BudgetExhausted);
    CHECK(sim.trace().rounds.empty());
  }
  {
    Simulation sim(builtin_topology("singleton"), std::make_unique<SeqTreeProtocol>(), header("seq_tree"));
    sim.schedule_external(0, P(1), Start{});
    CHECK(sim.run(100) == RunStatus::Terminated);
    std::size_t broadcasts = 0;
    for (const auto& r : sim.trace().rounds) broadcasts += r.broadcasts.size();
    CHECK(broadcasts == 0);
    CHECK(sim.protocol().claimant() == P(1));
  }
  {
    // Nothing scheduled: nobody can act.
    Simulation sim(builtin_topology("path3"), std::make_unique<SeqTreeProtocol>(), header("seq_tree"));
    sim.step_round();
    CHECK(sim.run(10) == RunStatus::Partial);
  }
}

TEST_CASE("trace text round trip and determinism") {
  auto run = [](HandlerOrder order, std::uint64_t seed) {
    const auto t = generate_random_tree(40, 4, 11);
    TraceHeader h = header("par_tree");
    h.params = {{"end_phase", "1"}};
    Simulation sim(t, std::make_unique<ParTreeProtocol>(ParOptions{true, false, true}), h,
                   {ClashPolicy::FailFast, order, seed});
    sim.schedule_external(0, P(1), Start{});
    sim.run(10000);
    return sim.trace();
  };
  const auto a = run(HandlerOrder::Ascending, 0);
  const auto b = run(HandlerOrder::Ascending, 0);
  CHECK(serialize_trace(a) == serialize_trace(b));
  CHECK(a.status == RunStatus::AllTerminal);
  CHECK(parse_trace(serialize_trace(a)) == a);

  // Handler order is not observable in protocol-visible state.
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = run(HandlerOrder::Shuffled, seed);
    CHECK(serialize_trace(s) == serialize_trace(a));
  }
}

TEST_CASE("malformed traces") {
  CHECK_THROWS_AS(parse_trace("nonsense\n"), Error);
  CHECK_THROWS_AS(parse_trace("d2color-trace 1\nmeta protocol=x n=1 root=1 start=0\n"), Error);
  CHECK_THROWS_AS(parse_trace("d2color-trace 1\nsnap p=1\nstatus outcome=partial rounds=0\n"), Error);
}
