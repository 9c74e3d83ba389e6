// d2color: generate topologies, run colouring protocols, verify traces, sweep.
#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "d2color/scenario.hpp"
#include "d2color/verifier.hpp"

namespace {

using namespace d2c;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitClash = 2;
constexpr int kExitUsage = 3;

struct GenArgs {
  bool tree = false;
  bool graph = false;
  std::string builtin;
  std::size_t n = 0;
  std::size_t max_degree = 4;
  std::size_t extra_edges = 0;
  std::uint64_t seed = 0;
  std::string identities = "global";
  std::string out;
};

struct RunArgs {
  std::string protocol = "seq_tree";
  std::string builtin;
  std::string topology;
  std::uint32_t root = 1;
  Clock start_round = 0;
  std::size_t max_rounds = 1'000'000;
  std::uint64_t seed = 0;
  std::string child_order = "smallest";
  bool no_end_phase = false;
  bool sibling_end_parallel = false;
  bool root_always_ends = false;
  std::string policy = "fail_fast";
  bool shuffled = false;
  bool pin_table1 = false;
  std::vector<std::uint32_t> joins;
  std::string trace_out;
};

struct VerifyArgs {
  std::string trace;
  std::string topology;
  std::string builtin;
  std::string report_out;
};

struct BenchArgs {
  std::string protocol = "par_tree";
  std::vector<std::size_t> sizes{10, 20, 50, 100, 200, 500, 1000};
  std::size_t seeds = 5;
  std::size_t max_degree = 6;
  std::uint64_t seed = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MalformedInput, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MalformedInput, "cannot write " + path);
  out << text;
}

int cmd_gen(const GenArgs& a) {
  Topology t;
  if (!a.builtin.empty()) {
    t = builtin_topology(a.builtin);
  } else if (a.tree == a.graph) {
    std::cerr << "gen: pick exactly one of --tree, --graph, --builtin\n";
    return kExitUsage;
  } else if (a.tree) {
    t = generate_random_tree(a.n, a.max_degree, a.seed);
  } else {
    t = generate_random_connected_graph(a.n, a.extra_edges, a.seed);
  }
  if (a.identities == "reuse") {
    t = assign_identities(t, IdentityMode::Distance2UniqueWithReuse, a.seed);
  } else if (a.identities != "global") {
    std::cerr << "gen: --identities must be global or reuse\n";
    return kExitUsage;
  }
  const auto m = metrics(t, ProcessIndex{1});
  if (a.out.empty()) {
    std::cout << to_json(t) << '\n';
  } else {
    write_topology_file(a.out, t);
  }
  std::cerr << "n=" << t.size() << " delta=" << m.delta << " depth=" << m.depth << '\n';
  return kExitPass;
}

Topology load_topology(const std::string& builtin, const std::string& file) {
  if (!builtin.empty()) return builtin_topology(builtin);
  if (!file.empty()) return read_topology_file(file);
  throw Error(ErrorKind::MalformedInput, "need --builtin or --topology");
}

int cmd_run(const RunArgs& a) {
  Scenario s;
  s.topology = load_topology(a.builtin, a.topology);
  s.source = a.builtin.empty() ? "custom" : a.builtin;
  s.protocol = parse_protocol_kind(a.protocol);
  s.root = ProcessIndex{a.root};
  s.start_round = a.start_round;
  s.max_rounds = a.max_rounds;
  s.seed = a.seed;
  s.seq.order = parse_child_order(a.child_order);
  s.par.end_phase = !a.no_end_phase;
  s.par.sibling_end_parallel = a.sibling_end_parallel;
  s.par.root_always_ends = a.root_always_ends;
  s.policy = parse_clash_policy(a.policy);
  s.order = a.shuffled ? HandlerOrder::Shuffled : HandlerOrder::Ascending;
  if (a.pin_table1) {
    s.schedule = table1_schedule();
    s.pinned_name = "table1";
  }
  for (auto p : a.joins) s.joins.push_back(ProcessIndex{p});

  const ScenarioResult r = run_scenario(s);
  const std::string text = serialize_trace(r.trace);
  if (!a.trace_out.empty()) {
    write_file(a.trace_out, text);
  } else {
    std::cout << text;
  }

  std::size_t broadcasts = 0;
  for (const auto& round : r.trace.rounds) broadcasts += round.broadcasts.size();
  Coloring coloring(r.final_topology.size(), kNoColor);
  const auto finals = final_snapshots(r.trace);
  for (ProcessIndex i : all_processes(r.final_topology.size())) {
    coloring[i] = finals[i].color.value_or(kNoColor);
  }
  std::cerr << "status=" << to_string(r.status) << " rounds=" << r.trace.rounds.size()
            << " broadcasts=" << broadcasts << " palette=" << palette_size(coloring) << '\n';
  if (r.error) {
    std::cerr << "error: " << r.error_message << '\n';
    return kExitClash;
  }
  return r.status == RunStatus::Terminated || r.status == RunStatus::AllTerminal ? kExitPass
                                                                                 : kExitFail;
}

int cmd_verify(const VerifyArgs& a) {
  const RunTrace trace = parse_trace(read_file(a.trace));
  std::string builtin = a.builtin;
  if (builtin.empty() && a.topology.empty()) {
    auto source = trace.header.param("source");
    if (!source || *source == "custom") {
      throw Error(ErrorKind::MalformedInput, "trace has no built-in source; pass --topology");
    }
    builtin = *source;
  }
  const Topology topo = load_topology(builtin, a.topology);
  if (topo.size() != trace.header.n) {
    throw Error(ErrorKind::MalformedInput, "topology has " + std::to_string(topo.size()) +
                                               " processes, trace has " +
                                               std::to_string(trace.header.n));
  }
  const auto report = verify_trace(topo, trace);
  const std::string text = serialize_report(report);
  if (a.report_out.empty()) {
    std::cout << text;
  } else {
    write_file(a.report_out, text);
  }
  if (trace.status == RunStatus::ClashAborted) return kExitClash;
  return report.passed() ? kExitPass : kExitFail;
}

int cmd_bench(const BenchArgs& a) {
  const ProtocolKind kind = parse_protocol_kind(a.protocol);
  if (kind == ProtocolKind::Arbitrary) {
    std::cerr << "bench: tree protocols only\n";
    return kExitUsage;
  }
  bool all_ok = true;
  std::cout << "protocol\tn\tdelta\tdepth\tseed\trounds\tbroadcasts\tratio\tbounds_ok\n";
  for (std::size_t n : a.sizes) {
    for (std::size_t k = 0; k < a.seeds; ++k) {
      const std::uint64_t seed = a.seed * 1000003ULL + n * 31 + k;
      Scenario s;
      s.topology = generate_random_tree(n, a.max_degree, seed);
      s.protocol = kind;
      s.seed = seed;
      s.par.root_always_ends = true;
      const auto r = run_scenario(s);
      const auto rep = verify_trace(r.initial_topology, r.trace);
      bool ok = !r.error;
      for (const auto& b : rep.bounds) ok = ok && b.pass;
      all_ok = all_ok && ok;
      std::cout << a.protocol << '\t' << n << '\t' << rep.delta << '\t' << rep.depth << '\t' << seed
                << '\t' << (rep.completion_round ? *rep.completion_round - s.start_round : -1)
                << '\t' << rep.total_broadcasts << '\t' << std::fixed << std::setprecision(4)
                << (rep.round_ratio ? *rep.round_ratio : 0.0) << std::defaultfloat << '\t'
                << (ok ? 1 : 0) << '\n';
    }
  }
  return all_ok ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-2 colouring protocol simulator and verifier"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write a topology file");
  g->add_flag("--tree", gen.tree, "Random tree");
  g->add_flag("--graph", gen.graph, "Random connected graph");
  g->add_option("--builtin", gen.builtin, "Named fixture")
      ->check(CLI::IsMember(builtin_names()));
  g->add_option("--n", gen.n, "Process count");
  g->add_option("--max-degree", gen.max_degree, "Degree cap for trees");
  g->add_option("--extra-edges", gen.extra_edges, "Chords added to the spanning tree");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--identities", gen.identities, "global | reuse");
  g->add_option("-o,--out", gen.out, "Output file (stdout if omitted)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run a protocol and write its trace");
  r->add_option("--protocol", run.protocol, "seq_tree | par_tree | arbitrary");
  r->add_option("--builtin", run.builtin, "Named fixture")->check(CLI::IsMember(builtin_names()));
  r->add_option("--topology", run.topology, "Topology file");
  r->add_option("--root", run.root, "Process receiving START");
  r->add_option("--start-round", run.start_round, "Round of the START delivery");
  r->add_option("--max-rounds", run.max_rounds, "Round budget");
  r->add_option("--seed", run.seed, "Seed for random choices");
  r->add_option("--child-order", run.child_order, "smallest | random (seq_tree)");
  r->add_flag("--no-end-phase", run.no_end_phase, "Skip the END wave (par_tree)");
  r->add_flag("--sibling-end-parallel", run.sibling_end_parallel, "Forward END immediately");
  r->add_flag("--root-always-ends", run.root_always_ends, "Degree-1 root still sends END");
  r->add_option("--clash-policy", run.policy, "fail_fast | record_and_corrupt");
  r->add_flag("--shuffled", run.shuffled, "Shuffle handler order each round");
  r->add_flag("--pin-table1-choices", run.pin_table1, "Use the published child choices");
  r->add_option("--join", run.joins, "Attach a leaf to this process after the run");
  r->add_option("--trace", run.trace_out, "Trace file (stdout if omitted)");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Check a trace");
  v->add_option("--trace", ver.trace, "Trace file")->required();
  v->add_option("--topology", ver.topology, "Topology file");
  v->add_option("--builtin", ver.builtin, "Named fixture")->check(CLI::IsMember(builtin_names()));
  v->add_option("--report", ver.report_out, "Report file (stdout if omitted)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Sweep random trees and tabulate costs");
  b->add_option("--protocol", bench.protocol, "seq_tree | par_tree");
  b->add_option("--n", bench.sizes, "Sizes to sweep")->delimiter(',');
  b->add_option("--seeds", bench.seeds, "Trees per size");
  b->add_option("--max-degree", bench.max_degree, "Degree cap");
  b->add_option("--seed", bench.seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*r) return cmd_run(run);
    if (*v) return cmd_verify(ver);
    if (*b) return cmd_bench(bench);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::ClashDetected:
      case ErrorKind::ProtocolViolation: return kExitClash;
      default: return kExitUsage;
    }
  }
  return kExitUsage;
}
