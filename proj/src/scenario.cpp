#include "d2color/scenario.hpp"

namespace d2c {

std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::SeqTree: return "seq_tree";
    case ProtocolKind::ParTree: return "par_tree";
    case ProtocolKind::Arbitrary: return "arbitrary";
  }
  return "unknown";
}

ProtocolKind parse_protocol_kind(std::string_view text) {
  if (text == "seq_tree") return ProtocolKind::SeqTree;
  if (text == "par_tree") return ProtocolKind::ParTree;
  if (text == "arbitrary") return ProtocolKind::Arbitrary;
  throw Error(ErrorKind::MalformedInput, "unknown protocol '" + std::string(text) + "'");
}

namespace {

TraceHeader make_header(const Scenario& s) {
  TraceHeader h;
  h.protocol = std::string(to_string(s.protocol));
  h.root = s.root;
  h.start_round = s.start_round;
  h.params.emplace_back("source", s.source);
  h.params.emplace_back("policy", std::string(to_string(s.policy)));
  h.params.emplace_back("seed", std::to_string(s.seed));
  switch (s.protocol) {
    case ProtocolKind::SeqTree:
      h.params.emplace_back("child_order", std::string(to_string(s.seq.order)));
      break;
    case ProtocolKind::ParTree:
      h.params.emplace_back("end_phase", s.par.end_phase ? "1" : "0");
      h.params.emplace_back("sibling_end_parallel", s.par.sibling_end_parallel ? "1" : "0");
      h.params.emplace_back("root_always_ends", s.par.root_always_ends ? "1" : "0");
      break;
    case ProtocolKind::Arbitrary:
      h.params.emplace_back("pinned", s.pinned_name.empty() ? "-" : s.pinned_name);
      break;
  }
  return h;
}

std::unique_ptr<Protocol> make_protocol(const Scenario& s) {
  switch (s.protocol) {
    case ProtocolKind::SeqTree: {
      SeqOptions o = s.seq;
      o.seed = s.seed;
      return std::make_unique<SeqTreeProtocol>(o);
    }
    case ProtocolKind::ParTree: return std::make_unique<ParTreeProtocol>(s.par);
    case ProtocolKind::Arbitrary: return std::make_unique<ArbitraryProtocol>(s.schedule);
  }
  throw Error(ErrorKind::MalformedInput, "unknown protocol");
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s) {
  if (s.protocol != ProtocolKind::Arbitrary && s.topology.kind() != TopologyKind::Tree) {
    throw Error(ErrorKind::NotATree, std::string(to_string(s.protocol)) + " needs a tree topology");
  }
  if (s.root.value < 1 || s.root.value > s.topology.size()) {
    throw Error(ErrorKind::InvalidEdge, "root " + s.root.str() + " out of range");
  }
  Simulation sim(s.topology, make_protocol(s), make_header(s),
                 SimulationOptions{s.policy, s.order, s.seed});
  ScenarioResult out{{}, RunStatus::Running, s.topology, s.topology, std::nullopt, ""};
  try {
    sim.schedule_external(s.start_round, s.root, Start{});
    sim.run(s.max_rounds);
    for (ProcessIndex parent : s.joins) {
      if (sim.status() != RunStatus::AllTerminal) break;
      sim.add_leaf(parent, fresh_join_identity(sim.topology(), parent));
      sim.run(s.max_rounds);
    }
  } catch (const Error& e) {
    out.error = e.kind();
    out.error_message = e.what();
  }
  out.trace = sim.trace();
  if (out.error && out.trace.status == RunStatus::Running) out.trace.status = RunStatus::Partial;
  out.status = out.trace.status;
  out.final_topology = sim.topology();
  return out;
}

}  // namespace d2c
