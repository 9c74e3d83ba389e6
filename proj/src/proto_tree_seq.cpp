#include "d2color/proto_tree_seq.hpp"

#include <algorithm>

namespace d2c {

namespace {

Color first_free(const std::vector<Color>& used) {
  Color c = 0;
  while (std::find(used.begin(), used.end(), c) != used.end()) ++c;
  return c;
}

}  // namespace

std::string_view to_string(ChildOrder order) {
  return order == ChildOrder::Smallest ? "smallest" : "random";
}

ChildOrder parse_child_order(std::string_view text) {
  if (text == "smallest") return ChildOrder::Smallest;
  if (text == "random") return ChildOrder::SeededRandom;
  throw Error(ErrorKind::MalformedInput, "unknown child order '" + std::string(text) + "'");
}

void SeqTreeProtocol::attach(const Topology& topology) {
  topology_ = topology;
  states_ = PerProcess<SeqState>(topology.size());
  rngs_.clear();
  for (ProcessIndex i : all_processes(topology.size())) {
    states_[i].max_d = static_cast<std::int64_t>(topology.degree(i));
    rngs_.emplace_back(options_.seed ^ (0x9e3779b97f4a7c15ULL * i.value));
  }
  claimant_.reset();
}

void SeqTreeProtocol::on_external(ProcessIndex target, const ProtocolMessage& msg, Clock) {
  if (!std::holds_alternative<Start>(msg)) {
    throw Error(ErrorKind::ProtocolViolation, "seq_tree accepts only START externally");
  }
  if (states_[target].state != 0) {
    throw Error(ErrorKind::ProtocolViolation, "START at non-idle process " + target.str());
  }
  const Identity id = topology_->identity(target);
  on_color(target, ColorSeq{id, id, kNoColor, {}});
}

void SeqTreeProtocol::on_color(ProcessIndex self, const ColorSeq& msg) {
  auto& s = states_[self];
  const Identity id = topology_->identity(self);
  if (msg.dest != id) return;
  if (s.color) {
    throw Error(ErrorKind::ProtocolViolation, "second COLOR_SEQ at process " + self.str());
  }
  s.parent = msg.sender;
  s.sender_cl = msg.sender_cl;
  s.d1colors = {msg.sender_cl};
  std::vector<Color> used = msg.d1colors;
  used.push_back(msg.sender_cl);
  s.color = first_free(used);
  s.to_color.clear();
  for (ProcessIndex q : topology_->neighbors(self)) {
    const Identity qid = topology_->identity(q);
    if (qid != msg.sender) s.to_color.insert(qid);
  }
  s.state = s.to_color.empty() ? 3 : 1;
}

void SeqTreeProtocol::on_term(ProcessIndex self, const TermSeq& msg) {
  auto& s = states_[self];
  if (msg.dest != topology_->identity(self)) return;
  if (s.state != 2 || !s.to_color.contains(msg.id)) {
    throw Error(ErrorKind::ProtocolViolation,
                "unexpected TERM_SEQ from " + std::to_string(msg.id) + " at process " + self.str());
  }
  s.to_color.erase(msg.id);
  if (std::find(s.d1colors.begin(), s.d1colors.end(), msg.sender_cl) == s.d1colors.end()) {
    s.d1colors.push_back(msg.sender_cl);
  }
  s.max_d = std::max(s.max_d, msg.max_d);
  s.state = s.to_color.empty() ? 3 : 1;
}

Identity SeqTreeProtocol::pick_next(ProcessIndex self) {
  const auto& pool = states_[self].to_color;
  if (options_.order == ChildOrder::Smallest) return *pool.begin();
  auto it = pool.begin();
  std::advance(it, static_cast<long>(rngs_[self.value - 1].uniform(0, pool.size() - 1)));
  return *it;
}

ClockAction SeqTreeProtocol::on_clock(ProcessIndex self, Clock) {
  auto& s = states_[self];
  const Identity id = topology_->identity(self);
  if (s.state == 1) {
    const Identity next = pick_next(self);
    s.state = 2;
    return {true, ColorSeq{next, id, *s.color, s.d1colors}};
  }
  if (s.state == 3) {
    s.state = 4;
    if (s.parent == id) {
      claimant_ = self;
      return {true, std::nullopt};
    }
    return {true, TermSeq{*s.parent, id, *s.color, s.max_d}};
  }
  return {};
}

void SeqTreeProtocol::on_receive(ProcessIndex self, const ProtocolMessage& msg, Clock) {
  if (const auto* c = std::get_if<ColorSeq>(&msg)) {
    on_color(self, *c);
  } else if (const auto* t = std::get_if<TermSeq>(&msg)) {
    on_term(self, *t);
  } else {
    throw Error(ErrorKind::ProtocolViolation,
                "seq_tree cannot handle " + std::string(to_string(kind_of(msg))));
  }
}

ProcessSnapshot SeqTreeProtocol::snapshot(ProcessIndex self) const {
  const auto& s = states_[self];
  ProcessSnapshot snap;
  snap.process = self;
  snap.state = s.state;
  snap.color = s.color;
  snap.parent = s.parent;
  snap.d1 = s.d1colors;
  snap.bound = s.max_d;
  return snap;
}

bool SeqTreeProtocol::may_act(ProcessIndex self) const {
  const int st = states_[self].state;
  return st == 1 || st == 3;
}

RunStatus SeqTreeProtocol::outcome() const {
  return claimant_ ? RunStatus::Terminated : RunStatus::Running;
}

}  // namespace d2c
