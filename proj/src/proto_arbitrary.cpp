#include "d2color/proto_arbitrary.hpp"

#include <algorithm>

namespace d2c {

namespace {

bool contains(const std::vector<Color>& v, Color c) {
  return std::find(v.begin(), v.end(), c) != v.end();
}

bool in_d1(const std::vector<D1Entry>& d1, Color c) {
  return std::any_of(d1.begin(), d1.end(), [&](const D1Entry& e) { return e.color == c; });
}

void add_d1(std::vector<D1Entry>& d1, Color c, Identity source) {
  const D1Entry e{c, source};
  if (std::find(d1.begin(), d1.end(), e) == d1.end()) d1.push_back(e);
}

/// Distinct d1 colours in first-insertion order, as carried on the wire.
std::vector<Color> d1_payload(const std::vector<D1Entry>& d1) {
  std::vector<Color> out;
  for (const auto& e : d1) {
    if (!contains(out, e.color)) out.push_back(e.color);
  }
  return out;
}

Color first_free(const std::vector<D1Entry>& d1, const std::vector<Color>& d2,
                 std::optional<Color> also) {
  Color c = 0;
  while (in_d1(d1, c) || contains(d2, c) || also == c) ++c;
  return c;
}

}  // namespace

ChildSchedule table1_schedule() { return {{1, {2}}, {2, {3, 5}}, {3, {4}}}; }

void ArbitraryProtocol::attach(const Topology& topology) {
  topology_ = topology;
  states_ = PerProcess<ArbState>(topology.size());
  for (ProcessIndex i : all_processes(topology.size())) {
    for (ProcessIndex q : topology.neighbors(i)) states_[i].to_color.insert(topology.identity(q));
  }
  schedule_pos_.clear();
  claimant_.reset();
}

void ArbitraryProtocol::claim(ProcessIndex self) {
  if (!claimant_) claimant_ = self;
}

void ArbitraryProtocol::on_external(ProcessIndex target, const ProtocolMessage& msg, Clock) {
  if (!std::holds_alternative<Start>(msg)) {
    throw Error(ErrorKind::ProtocolViolation, "arbitrary accepts only START externally");
  }
  const Identity id = topology_->identity(target);
  on_color(target, ColorArb{id, id, kNoColor, 0, {}});
}

void ArbitraryProtocol::on_color(ProcessIndex self, const ColorArb& msg) {
  auto& s = states_[self];
  const Identity id = topology_->identity(self);
  s.to_color.erase(msg.sender);
  s.d2.insert(s.d2.end(), msg.d1colors.begin(), msg.d1colors.end());

  if (msg.dest == id) {
    // Sender colour counts as a clash only when learned from someone else.
    const bool sender_clash = std::any_of(s.d1.begin(), s.d1.end(), [&](const D1Entry& e) {
      return e.color == msg.sender_cl && e.source != msg.sender;
    });
    if (sender_clash || in_d1(s.d1, msg.proposed_color) || contains(s.d2, msg.proposed_color)) {
      s.state = 1;
      s.sender = msg.sender;
    } else if (!s.to_color.empty()) {
      s.state = 2;
      s.color = msg.proposed_color;
      s.parent = msg.sender;
      add_d1(s.d1, msg.sender_cl, msg.sender);
    } else {
      s.state = 3;
      s.parent = msg.sender;
      s.color = msg.proposed_color;
    }
    return;
  }
  s.d2.push_back(msg.proposed_color);
  add_d1(s.d1, msg.sender_cl, msg.sender);
}

void ArbitraryProtocol::on_term(ProcessIndex self, const TermArb& msg) {
  auto& s = states_[self];
  const Identity id = topology_->identity(self);
  // Overheard TERMs also mark the sender as coloured.
  s.to_color.erase(msg.id);
  if (msg.dest != id) return;
  if (s.to_color.empty()) {
    if (s.parent == id) {
      claim(self);
    } else {
      s.state = 3;
    }
    return;
  }
  add_d1(s.d1, msg.color, msg.id);
  s.state = 2;
}

void ArbitraryProtocol::on_correct(ProcessIndex self, const Correct& msg) {
  auto& s = states_[self];
  if (msg.dest != topology_->identity(self)) return;
  s.d2.insert(s.d2.end(), msg.d1colors.begin(), msg.d1colors.end());
  add_d1(s.d1, msg.color, msg.sender);
  s.color = first_free(s.d1, s.d2, std::nullopt);
  s.sender = msg.sender;
  s.state = 4;
}

void ArbitraryProtocol::on_corrected(ProcessIndex self, const CorrectedColor& msg) {
  auto& s = states_[self];
  const Identity id = topology_->identity(self);
  if (msg.dest1 != id && msg.dest1 != kWildcard) {
    if (s.d1.empty()) {
      throw Error(ErrorKind::ProtocolViolation, "rollback of empty d1colors at process " + self.str());
    }
    s.d1.pop_back();
    add_d1(s.d1, msg.color, msg.sender);
  }
  if (msg.dest1 != id && msg.dest1 == kWildcard) {
    if (s.d2.empty()) {
      throw Error(ErrorKind::ProtocolViolation, "rollback of empty d2colors at process " + self.str());
    }
    s.d2.pop_back();
    s.d2.push_back(msg.color);
  }
  if (msg.dest2 == id) {
    s.state = 6;
    s.corrected_cl = msg.color;
  }
  if (msg.dest1 == kWildcard && msg.dest2 == kWildcard && s.color == msg.color) s.state = 5;
}

void ArbitraryProtocol::on_resume(ProcessIndex self, const ResumeColoring& msg) {
  auto& s = states_[self];
  if (msg.dest != topology_->identity(self)) return;
  s.parent = msg.sender;
  s.state = s.to_color.empty() ? 3 : 2;
}

Identity ArbitraryProtocol::pick_next(ProcessIndex self) {
  const auto& pool = states_[self].to_color;
  const Identity id = topology_->identity(self);
  if (auto it = schedule_.find(id); it != schedule_.end()) {
    auto& pos = schedule_pos_[id];
    while (pos < it->second.size()) {
      const Identity pinned = it->second[pos++];
      if (pool.contains(pinned)) return pinned;
    }
  }
  return *pool.begin();
}

ClockAction ArbitraryProtocol::on_clock(ProcessIndex self, Clock) {
  auto& s = states_[self];
  const Identity id = topology_->identity(self);
  switch (s.state) {
    case 1:
      s.color = first_free(s.d1, s.d2, std::nullopt);
      s.state = 0;
      return {true, Correct{s.sender, id, *s.color, d1_payload(s.d1)}};
    case 2: {
      if (s.to_color.empty()) {
        throw Error(ErrorKind::ProtocolViolation, "state 2 with nothing to colour at " + self.str());
      }
      const Color proposal = first_free(s.d1, {}, s.color);
      const Identity next = pick_next(self);
      s.state = 0;
      return {true, ColorArb{next, id, *s.color, proposal, d1_payload(s.d1)}};
    }
    case 3:
      s.state = 0;
      if (s.parent == id) {
        claim(self);
        return {true, std::nullopt};
      }
      return {true, TermArb{*s.parent, id, *s.color}};
    case 4:
      s.state = 0;
      return {true, CorrectedColor{s.sender, s.parent.value_or(kWildcard), id, *s.color}};
    case 5:
      s.state = 0;
      return {true, ResumeColoring{s.sender, id}};
    case 6:
      s.state = 0;
      return {true, CorrectedColor{kWildcard, kWildcard, id, s.corrected_cl}};
    default:
      return {};
  }
}

void ArbitraryProtocol::on_receive(ProcessIndex self, const ProtocolMessage& msg, Clock) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ColorArb>) {
          on_color(self, m);
        } else if constexpr (std::is_same_v<T, TermArb>) {
          on_term(self, m);
        } else if constexpr (std::is_same_v<T, Correct>) {
          on_correct(self, m);
        } else if constexpr (std::is_same_v<T, CorrectedColor>) {
          on_corrected(self, m);
        } else if constexpr (std::is_same_v<T, ResumeColoring>) {
          on_resume(self, m);
        } else {
          throw Error(ErrorKind::ProtocolViolation,
                      "arbitrary cannot handle " + std::string(to_string(kind_of(msg))));
        }
      },
      msg);
}

ProcessSnapshot ArbitraryProtocol::snapshot(ProcessIndex self) const {
  const auto& s = states_[self];
  ProcessSnapshot snap;
  snap.process = self;
  snap.state = s.state;
  snap.color = s.color;
  snap.parent = s.parent;
  for (const auto& e : s.d1) snap.d1.push_back(e.color);
  snap.d2 = s.d2;
  return snap;
}

bool ArbitraryProtocol::may_act(ProcessIndex self) const { return states_[self].state != 0; }

RunStatus ArbitraryProtocol::outcome() const {
  return claimant_ ? RunStatus::Terminated : RunStatus::Running;
}

}  // namespace d2c
