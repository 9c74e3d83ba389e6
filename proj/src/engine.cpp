#include "d2color/engine.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace d2c {

std::string_view to_string(ClashKind kind) {
  return kind == ClashKind::Collision ? "collision" : "conflict";
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Running: return "running";
    case RunStatus::Terminated: return "terminated";
    case RunStatus::AllTerminal: return "all_terminal";
    case RunStatus::Partial: return "partial";
    case RunStatus::BudgetExhausted: return "budget_exhausted";
    case RunStatus::ClashAborted: return "clash_aborted";
  }
  return "unknown";
}

RunStatus parse_run_status(std::string_view text) {
  for (auto s : {RunStatus::Running, RunStatus::Terminated, RunStatus::AllTerminal,
                 RunStatus::Partial, RunStatus::BudgetExhausted, RunStatus::ClashAborted}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorKind::MalformedInput, "unknown run status '" + std::string(text) + "'");
}

std::string_view to_string(ClashPolicy policy) {
  return policy == ClashPolicy::FailFast ? "fail_fast" : "record_and_corrupt";
}

ClashPolicy parse_clash_policy(std::string_view text) {
  if (text == "fail_fast") return ClashPolicy::FailFast;
  if (text == "record_and_corrupt") return ClashPolicy::RecordAndCorrupt;
  throw Error(ErrorKind::MalformedInput, "unknown clash policy '" + std::string(text) + "'");
}

std::optional<std::string> TraceHeader::param(const std::string& key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  return std::nullopt;
}

namespace {

std::string describe(const std::vector<ClashEvent>& events) {
  std::ostringstream os;
  os << events.size() << " clash event(s)";
  if (!events.empty()) {
    const auto& e = events.front();
    os << ", first at round " << e.round << ": " << to_string(e.kind) << " at process "
       << e.victim.value;
  }
  return os.str();
}

}  // namespace

ClashDetectedError::ClashDetectedError(std::vector<ClashEvent> events)
    : Error(ErrorKind::ClashDetected, describe(events)), events_(std::move(events)) {}

void Protocol::extend(const Topology&, ProcessIndex, ProcessIndex) {
  throw Error(ErrorKind::ProtocolViolation, std::string(name()) + " does not support joins");
}

bool Protocol::clash_permitted(const ClashEvent&, std::span<const BroadcastRecord>) const {
  return false;
}

std::vector<ClashEvent> detect_clashes(const Topology& topology,
                                       std::span<const ProcessIndex> broadcasters, Clock round) {
  std::vector<bool> active(topology.size() + 1, false);
  for (ProcessIndex p : broadcasters) active[p.value] = true;

  // Only processes adjacent to a broadcaster can be victims.
  std::set<ProcessIndex> candidates;
  for (ProcessIndex p : broadcasters) {
    for (ProcessIndex q : topology.neighbors(p)) candidates.insert(q);
  }

  std::vector<ClashEvent> events;
  for (ProcessIndex v : candidates) {
    std::vector<ProcessIndex> talking;
    for (ProcessIndex u : topology.neighbors(v)) {
      if (active[u.value]) talking.push_back(u);
    }
    if (active[v.value] && !talking.empty()) {
      std::vector<ProcessIndex> participants = talking;
      participants.push_back(v);
      std::sort(participants.begin(), participants.end());
      events.push_back({round, v, ClashKind::Conflict, std::move(participants), false});
    }
    if (talking.size() >= 2) {
      events.push_back({round, v, ClashKind::Collision, talking, false});
    }
  }
  return events;
}

Simulation::Simulation(Topology topology, std::unique_ptr<Protocol> protocol, TraceHeader header,
                       SimulationOptions options)
    : topology_(std::move(topology)),
      protocol_(std::move(protocol)),
      options_(options),
      order_rng_(options.order_seed) {
  protocol_->attach(topology_);
  trace_.header = std::move(header);
  trace_.header.n = topology_.size();
  last_snapshot_ = PerProcess<ProcessSnapshot>(topology_.size());
  for (ProcessIndex i : all_processes(topology_.size())) {
    last_snapshot_[i] = protocol_->snapshot(i);
    trace_.initial.push_back(last_snapshot_[i]);
  }
}

void Simulation::schedule_external(Clock round, ProcessIndex target, ProtocolMessage msg) {
  if (std::holds_alternative<Start>(msg)) {
    if (start_scheduled_) throw Error(ErrorKind::DuplicateStart, "a START was already scheduled");
    start_scheduled_ = true;
  }
  if (round <= clock_) {
    throw Error(ErrorKind::ProtocolViolation,
                "external message for round " + std::to_string(round) + " scheduled at round " +
                    std::to_string(clock_));
  }
  if (target.value < 1 || target.value > topology_.size()) {
    throw Error(ErrorKind::InvalidEdge, "external target " + target.str() + " out of range");
  }
  externals_.emplace(round, ExternalRecord{target, std::move(msg)});
}

std::vector<ProcessIndex> Simulation::handler_order() {
  auto order = all_processes(topology_.size());
  if (options_.order == HandlerOrder::Shuffled) order_rng_.shuffle(order.begin(), order.end());
  return order;
}

bool Simulation::externals_pending() const {
  return externals_.lower_bound(clock_ + 1) != externals_.end();
}

ProcessIndex Simulation::add_leaf(ProcessIndex parent, Identity identity) {
  Topology extended = with_leaf(topology_, parent, identity);
  const ProcessIndex joiner{static_cast<std::uint32_t>(extended.size())};
  protocol_->extend(extended, joiner, parent);
  topology_ = std::move(extended);
  last_snapshot_.push_back(protocol_->snapshot(joiner));
  pending_joins_.push_back({parent, joiner, identity});
  if (trace_.status != RunStatus::ClashAborted) trace_.status = RunStatus::Running;
  return joiner;
}

const RoundRecord& Simulation::step_round() {
  ++clock_;
  RoundRecord rec;
  rec.round = clock_;
  rec.joins = std::move(pending_joins_);
  pending_joins_.clear();

  std::vector<bool> touched(topology_.size() + 1, false);

  // Clock-guard handlers; each process gets at most one broadcast.
  for (ProcessIndex i : handler_order()) {
    ClockAction action = protocol_->on_clock(i, clock_);
    if (action.changed || action.broadcast) touched[i.value] = true;
    if (action.broadcast) rec.broadcasts.push_back({clock_, i, std::move(*action.broadcast), {}});
  }
  std::sort(rec.broadcasts.begin(), rec.broadcasts.end(),
            [](const BroadcastRecord& a, const BroadcastRecord& b) { return a.origin < b.origin; });

  std::vector<ProcessIndex> origins;
  for (const auto& b : rec.broadcasts) origins.push_back(b.origin);
  rec.clashes = detect_clashes(topology_, origins, clock_);
  bool fatal = false;
  for (auto& e : rec.clashes) {
    e.permitted = protocol_->clash_permitted(e, rec.broadcasts);
    fatal = fatal || !e.permitted;
  }

  // A clash victim loses every medium message this round.
  std::vector<bool> corrupted(topology_.size() + 1, false);
  for (const auto& e : rec.clashes) corrupted[e.victim.value] = true;
  for (auto& b : rec.broadcasts) {
    for (ProcessIndex r : topology_.neighbors(b.origin)) {
      if (!corrupted[r.value]) b.receivers.push_back(r);
    }
  }

  if (fatal && options_.policy == ClashPolicy::FailFast) {
    std::vector<ClashEvent> offending;
    for (const auto& e : rec.clashes) {
      if (!e.permitted) offending.push_back(e);
    }
    trace_.rounds.push_back(std::move(rec));
    trace_.status = RunStatus::ClashAborted;
    throw ClashDetectedError(std::move(offending));
  }

  // Inbox per receiver, ordered by origin.
  std::vector<std::vector<const ProtocolMessage*>> inbox(topology_.size() + 1);
  for (const auto& b : rec.broadcasts) {
    for (ProcessIndex r : b.receivers) inbox[r.value].push_back(&b.message);
  }

  auto [first, last] = externals_.equal_range(clock_);
  for (auto it = first; it != last; ++it) rec.externals.push_back(it->second);
  externals_.erase(first, last);
  for (const auto& ext : rec.externals) {
    protocol_->on_external(ext.target, ext.message, clock_);
    touched[ext.target.value] = true;
  }

  for (ProcessIndex i : handler_order()) {
    for (const ProtocolMessage* msg : inbox[i.value]) {
      protocol_->on_receive(i, *msg, clock_);
      touched[i.value] = true;
    }
  }

  for (ProcessIndex i : all_processes(topology_.size())) {
    if (!touched[i.value]) continue;
    ProcessSnapshot snap = protocol_->snapshot(i);
    if (snap != last_snapshot_[i]) {
      last_snapshot_[i] = snap;
      rec.snapshots.push_back(std::move(snap));
    }
  }

  if (auto c = protocol_->claimant(); c && !recorded_claim_) {
    recorded_claim_ = c;
    rec.claims.push_back(*c);
  }

  trace_.rounds.push_back(std::move(rec));
  return trace_.rounds.back();
}

RunStatus Simulation::run(std::size_t max_rounds) {
  if (trace_.status == RunStatus::ClashAborted) return trace_.status;
  trace_.status = RunStatus::Running;
  for (std::size_t executed = 0;; ++executed) {
    if (RunStatus s = protocol_->outcome(); s != RunStatus::Running && !externals_pending() &&
                                            pending_joins_.empty()) {
      trace_.status = s;
      return s;
    }
    bool anyone = externals_pending() || !pending_joins_.empty();
    for (ProcessIndex i : all_processes(topology_.size())) {
      if (anyone) break;
      anyone = protocol_->may_act(i);
    }
    if (!anyone && executed > 0) {
      trace_.status = RunStatus::Partial;
      return trace_.status;
    }
    if (executed >= max_rounds) {
      trace_.status = RunStatus::BudgetExhausted;
      return trace_.status;
    }
    step_round();
  }
}

// ---------------------------------------------------------------------------
// Trace text format.

namespace {

std::string join_indices(const std::vector<ProcessIndex>& v) {
  if (v.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(v[k].value);
  }
  return out;
}

std::string join_values(const std::vector<std::int64_t>& v) {
  if (v.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(v[k]);
  }
  return out;
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string("-");
}

std::int64_t to_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(ErrorKind::MalformedInput, "trace: expected integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::int64_t> to_values(std::string_view s) {
  std::vector<std::int64_t> out;
  if (s == "-") return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto c = s.find(',', pos);
    if (c == std::string_view::npos) c = s.size();
    out.push_back(to_int(s.substr(pos, c - pos)));
    pos = c + 1;
  }
  return out;
}

std::vector<ProcessIndex> to_indices(std::string_view s) {
  std::vector<ProcessIndex> out;
  for (auto v : to_values(s)) out.emplace_back(static_cast<std::uint32_t>(v));
  return out;
}

template <typename T>
std::optional<T> to_opt(std::string_view s) {
  if (s == "-") return std::nullopt;
  return static_cast<T>(to_int(s));
}

/// key=value tokens up to an optional trailing `msg=` which takes the rest.
struct LineFields {
  std::map<std::string, std::string, std::less<>> kv;
  std::string msg;

  explicit LineFields(std::string_view rest) {
    std::size_t pos = 0;
    while (pos < rest.size()) {
      if (rest.substr(pos, 4) == "msg=") {
        msg = std::string(rest.substr(pos + 4));
        return;
      }
      auto sp = rest.find(' ', pos);
      if (sp == std::string_view::npos) sp = rest.size();
      auto tok = rest.substr(pos, sp - pos);
      pos = sp + 1;
      if (tok.empty()) continue;
      auto eq = tok.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::MalformedInput, "trace: bad token '" + std::string(tok) + "'");
      }
      kv.emplace(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
    }
  }

  const std::string& at(std::string_view key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::MalformedInput, "trace: missing '" + std::string(key) + "'");
    return it->second;
  }
};

ProcessSnapshot parse_snapshot(const LineFields& f) {
  ProcessSnapshot s;
  s.process = ProcessIndex{static_cast<std::uint32_t>(to_int(f.at("p")))};
  s.state = static_cast<int>(to_int(f.at("state")));
  s.color = to_opt<Color>(f.at("color"));
  s.parent = to_opt<Identity>(f.at("parent"));
  s.d1 = to_values(f.at("d1"));
  s.d2 = to_values(f.at("d2"));
  s.bound = to_opt<std::int64_t>(f.at("bound"));
  s.nb_cl_parent = to_opt<std::int64_t>(f.at("nbp"));
  return s;
}

constexpr std::string_view kTraceMagic = "d2color-trace 1";

}  // namespace

std::string format_snapshot(const ProcessSnapshot& s) {
  std::ostringstream os;
  os << "p=" << s.process.value << " state=" << s.state << " color=" << opt(s.color)
     << " parent=" << opt(s.parent) << " d1=" << join_values(s.d1) << " d2=" << join_values(s.d2)
     << " bound=" << opt(s.bound) << " nbp=" << opt(s.nb_cl_parent);
  return os.str();
}

std::string serialize_trace(const RunTrace& trace) {
  std::ostringstream os;
  const auto& h = trace.header;
  os << kTraceMagic << '\n';
  os << "meta protocol=" << h.protocol << " n=" << h.n << " root=" << h.root.value
     << " start=" << h.start_round;
  for (const auto& [k, v] : h.params) os << ' ' << k << '=' << v;
  os << '\n';
  for (const auto& s : trace.initial) os << "init " << format_snapshot(s) << '\n';
  for (const auto& r : trace.rounds) {
    os << "round " << r.round << '\n';
    for (const auto& j : r.joins) {
      os << "join parent=" << j.parent.value << " joiner=" << j.joiner.value << " id=" << j.identity
         << '\n';
    }
    for (const auto& e : r.externals) {
      os << "ext target=" << e.target.value << " msg=" << format_message(e.message) << '\n';
    }
    for (const auto& b : r.broadcasts) {
      os << "bcast origin=" << b.origin.value << " recv=" << join_indices(b.receivers)
         << " msg=" << format_message(b.message) << '\n';
    }
    for (const auto& c : r.clashes) {
      os << "clash victim=" << c.victim.value << " kind=" << to_string(c.kind)
         << " participants=" << join_indices(c.participants) << " permitted=" << (c.permitted ? 1 : 0)
         << '\n';
    }
    for (const auto& s : r.snapshots) os << "snap " << format_snapshot(s) << '\n';
    for (const auto& c : r.claims) os << "claim p=" << c.value << '\n';
  }
  os << "status outcome=" << to_string(trace.status) << " rounds=" << trace.rounds.size() << '\n';
  return os.str();
}

RunTrace parse_trace(std::string_view text) {
  RunTrace t;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_status = false;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return true;
  };
  std::string_view line;
  if (!next_line(line) || line != kTraceMagic) {
    throw Error(ErrorKind::MalformedInput, "trace: missing '" + std::string(kTraceMagic) + "' header");
  }
  try {
    while (next_line(line)) {
      if (line.empty()) continue;
      auto sp = line.find(' ');
      auto tag = line.substr(0, sp);
      auto rest = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
      if (tag == "round") {
        RoundRecord r;
        r.round = to_int(rest);
        t.rounds.push_back(std::move(r));
        continue;
      }
      LineFields f(rest);
      if (tag == "meta") {
        t.header.protocol = f.at("protocol");
        t.header.n = static_cast<std::size_t>(to_int(f.at("n")));
        t.header.root = ProcessIndex{static_cast<std::uint32_t>(to_int(f.at("root")))};
        t.header.start_round = to_int(f.at("start"));
        // Preserve emission order of the remaining parameters.
        std::size_t p = 0;
        while (p < rest.size()) {
          auto e = rest.find(' ', p);
          if (e == std::string_view::npos) e = rest.size();
          auto tok = rest.substr(p, e - p);
          p = e + 1;
          auto eq = tok.find('=');
          auto key = std::string(tok.substr(0, eq));
          if (key == "protocol" || key == "n" || key == "root" || key == "start") continue;
          t.header.params.emplace_back(key, std::string(tok.substr(eq + 1)));
        }
      } else if (tag == "init") {
        t.initial.push_back(parse_snapshot(f));
      } else if (tag == "status") {
        t.status = parse_run_status(f.at("outcome"));
        saw_status = true;
        if (static_cast<std::size_t>(to_int(f.at("rounds"))) != t.rounds.size()) {
          throw Error(ErrorKind::MalformedInput, "trace: round count mismatch");
        }
      } else {
        if (t.rounds.empty()) {
          throw Error(ErrorKind::MalformedInput, "trace: '" + std::string(tag) + "' before any round");
        }
        auto& r = t.rounds.back();
        if (tag == "join") {
          r.joins.push_back({ProcessIndex{static_cast<std::uint32_t>(to_int(f.at("parent")))},
                             ProcessIndex{static_cast<std::uint32_t>(to_int(f.at("joiner")))},
                             to_int(f.at("id"))});
        } else if (tag == "ext") {
          r.externals.push_back({ProcessIndex{static_cast<std::uint32_t>(to_int(f.at("target")))},
                                 parse_message(f.msg)});
        } else if (tag == "bcast") {
          r.broadcasts.push_back({r.round,
                                  ProcessIndex{static_cast<std::uint32_t>(to_int(f.at("origin")))},
                                  parse_message(f.msg), to_indices(f.at("recv"))});
        } else if (tag == "clash") {
          const auto& kind = f.at("kind");
          if (kind != "collision" && kind != "conflict") {
            throw Error(ErrorKind::MalformedInput, "trace: bad clash kind");
          }
          r.clashes.push_back({r.round, ProcessIndex{static_cast<std::uint32_t>(to_int(f.at("victim")))},
                               kind == "collision" ? ClashKind::Collision : ClashKind::Conflict,
                               to_indices(f.at("participants")), f.at("permitted") == "1"});
        } else if (tag == "snap") {
          r.snapshots.push_back(parse_snapshot(f));
        } else if (tag == "claim") {
          r.claims.emplace_back(static_cast<std::uint32_t>(to_int(f.at("p"))));
        } else {
          throw Error(ErrorKind::MalformedInput, "trace: unknown record '" + std::string(tag) + "'");
        }
      }
    }
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedInput,
                "line " + std::to_string(line_no) + ": " + std::string(e.what()));
  }
  if (!saw_status) throw Error(ErrorKind::MalformedInput, "trace: missing status line");
  return t;
}

}  // namespace d2c
