#include "d2color/message.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "d2color/errors.hpp"

namespace d2c {

namespace {

constexpr std::string_view kKindNames[kMessageKindCount] = {
    "START", "COLOR_SEQ", "TERM_SEQ",    "COLOR_PAR", "TERM_PAR",        "END",
    "NEW",   "COLOR_ARB", "TERM_ARB",    "CORRECT",   "CORRECTED_COLOR", "RESUME_COLORING",
};

std::string join_colors(const std::vector<Color>& colors) {
  if (colors.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < colors.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(colors[k]);
  }
  return out;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorKind::MalformedInput, "expected integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<Color> parse_colors(std::string_view text) {
  std::vector<Color> out;
  if (text == "-") return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    out.push_back(parse_int(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

class Fields {
 public:
  explicit Fields(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto space = text.find(' ', pos);
      if (space == std::string_view::npos) space = text.size();
      auto token = text.substr(pos, space - pos);
      pos = space + 1;
      if (token.empty()) continue;
      auto eq = token.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::MalformedInput, "expected key=value, got '" + std::string(token) + "'");
      }
      values_[std::string(token.substr(0, eq))] = std::string(token.substr(eq + 1));
    }
  }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::MalformedInput, "missing field '" + key + "'");
    return it->second;
  }
  std::int64_t integer(const std::string& key) const { return parse_int(raw(key)); }
  std::vector<Color> colors(const std::string& key) const { return parse_colors(raw(key)); }

 private:
  std::map<std::string, std::string> values_;
};

struct Formatter {
  std::string operator()(const Start&) const { return "START"; }
  std::string operator()(const ColorSeq& m) const {
    std::ostringstream os;
    os << "COLOR_SEQ dest=" << m.dest << " sender=" << m.sender << " sender_cl=" << m.sender_cl
       << " d1=" << join_colors(m.d1colors);
    return os.str();
  }
  std::string operator()(const TermSeq& m) const {
    std::ostringstream os;
    os << "TERM_SEQ dest=" << m.dest << " id=" << m.id << " sender_cl=" << m.sender_cl
       << " max_d=" << m.max_d;
    return os.str();
  }
  std::string operator()(const ColorPar& m) const {
    std::ostringstream os;
    os << "COLOR_PAR pairs=";
    if (m.pairs.empty()) os << '-';
    for (std::size_t k = 0; k < m.pairs.size(); ++k) {
      if (k) os << ',';
      os << m.pairs[k].id << ':' << m.pairs[k].color;
    }
    os << " sender=" << m.sender << " sender_cl=" << m.sender_cl
       << " nb_cl_parent=" << m.nb_cl_parent;
    return os.str();
  }
  std::string operator()(const TermPar& m) const {
    std::ostringstream os;
    os << "TERM_PAR dest=" << m.dest << " id=" << m.id << " max_nb_cl=" << m.max_nb_cl;
    return os.str();
  }
  std::string operator()(const End& m) const {
    std::ostringstream os;
    os << "END parent=" << m.parent << " max_cl=" << m.max_cl;
    return os.str();
  }
  std::string operator()(const New& m) const {
    std::ostringstream os;
    os << "NEW cl=" << m.cl << " delta=" << m.delta << " new_id=";
    if (m.new_id) os << *m.new_id; else os << '-';
    return os.str();
  }
  std::string operator()(const ColorArb& m) const {
    std::ostringstream os;
    os << "COLOR_ARB dest=" << m.dest << " sender=" << m.sender << " sender_cl=" << m.sender_cl
       << " proposed=" << m.proposed_color << " d1=" << join_colors(m.d1colors);
    return os.str();
  }
  std::string operator()(const TermArb& m) const {
    std::ostringstream os;
    os << "TERM_ARB dest=" << m.dest << " id=" << m.id << " color=" << m.color;
    return os.str();
  }
  std::string operator()(const Correct& m) const {
    std::ostringstream os;
    os << "CORRECT dest=" << m.dest << " sender=" << m.sender << " color=" << m.color
       << " d1=" << join_colors(m.d1colors);
    return os.str();
  }
  std::string operator()(const CorrectedColor& m) const {
    std::ostringstream os;
    os << "CORRECTED_COLOR dest1=" << m.dest1 << " dest2=" << m.dest2 << " sender=" << m.sender
       << " color=" << m.color;
    return os.str();
  }
  std::string operator()(const ResumeColoring& m) const {
    std::ostringstream os;
    os << "RESUME_COLORING dest=" << m.dest << " sender=" << m.sender;
    return os.str();
  }
};

}  // namespace

MessageKind kind_of(const ProtocolMessage& msg) { return static_cast<MessageKind>(msg.index()); }

std::string_view to_string(MessageKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<MessageKind> parse_message_kind(std::string_view text) {
  for (std::size_t k = 0; k < kMessageKindCount; ++k) {
    if (kKindNames[k] == text) return static_cast<MessageKind>(k);
  }
  return std::nullopt;
}

std::string format_message(const ProtocolMessage& msg) { return std::visit(Formatter{}, msg); }

ProtocolMessage parse_message(std::string_view text) {
  const auto space = text.find(' ');
  const auto head = text.substr(0, space);
  const auto kind = parse_message_kind(head);
  if (!kind) throw Error(ErrorKind::MalformedInput, "unknown message kind '" + std::string(head) + "'");
  const Fields f(space == std::string_view::npos ? std::string_view{} : text.substr(space + 1));
  switch (*kind) {
    case MessageKind::Start: return Start{};
    case MessageKind::ColorSeq:
      return ColorSeq{f.integer("dest"), f.integer("sender"), f.integer("sender_cl"), f.colors("d1")};
    case MessageKind::TermSeq:
      return TermSeq{f.integer("dest"), f.integer("id"), f.integer("sender_cl"), f.integer("max_d")};
    case MessageKind::ColorPar: {
      ColorPar m;
      const auto& pairs = f.raw("pairs");
      if (pairs != "-") {
        std::size_t pos = 0;
        while (pos <= pairs.size()) {
          auto comma = pairs.find(',', pos);
          if (comma == std::string::npos) comma = pairs.size();
          std::string_view item(pairs.data() + pos, comma - pos);
          auto colon = item.find(':');
          if (colon == std::string_view::npos) {
            throw Error(ErrorKind::MalformedInput, "pair without ':' in COLOR_PAR");
          }
          m.pairs.push_back({parse_int(item.substr(0, colon)), parse_int(item.substr(colon + 1))});
          pos = comma + 1;
        }
      }
      m.sender = f.integer("sender");
      m.sender_cl = f.integer("sender_cl");
      m.nb_cl_parent = f.integer("nb_cl_parent");
      return m;
    }
    case MessageKind::TermPar:
      return TermPar{f.integer("dest"), f.integer("id"), f.integer("max_nb_cl")};
    case MessageKind::End: return End{f.integer("parent"), f.integer("max_cl")};
    case MessageKind::New: {
      New m{f.integer("cl"), f.integer("delta"), std::nullopt};
      if (f.raw("new_id") != "-") m.new_id = f.integer("new_id");
      return m;
    }
    case MessageKind::ColorArb:
      return ColorArb{f.integer("dest"), f.integer("sender"), f.integer("sender_cl"),
                      f.integer("proposed"), f.colors("d1")};
    case MessageKind::TermArb: return TermArb{f.integer("dest"), f.integer("id"), f.integer("color")};
    case MessageKind::Correct:
      return Correct{f.integer("dest"), f.integer("sender"), f.integer("color"), f.colors("d1")};
    case MessageKind::CorrectedColor:
      return CorrectedColor{f.integer("dest1"), f.integer("dest2"), f.integer("sender"),
                            f.integer("color")};
    case MessageKind::ResumeColoring:
      return ResumeColoring{f.integer("dest"), f.integer("sender")};
  }
  throw Error(ErrorKind::MalformedInput, "unhandled message kind");
}

double accounted_bits(const ProtocolMessage& msg, std::size_t n, std::size_t delta) {
  const double id_bits = n > 1 ? std::log2(static_cast<double>(n)) : 0.0;
  const double color_bits = delta > 1 ? std::log2(static_cast<double>(delta)) : 0.0;
  auto real_colors = [](const std::vector<Color>& set) {
    std::size_t k = 0;
    for (Color c : set) k += c != kNoColor;
    return static_cast<double>(k);
  };
  switch (kind_of(msg)) {
    case MessageKind::ColorSeq: {
      const auto& m = std::get<ColorSeq>(msg);
      return 2 * id_bits + (1 + real_colors(m.d1colors)) * color_bits;
    }
    case MessageKind::TermSeq: return 2 * id_bits + color_bits;
    case MessageKind::ColorPar: {
      const auto& m = std::get<ColorPar>(msg);
      return static_cast<double>(m.pairs.size()) * (id_bits + color_bits) + id_bits + 2 * color_bits;
    }
    default: return 0.0;
  }
}

}  // namespace d2c
