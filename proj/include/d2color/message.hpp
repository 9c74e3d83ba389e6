#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "d2color/types.hpp"

namespace d2c {

/// External trigger that designates the root.
struct Start {
  bool operator==(const Start&) const = default;
};

/// Depth-first colouring token (sequential tree protocol).
struct ColorSeq {
  Identity dest = 0;
  Identity sender = 0;
  Color sender_cl = kNoColor;
  std::vector<Color> d1colors;
  bool operator==(const ColorSeq&) const = default;
};

struct TermSeq {
  Identity dest = 0;
  Identity id = 0;
  Color sender_cl = kNoColor;
  std::int64_t max_d = 0;
  bool operator==(const TermSeq&) const = default;
};

struct ColorPair {
  Identity id = 0;
  Color color = 0;
  bool operator==(const ColorPair&) const = default;
};

/// Parent-assigned colours for all children at once (parallel tree protocol).
struct ColorPar {
  std::vector<ColorPair> pairs;
  Identity sender = 0;
  Color sender_cl = kNoColor;
  std::int64_t nb_cl_parent = 0;
  bool operator==(const ColorPar&) const = default;
};

struct TermPar {
  Identity dest = 0;
  Identity id = 0;
  std::int64_t max_nb_cl = 0;
  bool operator==(const TermPar&) const = default;
};

/// Global-termination wave; `parent` is the sender's own identity.
struct End {
  Identity parent = 0;
  std::int64_t max_cl = 0;
  bool operator==(const End&) const = default;
};

/// Colour (and identity) offered to a process joining a coloured tree.
struct New {
  Color cl = 0;
  std::int64_t delta = 0;
  std::optional<Identity> new_id;
  bool operator==(const New&) const = default;
};

/// Arbitrary-graph protocol: colour token with a proposed colour.
struct ColorArb {
  Identity dest = 0;
  Identity sender = 0;
  Color sender_cl = kNoColor;
  Color proposed_color = 0;
  std::vector<Color> d1colors;
  bool operator==(const ColorArb&) const = default;
};

struct TermArb {
  Identity dest = 0;
  Identity id = 0;
  Color color = 0;
  bool operator==(const TermArb&) const = default;
};

struct Correct {
  Identity dest = 0;
  Identity sender = 0;
  Color color = 0;
  std::vector<Color> d1colors;
  bool operator==(const Correct&) const = default;
};

struct CorrectedColor {
  Identity dest1 = 0;
  Identity dest2 = 0;
  Identity sender = 0;
  Color color = 0;
  bool operator==(const CorrectedColor&) const = default;
};

struct ResumeColoring {
  Identity dest = 0;
  Identity sender = 0;
  bool operator==(const ResumeColoring&) const = default;
};

using ProtocolMessage = std::variant<Start, ColorSeq, TermSeq, ColorPar, TermPar, End, New,
                                     ColorArb, TermArb, Correct, CorrectedColor, ResumeColoring>;

enum class MessageKind {
  Start,
  ColorSeq,
  TermSeq,
  ColorPar,
  TermPar,
  End,
  New,
  ColorArb,
  TermArb,
  Correct,
  CorrectedColor,
  ResumeColoring,
};

inline constexpr std::size_t kMessageKindCount = 12;

MessageKind kind_of(const ProtocolMessage& msg);
std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view text);

/// Stable single-line rendering: `KIND key=value ...`. Colour sets are
/// rendered comma-separated in payload order, `-` when empty.
std::string format_message(const ProtocolMessage& msg);

/// Inverse of format_message. Throws Error{MalformedInput}.
ProtocolMessage parse_message(std::string_view text);

/// Payload size under the bit-accounting model: identities cost log2(n)
/// bits, colours log2(delta) bits; the fictitious colour -1 is not counted.
double accounted_bits(const ProtocolMessage& msg, std::size_t n, std::size_t delta);

}  // namespace d2c
