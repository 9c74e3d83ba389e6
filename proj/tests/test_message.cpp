#include <doctest.h>

#include <cmath>

#include "d2color/errors.hpp"
#include "d2color/message.hpp"

using namespace d2c;

TEST_CASE("format and parse every message kind") {
  const std::vector<ProtocolMessage> all{
      Start{},
      ColorSeq{2, 1, 0, {-1}},
      TermSeq{1, 2, 1, 3},
      ColorPar{{{2, 0}, {3, 2}}, 1, 1, 4},
      ColorPar{{}, 1, 1, 1},
      TermPar{1, 2, 5},
      End{1, 5},
      New{2, 3, 7},
      New{2, 3, std::nullopt},
      ColorArb{2, 1, 0, 1, {-1}},
      TermArb{3, 4, 2},
      Correct{3, 4, 2, {0}},
      CorrectedColor{-1, -1, 2, 3},
      ResumeColoring{4, 3},
  };
  for (const auto& m : all) {
    CAPTURE(format_message(m));
    CHECK(parse_message(format_message(m)) == m);
  }
  CHECK(format_message(ColorPar{{{2, 0}, {3, 2}}, 1, 1, 4}) ==
        "COLOR_PAR pairs=2:0,3:2 sender=1 sender_cl=1 nb_cl_parent=4");
  CHECK(format_message(ColorSeq{2, 1, 0, {}}) == "COLOR_SEQ dest=2 sender=1 sender_cl=0 d1=-");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_message("BOGUS x=1"), Error);
  CHECK_THROWS_AS(parse_message("TERM_SEQ dest=1 id=2"), Error);
  CHECK_THROWS_AS(parse_message("TERM_PAR dest=1 id=x max_nb_cl=2"), Error);
}

TEST_CASE("COLOR_SEQ size stays within 2 log n + delta log delta") {
  const std::size_t n = 64;
  const std::size_t delta = 8;
  const double limit = 2 * std::log2(64.0) + 8 * std::log2(8.0);
  std::vector<Color> d1{-1};
  for (Color c = 0; c < 7; ++c) d1.push_back(c);
  CHECK(accounted_bits(ColorSeq{1, 2, 3, d1}, n, delta) <= limit);
}
