#include <cmath>
#include <string>

#include "doctest.h"
#include "ratelqg/model_io.hpp"
#include "test_helpers.hpp"

using namespace rlqg;
using rlqg::testing::demo_model;

namespace {

const char* kScalarText = R"(# scalar plant
A
2
B
1
W
1
Q
1
R
1
P0
1
)";

}  // namespace

TEST_CASE("fmt_double prints locale-free shortest decimals") {
  CHECK(fmt_double(2.0) == "2");
  CHECK(fmt_double(0.5) == "0.5");
  CHECK(fmt_double(-3.25) == "-3.25");
  CHECK(fmt_double(1.0 / 3.0) == "0.333333333333");
  for (double v : {1.1, -7.25e-9, 3.0e12, 0.1234567890123}) {
    const std::string s = fmt_double(v);
    CHECK(s.find(',') == std::string::npos);
    CHECK(std::abs(std::stod(s) - v) <= 1e-11 * std::abs(v));
  }
}

TEST_CASE("a model round trips through its text form") {
  const PlantModel m = demo_model();
  const PlantModel back = parse_model_text(format_model(m));
  CHECK((back.A - m.A).norm() <= 1e-10);
  CHECK((back.B - m.B).norm() <= 1e-10);
  CHECK((back.W - m.W).norm() <= 1e-10);
  CHECK((back.Q - m.Q).norm() <= 1e-10);
  CHECK((back.R - m.R).norm() <= 1e-10);
  CHECK((back.P_prior - m.P_prior).norm() <= 1e-10);
}

TEST_CASE("comments, blank lines, and inline comments are ignored") {
  const PlantModel m = parse_model_text(kScalarText);
  CHECK(m.A(0, 0) == 2.0);
  CHECK(m.n() == 1);

  const PlantModel inline_comments = parse_model_text(
      "A\n2 # unstable\n\nB\n1\nW\n1\nQ\n1\nR\n1\nP0\n1\n");
  CHECK(inline_comments.A(0, 0) == 2.0);
}

TEST_CASE("missing sections are named in the error") {
  const std::string text = "A\n1\nB\n1\nW\n1\nQ\n1\nP0\n1\n";
  try {
    parse_model_text(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("missing section R") !=
          std::string::npos);
  }
}

TEST_CASE("structural errors carry the offending line number") {
  try {
    parse_model_text("# c\nA\n1 0\n0 1 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
    CHECK(std::string(e.what()).find("3 entries") != std::string::npos);
  }

  try {
    parse_model_text("A\n1\nB\n1 x\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
    CHECK(std::string(e.what()).find("invalid number") != std::string::npos);
  }

  try {
    parse_model_text("A\n1\nZ\n1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }

  try {
    parse_model_text("1 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
  }

  try {
    parse_model_text("A\n1\nA\n1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("shape problems point at the section header") {
  try {
    parse_model_text("A\n1 0\nB\n1\nW\n1\nQ\n1\nR\n1\nP0\n1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("section A") != std::string::npos);
  }

  try {
    parse_model_text(
        "A\n1 0\n0 1\nB\n1\nW\n1 0\n0 1\nQ\n1 0\n0 1\nR\n1\nP0\n1 0\n0 1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("section B") != std::string::npos);
  }
}

TEST_CASE("unreadable paths are reported") {
  CHECK_THROWS_AS(parse_model("/nonexistent/model.txt"), ParseError);
}

TEST_CASE("a synthesized design round trips") {
  const PlantModel m = demo_model();
  const LoopSynthesis syn = synthesize(m, 2.0 * min_cost(m, solve_dare(m)));
  REQUIRE(syn.transmits);

  const DesignFile d = parse_design_text(format_design(syn));
  CHECK((d.C - syn.sensor.C).norm() <= 1e-10);
  CHECK((d.V_diag - syn.sensor.V_diag).norm() <= 1e-10);
  CHECK((d.Delta - syn.sensor.Delta).norm() <= 1e-10);
  CHECK((d.L - syn.kalman.L).norm() <= 1e-10);
  CHECK((d.K - syn.cert.K).norm() <= 1e-10);
}

TEST_CASE("designs that do not transmit cannot be written") {
  const PlantModel stable = rlqg::testing::scalar_model(0.5);
  const LoopSynthesis syn = synthesize(stable, 3.0);
  CHECK_THROWS_AS(format_design(syn), ZeroRank);
}
