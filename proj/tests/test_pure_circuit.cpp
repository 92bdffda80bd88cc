#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdsnet/pure_circuit.hpp"

#include <cmath>
#include <random>

using namespace cdsnet;

TEST_CASE("decoding thresholds") {
  const DecodingParams params = DecodingParams::defaults();
  CHECK(params.gamma == doctest::Approx(0.5505102572168219).epsilon(1e-12));
  CHECK(params.delta == doctest::Approx(0.1010205144336438).epsilon(1e-12));

  SUBCASE("interval endpoints") {
    CHECK(dec(0.0) == TriValue::Zero);
    CHECK(dec(1.0) == TriValue::One);
    CHECK(dec(params.gamma) == TriValue::Zero);
    CHECK(dec(1.0 - params.delta) == TriValue::One);
    CHECK(dec(0.5) == TriValue::Zero);
    CHECK(dec(0.7) == TriValue::Bot);
    CHECK(dec(0.95) == TriValue::One);
  }

  SUBCASE("monotone in the order zero < bot < one") {
    auto rank = [](TriValue v) {
      return v == TriValue::Zero ? 0 : (v == TriValue::Bot ? 1 : 2);
    };
    int prev = 0;
    for (int i = 0; i <= 1000; ++i) {
      const int cur = rank(dec(i / 1000.0));
      CHECK(cur >= prev);
      prev = cur;
    }
  }

  SUBCASE("threshold identity tying delta to gamma") {
    const Scalar g = params.gamma;
    CHECK(std::abs(g * (1.0 - g) / (3.0 - g) - params.delta) <= 1e-12);
    CHECK(params.gamma + params.delta < 1.0);
    CHECK(params.gamma + params.delta == doctest::Approx(0.652).epsilon(1e-3));
  }

  SUBCASE("invalid thresholds rejected") {
    CHECK_THROWS_AS(dec(0.5, DecodingParams{0.6, 0.5}), ValidationError);
  }
}

TEST_CASE("nand gate over three values") {
  const TriValue O = TriValue::Zero, I = TriValue::One, B = TriValue::Bot;
  CHECK(check_nand(I, I, O));
  CHECK_FALSE(check_nand(I, I, B));
  CHECK_FALSE(check_nand(I, I, I));
  CHECK(check_nand(O, B, I));
  CHECK_FALSE(check_nand(O, B, B));
  CHECK_FALSE(check_nand(O, O, O));
  CHECK(check_nand(B, B, O));
  CHECK(check_nand(B, B, I));
  CHECK(check_nand(B, B, B));
  CHECK(check_nand(I, B, B));  // no antecedent fires
}

TEST_CASE("purify gate over three values") {
  const TriValue O = TriValue::Zero, I = TriValue::One, B = TriValue::Bot;
  CHECK(check_purify(O, O, O));
  CHECK(check_purify(I, I, I));
  CHECK_FALSE(check_purify(I, I, B));
  CHECK_FALSE(check_purify(O, I, O));
  CHECK(check_purify(B, B, I));
  CHECK(check_purify(B, O, B));
  CHECK_FALSE(check_purify(B, B, B));
}

namespace {

PureCircuit nand_selfloop() {
  PureCircuit c;
  c.add_wire("w");
  c.add_nand("w", "w", "w");
  return c;
}

}  // namespace

TEST_CASE("assignments are checked gate by gate") {
  const PureCircuit c = nand_selfloop();
  CHECK(is_solution(c, {{"w", TriValue::Bot}}));
  CHECK_FALSE(is_solution(c, {{"w", TriValue::One}}));
  CHECK_FALSE(is_solution(c, {{"w", TriValue::Zero}}));

  const PureCircuit empty;
  CHECK(is_solution(empty, {}));

  CHECK_THROWS_AS(is_solution(c, {}), ValidationError);
}

TEST_CASE("exhaustive solving") {
  SUBCASE("self-loop has the unique garbage solution") {
    const Assignment a = brute_solve(nand_selfloop());
    CHECK(a.at("w") == TriValue::Bot);
  }

  SUBCASE("first satisfying assignment is deterministic") {
    PureCircuit c;
    c.add_wire("a");
    c.add_wire("w");
    c.add_nand("a", "a", "w");
    const Assignment got = brute_solve(c);
    // a = 0 forces w = 1; this is the first assignment in enumeration order
    CHECK(got.at("a") == TriValue::Zero);
    CHECK(got.at("w") == TriValue::One);
  }

  SUBCASE("purify with a free input") {
    PureCircuit c;
    c.add_wire("u");
    c.add_wire("v");
    c.add_wire("w");
    c.add_purify("u", "v", "w");
    const Assignment got = brute_solve(c);
    CHECK(got.at("u") == TriValue::Zero);
    CHECK(got.at("v") == TriValue::Zero);
    CHECK(got.at("w") == TriValue::Zero);
    CHECK(is_solution(c, got));
  }

  SUBCASE("solutions always verify on random circuits") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
      PureCircuit c;
      std::vector<std::string> names;
      const int wires = 3 + static_cast<int>(rng() % 5);
      for (int i = 0; i < wires; ++i) {
        names.push_back("w" + std::to_string(i));
        c.add_wire(names.back());
      }
      int next_output = wires - 1;
      while (next_output >= 1) {
        if (coin(rng) == 0 && next_output >= 2) {
          c.add_purify(names[rng() % wires], names[static_cast<size_t>(next_output)],
                       names[static_cast<size_t>(next_output - 1)]);
          next_output -= 2;
        } else {
          c.add_nand(names[rng() % wires], names[rng() % wires],
                     names[static_cast<size_t>(next_output)]);
          next_output -= 1;
        }
      }
      CHECK(is_solution(c, brute_solve(c)));
    }
  }

  SUBCASE("cap is enforced") {
    PureCircuit big;
    for (int i = 0; i < 14; ++i) big.add_wire("w" + std::to_string(i));
    CHECK_THROWS_AS(brute_solve(big), CapExceededError);
  }
}

TEST_CASE("circuit structure is validated") {
  PureCircuit c;
  c.add_wire("a");
  c.add_wire("b");
  c.add_nand("a", "a", "b");
  CHECK_THROWS_AS(c.add_nand("a", "a", "b"), ValidationError);  // b already produced
  CHECK_THROWS_AS(c.add_nand("a", "q", "a"), ValidationError);  // unknown wire
  CHECK_THROWS_AS(c.add_wire("a"), ValidationError);
  CHECK(c.free_wires() == std::vector<std::string>{"a"});
}
