#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdsnet/network.hpp"
#include "cdsnet/gadgets.hpp"
#include "test_support.hpp"

#include <random>

using namespace cdsnet;

TEST_CASE("truncation clamps to the unit interval") {
  CHECK(truncate01(1.7) == 1.0);
  CHECK(truncate01(-0.3) == 0.0);
  CHECK(truncate01(0.42) == 0.42);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<Scalar> wide(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Scalar x = wide(rng);
    const Scalar y = wide(rng);
    const Scalar tx = truncate01(x);
    CHECK(truncate01(tx) == tx);  // idempotent
    if (x <= y) CHECK(truncate01(x) <= truncate01(y));
  }
}

TEST_CASE("snapshot evaluates liabilities, payments and assets") {
  SUBCASE("single debt paid in full") {
    FinancialNetwork net({"A", "B"}, (Vector(2) << 0.5, 0.0).finished(),
                         {{0, 1, 1.0}}, {});
    Vector r(2);
    r << 1.0, 1.0;
    const LiabilitySnapshot snap = snapshot(net, r);
    CHECK(snap.total_liability[0] == doctest::Approx(1.0));
    CHECK(snap.assets[1] == doctest::Approx(1.0));
    CHECK(snap.assets[0] == doctest::Approx(0.5));
  }
  SUBCASE("cds liability scales with the reference shortfall") {
    FinancialNetwork net({"i", "j", "k"}, Vector::Zero(3), {{2, 0, 1.0}},
                         {{0, 1, 2, 2.0}});
    Vector r(3);
    r << 1.0, 1.0, 0.25;
    const LiabilitySnapshot snap = snapshot(net, r);
    CHECK(snap.liabilities(0, 1) == doctest::Approx(1.5));
  }
  SUBCASE("default costs apply to external assets but not beta=1 payments") {
    FinancialNetwork net({"i", "p"}, (Vector(2) << 1.0, 0.8).finished(),
                         {{1, 0, 0.8}}, {}, 0.5, 1.0);
    Vector r(2);
    r << 1.0, 1.0;
    const LiabilitySnapshot snap = snapshot(net, r);
    CHECK(snap.assets_after_costs[0] == doctest::Approx(1.3));
  }
}

TEST_CASE("snapshot totals are row sums and default costs only shrink assets") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const FinancialNetwork net = testing::random_nondegenerate_network(rng);
    const Vector r = testing::random_recovery_vector(rng, net.size());
    const LiabilitySnapshot snap = snapshot(net, r);
    for (Index i = 0; i < net.size(); ++i) {
      CHECK(snap.total_liability[i] ==
            doctest::Approx(snap.liabilities.row(i).sum()).epsilon(1e-12));
      CHECK(snap.assets_after_costs[i] <= snap.assets[i] + 1e-12);
    }
  }
}

TEST_CASE("liabilities decrease weakly when any recovery rate rises") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const FinancialNetwork net = testing::random_nondegenerate_network(rng);
    Vector r = testing::random_recovery_vector(rng, net.size());
    const LiabilitySnapshot before = snapshot(net, r);
    std::uniform_int_distribution<Index> pick(0, net.size() - 1);
    const Index k = pick(rng);
    r[k] = std::min(1.0, r[k] + 0.3);
    const LiabilitySnapshot after = snapshot(net, r);
    for (Index i = 0; i < net.size(); ++i) {
      for (Index j = 0; j < net.size(); ++j) {
        CHECK(after.liabilities(i, j) <= before.liabilities(i, j) + 1e-12);
      }
    }
  }
}

TEST_CASE("update rule on the cyclic fixture without a clearing vector") {
  const FinancialNetwork net = testing::degenerate_cycle_network();
  Vector r = Vector::Ones(5);
  const Vector next = update_F(net, r);
  CHECK(next[0] == doctest::Approx(0.0));
  CHECK(next[1] == doctest::Approx(1.0));
  CHECK(next[2] == doctest::Approx(1.0));
  CHECK(next[3] == 1.0);
  CHECK(next[4] == 1.0);
}

TEST_CASE("clearing vectors are fixed points of the update rule") {
  NetworkFragment frag;
  auto [u, x] = frag.input_pair();
  const FinancialNetwork net = frag.finalize();
  Vector r(net.size());
  r << 0.37, 0.37, 1.0, 1.0;
  CHECK(is_clearing(net, r, 1e-9));
  const Vector fixed = update_F(net, r);
  CHECK((fixed - r).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));

  Vector asym(net.size());
  asym << 0.2, 0.9, 1.0, 1.0;
  CHECK_FALSE(is_clearing(net, asym, 1e-9));
  const Vector swapped = update_F(net, asym);
  CHECK(swapped[net.index_of(u)] == doctest::Approx(0.9));
  CHECK(swapped[net.index_of(x)] == doctest::Approx(0.2));
}

TEST_CASE("partially recovered reference halves the insured bank") {
  NetworkFragment frag(0.5, 1.0);
  const std::string u = frag.input("u");
  const std::string v = frag.discontinuity(u);
  frag.drive(u, 0.2);
  const FinancialNetwork net = frag.finalize();
  Vector r = Vector::Ones(net.size());
  r[net.index_of(u)] = 0.2;
  const Vector next = update_F(net, r);
  CHECK(next[net.index_of(v)] == doctest::Approx(0.65));
}

TEST_CASE("continuous map agrees with the update rule without default costs") {
  SUBCASE("branch values") {
    FinancialNetwork net({"a", "b"}, (Vector(2) << 2.0, 0.3).finished(),
                         {{0, 1, 1.0}, {1, 0, 1.0}}, {});
    Vector r(2);
    r << 1.0, 1.0;
    const Vector f = map_f(net, r);
    CHECK(f[0] == doctest::Approx(1.0));  // assets 2 + 1 over liability 1
    const LiabilitySnapshot snap = snapshot(net, r);
    CHECK(snap.assets[1] == doctest::Approx(1.3));
  }
  SUBCASE("ratio branch") {
    FinancialNetwork net({"a", "t"}, (Vector(2) << 0.3, 1.0).finished(), {{0, 1, 1.0}}, {});
    Vector r = Vector::Ones(2);
    const Vector f = map_f(net, r);
    CHECK(f[0] == doctest::Approx(0.3));
  }
  SUBCASE("identity with update_F on random networks") {
    std::mt19937_64 rng(17);
    int checked = 0;
    while (checked < 25) {
      const FinancialNetwork net = testing::random_nondegenerate_network(rng);
      const Vector r = testing::random_recovery_vector(rng, net.size());
      const LiabilitySnapshot snap = snapshot(net, r);
      bool all_liable = true;
      for (Index i = 0; i < net.size(); ++i) {
        if (snap.total_liability[i] == 0.0) all_liable = false;
      }
      if (!all_liable) continue;
      ++checked;
      const Vector f = map_f(net, r);
      const Vector F = update_F(net, r);
      CHECK((f - F).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
  SUBCASE("degenerate point is rejected") {
    FinancialNetwork net({"lone"}, Vector::Zero(1), {}, {});
    CHECK_THROWS_AS(map_f(net, Vector::Zero(1)), DegenerateNetworkError);
  }
}

TEST_CASE("non-degeneracy requires assets or a written debt") {
  CHECK_FALSE(is_nondegenerate(testing::degenerate_cycle_network()));

  NetworkFragment frag;
  frag.input_pair();
  CHECK(is_nondegenerate(frag.finalize()));

  FinancialNetwork lone({"only"}, Vector::Ones(1), {}, {});
  CHECK(is_nondegenerate(lone));
}

TEST_CASE("cyclic fixture admits no clearing vector on a grid") {
  const FinancialNetwork net = testing::degenerate_cycle_network();
  for (int a = 0; a <= 6; ++a) {
    for (int b = 0; b <= 6; ++b) {
      for (int c = 0; c <= 6; ++c) {
        Vector r(5);
        r << a / 6.0, b / 6.0, c / 6.0, 1.0, 1.0;
        CHECK_FALSE(is_clearing(net, r, 1e-9));
      }
    }
  }
}

TEST_CASE("approximate clearing definition") {
  SUBCASE("exact clearing vectors qualify at every eps") {
    NetworkFragment frag;
    frag.input_pair();
    const FinancialNetwork net = frag.finalize();
    Vector r(net.size());
    r << 0.37, 0.37, 1.0, 1.0;
    for (const Scalar eps : {1e-6, 0.01, 0.1, 0.4}) {
      CHECK(is_eps_approx_clearing(net, r, eps));
    }
  }
  SUBCASE("clearly solvent banks must have recovery one") {
    FinancialNetwork net({"rich", "t"}, (Vector(2) << 3.0, 1.0).finished(),
                         {{0, 1, 1.0}}, {});
    Vector r(2);
    r << 0.95, 1.0;
    CHECK_FALSE(is_eps_approx_clearing(net, r, 0.1));
    r[0] = 1.0;
    CHECK(is_eps_approx_clearing(net, r, 0.1));
  }
  SUBCASE("rejects default costs and degenerate networks") {
    FinancialNetwork costly({"a", "b"}, Vector::Ones(2), {{0, 1, 1.0}}, {}, 0.5, 1.0);
    CHECK_THROWS_AS(is_eps_approx_clearing(costly, Vector::Ones(2), 0.1), DefaultCostsError);
    CHECK_THROWS_AS(is_eps_approx_clearing(testing::degenerate_cycle_network(),
                                           Vector::Ones(5), 0.1),
                    DegenerateNetworkError);
  }
}

TEST_CASE("exact clearing implies approximate clearing on clean networks") {
  NetworkFragment frag;
  const std::string u = frag.input("u");
  frag.sum(u, frag.constant(0.25));
  frag.drive(u, 0.4);
  const FinancialNetwork net = frag.finalize();
  // iterate to the fixed point by brute repetition
  Vector r = Vector::Ones(net.size());
  for (int i = 0; i < 200; ++i) r = update_F(net, r);
  REQUIRE(is_clearing(net, r, 1e-9));
  for (const Scalar eps : {0.01, 0.1, 0.3}) {
    CHECK(is_eps_approx_clearing(net, r, eps));
  }
}

TEST_CASE("validation rejects malformed networks") {
  CHECK_THROWS_AS(FinancialNetwork({"a", "a"}, Vector::Zero(2), {}, {}), ValidationError);
  CHECK_THROWS_AS(FinancialNetwork({"a"}, Vector::Zero(1), {{0, 0, 1.0}}, {}), ValidationError);
  CHECK_THROWS_AS(FinancialNetwork({"a", "b"}, Vector::Zero(2), {}, {{0, 0, 1, 1.0}}),
                  ValidationError);
  CHECK_THROWS_AS(FinancialNetwork({"a", "b"}, Vector::Zero(2), {}, {{0, 1, 0, 1.0}}),
                  ValidationError);
  CHECK_THROWS_AS(FinancialNetwork({"a"}, (Vector(1) << -1.0).finished(), {}, {}),
                  ValidationError);
  CHECK_THROWS_AS(FinancialNetwork({"a"}, Vector::Zero(1), {}, {}, 1.5, 1.0), ValidationError);
  // a holder may reference itself; gate self-loops compile to this shape
  CHECK_NOTHROW(FinancialNetwork({"a", "b"}, Vector::Ones(2), {}, {{0, 1, 1, 1.0}}));
}
