#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdsnet/gadgets.hpp"
#include "cdsnet/solver.hpp"
#include "test_support.hpp"

#include <cmath>
#include <functional>

using namespace cdsnet;

namespace {

using UnaryBuilder = std::function<std::string(NetworkFragment&, const std::string&)>;
using BinaryBuilder =
    std::function<std::string(NetworkFragment&, const std::string&, const std::string&)>;

Scalar eval_unary(const UnaryBuilder& build, Scalar x, Scalar alpha = 1.0) {
  NetworkFragment frag(alpha, 1.0);
  const std::string u = frag.input("u");
  const std::string out = build(frag, u);
  frag.drive(u, x);
  const FinancialNetwork net = frag.finalize();
  const Vector r = forward_eval(net, {});
  return r[net.index_of(out)];
}

Scalar eval_binary(const BinaryBuilder& build, Scalar x, Scalar y, Scalar alpha = 1.0) {
  NetworkFragment frag(alpha, 1.0);
  const std::string u = frag.input("u");
  const std::string v = frag.input("v");
  const std::string out = build(frag, u, v);
  frag.drive(u, x);
  frag.drive(v, y);
  const FinancialNetwork net = frag.finalize();
  const Vector r = forward_eval(net, {});
  return r[net.index_of(out)];
}

constexpr int kGridPoints = 21;

Scalar grid(int i) { return static_cast<Scalar>(i) / (kGridPoints - 1); }

Scalar cutoff_formula(Scalar k, Scalar l, Scalar u) {
  const Scalar a = truncate01((1.0 - u) / (1.0 - k));
  return truncate01((1.0 - k) / (l - k) * (1.0 - a));
}

}  // namespace

TEST_CASE("inverter matches its transfer characteristic") {
  for (const Scalar weight : {0.5, 1.0, 2.0, 3.0}) {
    UnaryBuilder build = [&](NetworkFragment& f, const std::string& u) {
      return f.inverter(u, weight);
    };
    for (int i = 0; i < kGridPoints; ++i) {
      const Scalar u = grid(i);
      CHECK(eval_unary(build, u) ==
            doctest::Approx(std::min(1.0, weight * (1.0 - u))).epsilon(1e-9));
    }
  }
  UnaryBuilder weight2 = [](NetworkFragment& f, const std::string& u) {
    return f.inverter(u, 2.0);
  };
  CHECK(eval_unary(weight2, 0.75) == doctest::Approx(0.5));
  UnaryBuilder weight3 = [](NetworkFragment& f, const std::string& u) {
    return f.inverter(u, 3.0);
  };
  CHECK(eval_unary(weight3, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("constant output is pinned for any alpha") {
  for (const Scalar alpha : {0.0, 0.2, 0.3, 0.7, 1.0}) {
    for (int i = 0; i < kGridPoints; ++i) {
      const Scalar zeta = grid(i);
      NetworkFragment frag(alpha, 1.0);
      const std::string v = frag.constant(zeta);
      const FinancialNetwork net = frag.finalize();
      const Vector r = forward_eval(net, {});
      CHECK(r[net.index_of(v)] == doctest::Approx(zeta).epsilon(1e-12));
    }
  }
}

TEST_CASE("sum gadget truncates at one") {
  BinaryBuilder build = [](NetworkFragment& f, const std::string& u, const std::string& v) {
    return f.sum(u, v);
  };
  CHECK(eval_binary(build, 0.3, 0.5) == doctest::Approx(0.8));
  CHECK(eval_binary(build, 0.8, 0.7) == doctest::Approx(1.0));
  CHECK(eval_binary(build, 0.0, 0.0) == doctest::Approx(0.0));
  for (int i = 0; i < kGridPoints; ++i) {
    for (int j = 0; j < kGridPoints; ++j) {
      CHECK(eval_binary(build, grid(i), grid(j)) ==
            doctest::Approx(truncate01(grid(i) + grid(j))).epsilon(1e-9));
    }
  }
}

TEST_CASE("difference gadget computes the truncated second-minus-first") {
  BinaryBuilder build = [](NetworkFragment& f, const std::string& u, const std::string& v) {
    return f.difference(u, v);
  };
  CHECK(eval_binary(build, 0.2, 0.9) == doctest::Approx(0.7));
  CHECK(eval_binary(build, 0.9, 0.2) == doctest::Approx(0.0));
  CHECK(eval_binary(build, 0.4, 0.4) == doctest::Approx(0.0));
  for (int i = 0; i < kGridPoints; ++i) {
    for (int j = 0; j < kGridPoints; ++j) {
      CHECK(eval_binary(build, grid(i), grid(j)) ==
            doctest::Approx(truncate01(grid(j) - grid(i))).epsilon(1e-9));
    }
  }
}

TEST_CASE("half product and proper product") {
  BinaryBuilder half = [](NetworkFragment& f, const std::string& u, const std::string& v) {
    return f.half_product(u, v);
  };
  BinaryBuilder full = [](NetworkFragment& f, const std::string& u, const std::string& v) {
    return f.product(u, v);
  };
  CHECK(eval_binary(half, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(eval_binary(half, 0.5, 0.5) == doctest::Approx(0.125));
  CHECK(eval_binary(half, 0.0, 0.9) == doctest::Approx(0.0));
  CHECK(eval_binary(full, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(eval_binary(full, 0.5, 0.5) == doctest::Approx(0.25));
  CHECK(eval_binary(full, 0.9, 0.0) == doctest::Approx(0.0));
  for (int i = 0; i < kGridPoints; ++i) {
    for (int j = 0; j < kGridPoints; ++j) {
      CHECK(eval_binary(half, grid(i), grid(j)) ==
            doctest::Approx(grid(i) * grid(j) / 2.0).epsilon(1e-9));
      CHECK(eval_binary(full, grid(i), grid(j)) ==
            doctest::Approx(grid(i) * grid(j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("arithmetic gadget outputs do not depend on alpha") {
  BinaryBuilder gadgets[] = {
      [](NetworkFragment& f, const std::string& u, const std::string& v) { return f.sum(u, v); },
      [](NetworkFragment& f, const std::string& u, const std::string& v) {
        return f.difference(u, v);
      },
      [](NetworkFragment& f, const std::string& u, const std::string& v) {
        return f.product(u, v);
      },
  };
  for (const auto& build : gadgets) {
    for (int i = 0; i < kGridPoints; i += 4) {
      for (int j = 0; j < kGridPoints; j += 4) {
        const Scalar reference = eval_binary(build, grid(i), grid(j), 1.0);
        for (const Scalar alpha : {0.0, 0.3, 0.7}) {
          CHECK(eval_binary(build, grid(i), grid(j), alpha) == reference);
        }
      }
    }
  }
}

TEST_CASE("input pair models a free variable") {
  NetworkFragment frag;
  auto [u, x] = frag.input_pair();
  const FinancialNetwork net = frag.finalize();
  for (int i = 0; i < kGridPoints; ++i) {
    Vector r(net.size());
    r << grid(i), grid(i), 1.0, 1.0;
    CHECK(is_clearing(net, r, 1e-12));
  }
  Vector bad(net.size());
  bad << 0.2, 0.9, 1.0, 1.0;
  CHECK_FALSE(is_clearing(net, bad, 1e-9));
  (void)u;
  (void)x;
}

TEST_CASE("cutoff gadget saturates outside its window") {
  UnaryBuilder build = [](NetworkFragment& f, const std::string& u) {
    return f.cutoff(u, 0.25, 0.75);
  };
  CHECK(eval_unary(build, 0.2) == doctest::Approx(0.0));
  CHECK(eval_unary(build, 0.8) == doctest::Approx(1.0));
  CHECK(eval_unary(build, 0.5) == doctest::Approx(0.5));
  for (int i = 0; i < kGridPoints; ++i) {
    const Scalar u = grid(i);
    CHECK(eval_unary(build, u) == doctest::Approx(cutoff_formula(0.25, 0.75, u)).epsilon(1e-9));
    if (u <= 0.25) CHECK(eval_unary(build, u) == doctest::Approx(0.0));
    if (u >= 0.75) CHECK(eval_unary(build, u) == doctest::Approx(1.0));
  }
  NetworkFragment frag;
  CHECK_THROWS_AS(frag.cutoff(frag.input("u"), 0.75, 0.25), ValidationError);
}

TEST_CASE("or gadget on pure and mixed inputs") {
  BinaryBuilder build = [](NetworkFragment& f, const std::string& u, const std::string& v) {
    return f.or_gate(u, v);
  };
  CHECK(eval_binary(build, 0.1, 0.1) == doctest::Approx(0.0));
  CHECK(eval_binary(build, 0.9, 0.1) == doctest::Approx(1.0));
  CHECK(eval_binary(build, 0.1, 0.9) == doctest::Approx(1.0));
  CHECK(eval_binary(build, 1.0, 1.0) == doctest::Approx(1.0));
  for (int i = 0; i < kGridPoints; ++i) {
    for (int j = 0; j < kGridPoints; ++j) {
      const Scalar expected = truncate01(cutoff_formula(0.25, 0.75, grid(i)) +
                                         cutoff_formula(0.25, 0.75, grid(j)));
      CHECK(eval_binary(build, grid(i), grid(j)) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("discontinuity gadget jumps at zero") {
  for (const Scalar alpha : {0.0, 0.3, 0.5, 0.7}) {
    UnaryBuilder build = [](NetworkFragment& f, const std::string& u) {
      return f.discontinuity(u);
    };
    CHECK(eval_unary(build, 0.0, alpha) == doctest::Approx(1.0));
    for (int i = 1; i < kGridPoints; ++i) {
      const Scalar u = grid(i);
      CHECK(eval_unary(build, u, alpha) ==
            doctest::Approx((alpha + 1.0 - u) / 2.0).epsilon(1e-9));
    }
  }
  UnaryBuilder build = [](NetworkFragment& f, const std::string& u) {
    return f.discontinuity(u);
  };
  CHECK(eval_unary(build, 0.2, 0.5) == doctest::Approx(0.65));
  CHECK(eval_unary(build, 1.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("nand gadget exact clearing values") {
  const ReductionConstants k = ReductionConstants::defaults();
  BinaryBuilder build = [&](NetworkFragment& f, const std::string& u, const std::string& v) {
    return f.nand_gate(u, v, k);
  };
  CHECK(eval_binary(build, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(eval_binary(build, 0.0, 1.0) == doctest::Approx(1.0));
  const Scalar low = 1.0 - k.delta;
  CHECK(eval_binary(build, low, low) ==
        doctest::Approx(2.0 * k.delta * k.c1()).epsilon(1e-12));
  CHECK(2.0 * k.delta * k.c1() == doctest::Approx(std::sqrt(6.0) - 2.0).epsilon(1e-12));
  for (int i = 0; i < kGridPoints; ++i) {
    for (int j = 0; j < kGridPoints; ++j) {
      const Scalar expected =
          truncate01((1.0 - grid(i)) * k.c1() + (1.0 - grid(j)) * k.c2());
      CHECK(eval_binary(build, grid(i), grid(j)) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("purify gadget exact clearing values") {
  const ReductionConstants k = ReductionConstants::defaults();
  auto eval_purify = [&](Scalar x) {
    NetworkFragment frag;
    const std::string u = frag.input("u");
    const auto outs = frag.purify_gate(u, k);
    frag.drive(u, x);
    const FinancialNetwork net = frag.finalize();
    const Vector r = forward_eval(net, {});
    return std::pair<Scalar, Scalar>{r[net.index_of(outs.v)], r[net.index_of(outs.w)]};
  };
  auto formula = [&](Scalar u) {
    const Scalar a = truncate01((1.0 - u) / (1.0 - k.phi));
    const Scalar v = truncate01((1.0 - a) / (1.0 - k.gamma));
    const Scalar b = truncate01((1.0 - u) / (1.0 - k.gamma));
    const Scalar w = truncate01((1.0 - b) / (1.0 - k.eta()));
    return std::pair<Scalar, Scalar>{v, w};
  };

  const auto at_one = eval_purify(1.0);
  CHECK(at_one.first == doctest::Approx(1.0));
  CHECK(at_one.second == doctest::Approx(1.0));
  const auto at_zero = eval_purify(0.0);
  CHECK(at_zero.first == doctest::Approx(0.0));
  CHECK(at_zero.second == doctest::Approx(0.0));
  const auto at_07 = eval_purify(0.7);
  CHECK(at_07.second == doctest::Approx(1.0));

  for (int i = 0; i < kGridPoints; ++i) {
    const auto got = eval_purify(grid(i));
    const auto want = formula(grid(i));
    CHECK(got.first == doctest::Approx(want.first).epsilon(1e-9));
    CHECK(got.second == doctest::Approx(want.second).epsilon(1e-9));
  }
}

TEST_CASE("finalized fragments satisfy the scaffolding conventions") {
  NetworkFragment frag;
  const std::string u = frag.input("u");
  const std::string v = frag.input("v");
  frag.sum(u, v);
  frag.drive(u, 0.5);
  frag.drive(v, 0.25);
  const FinancialNetwork net = frag.finalize();

  CHECK(is_nondegenerate(net));
  const Index source = net.index_of("s");
  const Index sink = net.index_of("t");
  CHECK(net.external_assets()[sink] == 1.0);
  CHECK(net.external_assets()[source] == doctest::Approx(2.0 * net.written_notionals()[source]));
  bool source_owes_sink = false;
  for (const DebtContract& d : net.debts()) {
    if (d.writer == source && d.holder == sink && d.notional == 1.0) source_owes_sink = true;
  }
  CHECK(source_owes_sink);
  // gadget banks carry no endowment
  for (Index i = 0; i < net.size(); ++i) {
    if (i != source && i != sink) CHECK(net.external_assets()[i] == 0.0);
  }
  // the source can never default
  Vector worst = Vector::Zero(net.size());
  const LiabilitySnapshot snap = snapshot(net, worst);
  CHECK(net.external_assets()[source] >= 2.0 * snap.total_liability[source]);
}

TEST_CASE("driving pins an input and rejects misuse") {
  NetworkFragment frag;
  const ReductionConstants k = ReductionConstants::defaults();
  const std::string u = frag.input("u");
  const std::string v = frag.input("v");
  const std::string w = frag.nand_gate(u, v, k);
  frag.drive(u, 1.0);
  frag.drive(v, 1.0);
  const FinancialNetwork net = frag.finalize();
  const Vector r = forward_eval(net, {});
  CHECK(r[net.index_of(w)] == doctest::Approx(0.0));

  NetworkFragment other;
  CHECK_THROWS_AS(other.drive("missing", 0.5), ValidationError);
  const std::string driven = other.input("x");
  other.drive(driven, 0.5);
  CHECK_THROWS_AS(other.drive(driven, 0.5), ValidationError);
}

TEST_CASE("fragments refuse to finalize with dangling inputs") {
  NetworkFragment frag;
  const std::string u = frag.input("u");
  frag.inverter(u, 1.0);
  CHECK_THROWS_AS(frag.finalize(), ValidationError);
}
