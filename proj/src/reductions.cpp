#include "cdsnet/reductions.hpp"

#include "cdsnet/gadgets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cdsnet {

ReductionConstants ReductionConstants::defaults() {
  const Scalar root6 = std::sqrt(6.0);
  ReductionConstants k;
  k.gamma = 3.0 - root6;
  k.eps = 5.0 - 2.0 * root6;
  k.delta = k.eps;
  k.phi = 0.7;
  return k;
}

int Monomial::degree() const {
  int total = 0;
  for (int e : exponents) total += e;
  return total;
}

SparsePolynomial::SparsePolynomial(int var_count, std::vector<Monomial> monomials)
    : var_count_(var_count), monomials_(std::move(monomials)) {
  if (var_count_ < 0) throw ValidationError("variable count must be nonnegative");
  for (const Monomial& m : monomials_) {
    if (static_cast<int>(m.exponents.size()) != var_count_) {
      throw ValidationError("monomial exponent vector length does not match variable count");
    }
    for (int e : m.exponents) {
      if (e < 0) throw ValidationError("negative exponent");
    }
    if (m.degree() > 4) {
      throw ValidationError("monomial of total degree " + std::to_string(m.degree()) +
                            " exceeds the supported degree 4");
    }
    if (!std::isfinite(m.coefficient)) throw ValidationError("non-finite coefficient");
  }
}

Scalar SparsePolynomial::max_abs_coefficient() const {
  Scalar out = 0.0;
  for (const Monomial& m : monomials_) out = std::max(out, std::abs(m.coefficient));
  return out;
}

Scalar SparsePolynomial::evaluate(const Vector& x) const {
  if (x.size() != var_count_) {
    throw ValidationError("point dimension does not match variable count");
  }
  Scalar total = 0.0;
  for (const Monomial& m : monomials_) {
    Scalar term = m.coefficient;
    for (int v = 0; v < var_count_; ++v) {
      for (int e = 0; e < m.exponents[static_cast<size_t>(v)]; ++e) term *= x[v];
    }
    total += term;
  }
  return total;
}

SparsePolynomial normalize_poly(const SparsePolynomial& p) {
  std::vector<Monomial> kept;
  for (const Monomial& m : p.monomials()) {
    if (m.coefficient != 0.0) kept.push_back(m);
  }
  if (kept.empty()) {
    throw ValidationError("the zero polynomial cannot be normalized");
  }
  const Scalar bound = 1.0 / static_cast<Scalar>(kept.size());
  Scalar max_abs = 0.0;
  for (const Monomial& m : kept) max_abs = std::max(max_abs, std::abs(m.coefficient));
  if (max_abs > bound) {
    const Scalar scale = bound / max_abs;
    for (Monomial& m : kept) m.coefficient *= scale;
  }
  return SparsePolynomial(p.var_count(), std::move(kept));
}

std::pair<SparsePolynomial, SparsePolynomial> split_poly(const SparsePolynomial& p) {
  std::vector<Monomial> plus, minus;
  for (const Monomial& m : p.monomials()) {
    if (m.coefficient > 0.0) {
      plus.push_back(m);
    } else if (m.coefficient < 0.0) {
      minus.push_back(Monomial{m.exponents, -m.coefficient});
    }
  }
  return {SparsePolynomial(p.var_count(), std::move(plus)),
          SparsePolynomial(p.var_count(), std::move(minus))};
}

SparsePolynomial quad_to_quartic(const std::vector<SparsePolynomial>& system) {
  int vars = 0;
  for (const SparsePolynomial& p : system) {
    vars = std::max(vars, p.var_count());
    for (const Monomial& m : p.monomials()) {
      if (m.degree() > 2) {
        throw ValidationError("quadratic system contains a monomial of degree > 2");
      }
    }
  }
  std::map<std::vector<int>, Scalar> acc;
  for (const SparsePolynomial& p : system) {
    for (const Monomial& a : p.monomials()) {
      for (const Monomial& b : p.monomials()) {
        std::vector<int> e(static_cast<size_t>(vars), 0);
        for (int v = 0; v < p.var_count(); ++v) {
          e[static_cast<size_t>(v)] =
              a.exponents[static_cast<size_t>(v)] + b.exponents[static_cast<size_t>(v)];
        }
        acc[e] += a.coefficient * b.coefficient;
      }
    }
  }
  std::vector<Monomial> monomials;
  for (const auto& [e, c] : acc) {
    if (c != 0.0) monomials.push_back(Monomial{e, c});
  }
  return SparsePolynomial(vars, std::move(monomials));
}

int squaring_depth(Scalar alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ValidationError("squaring depth requires alpha in [0,1)");
  }
  const Scalar base = (1.0 + alpha) / 2.0;
  int k = 1;
  Scalar value = base * base;
  while (value > 0.25) {
    value *= value;
    ++k;
  }
  return k;
}

// ---------------------------------------------------------------------------
// Circuit compilation
// ---------------------------------------------------------------------------

namespace {

CompiledArtifact make_artifact(FinancialNetwork net, const ReductionConstants& k) {
  return CompiledArtifact{std::move(net), k, 1.0, 0, {}, std::nullopt, {}, {}, {}, {}};
}

}  // namespace

namespace {

std::string wire_bank(const std::string& wire) { return "wire/" + wire; }

}  // namespace

CompiledArtifact compile_circuit(const PureCircuit& circuit, const ReductionConstants& k) {
  NetworkFragment frag(1.0, 1.0);
  for (const std::string& w : circuit.wires()) {
    frag.input(wire_bank(w));
  }
  for (const Gate& gate : circuit.gates()) {
    if (gate.kind == GateKind::Nand) {
      frag.nand_gate(wire_bank(gate.inputs[0]), wire_bank(gate.inputs[1]), k,
                     wire_bank(gate.outputs[0]));
    } else {
      frag.purify_gate(wire_bank(gate.inputs[0]), k, wire_bank(gate.outputs[0]),
                       wire_bank(gate.outputs[1]));
    }
  }
  // Unproduced wires are free variables; back each with an input pair so the
  // bank can hold any recovery rate.
  for (const std::string& w : circuit.free_wires()) {
    frag.input_pair(wire_bank(w));
  }

  CompiledArtifact artifact = make_artifact(frag.finalize(), k);
  artifact.circuit = circuit;
  for (const std::string& w : circuit.wires()) {
    artifact.wire_map[w] = wire_bank(w);
  }
  return artifact;
}

Assignment extract_solution(const CompiledArtifact& artifact, const Vector& r) {
  if (!artifact.circuit.has_value()) {
    throw ValidationError("artifact does not carry a circuit");
  }
  if (!is_eps_approx_clearing(artifact.network, r, artifact.constants.eps)) {
    const Vector f = map_f(artifact.network, r);
    std::ostringstream msg;
    msg << "recovery vector is not " << artifact.constants.eps
        << "-approximately clearing (residual " << (f - r).lpNorm<Eigen::Infinity>()
        << "); refusing to decode";
    throw ValidationError(msg.str());
  }
  const DecodingParams params{artifact.constants.gamma, artifact.constants.delta};
  Assignment out;
  for (const auto& [wire, bank] : artifact.wire_map) {
    out[wire] = dec(r[artifact.network.index_of(bank)], params);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial compilation
// ---------------------------------------------------------------------------

namespace {

struct PolyBanks {
  std::vector<std::string> variables;
  std::string output;
};

void require_normalized(const SparsePolynomial& p) {
  if (p.empty()) throw ValidationError("cannot compile the zero polynomial");
  const Scalar bound = 1.0 / static_cast<Scalar>(p.monomials().size());
  if (p.max_abs_coefficient() > bound * (1.0 + 1e-12)) {
    throw ValidationError("polynomial is not normalized; coefficients must not exceed 1/s");
  }
}

// Appends the gadget chain evaluating |p(x)| and returns the variable input
// banks and the bank carrying the absolute value.
PolyBanks append_poly_network(NetworkFragment& frag, const SparsePolynomial& p) {
  require_normalized(p);
  PolyBanks banks;
  for (int v = 0; v < p.var_count(); ++v) {
    banks.variables.push_back(frag.input_pair().first);
  }
  auto monomial_bank = [&](const Monomial& m) {
    std::string cur = frag.constant(std::abs(m.coefficient));
    for (int v = 0; v < p.var_count(); ++v) {
      for (int e = 0; e < m.exponents[static_cast<size_t>(v)]; ++e) {
        cur = frag.product(cur, banks.variables[static_cast<size_t>(v)]);
      }
    }
    return cur;
  };
  auto side_bank = [&](const SparsePolynomial& side) {
    if (side.empty()) return frag.constant(0.0);
    std::string acc;
    for (const Monomial& m : side.monomials()) {
      const std::string term = monomial_bank(m);
      acc = acc.empty() ? term : frag.sum(acc, term);
    }
    return acc;
  };
  const auto [plus, minus] = split_poly(p);
  const std::string plus_bank = side_bank(plus);
  const std::string minus_bank = side_bank(minus);
  // |p| = [[p+ - p-]] + [[p- - p+]]
  const std::string pos_part = frag.difference(minus_bank, plus_bank);
  const std::string neg_part = frag.difference(plus_bank, minus_bank);
  banks.output = frag.sum(pos_part, neg_part);
  return banks;
}

}  // namespace

CompiledArtifact build_poly_network(const SparsePolynomial& p) {
  NetworkFragment frag(1.0, 1.0);
  const PolyBanks banks = append_poly_network(frag, p);
  CompiledArtifact artifact = make_artifact(frag.finalize(), ReductionConstants::defaults());
  artifact.variable_banks = banks.variables;
  artifact.output_bank = banks.output;
  return artifact;
}

CompiledArtifact compile_hasclearing(const SparsePolynomial& p, Scalar alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ValidationError("the clearing-existence pipeline requires alpha in [0,1)");
  }
  NetworkFragment frag(alpha, 1.0);
  const PolyBanks banks = append_poly_network(frag, p);
  const std::string gap = frag.discontinuity(banks.output);
  std::string value = gap;
  const int k = squaring_depth(alpha);
  for (int i = 0; i < k; ++i) {
    value = frag.product(value, value);
  }
  frag.infeasibility(value);

  CompiledArtifact artifact = make_artifact(frag.finalize(), ReductionConstants::defaults());
  artifact.alpha = alpha;
  artifact.squaring_depth = k;
  artifact.variable_banks = banks.variables;
  artifact.output_bank = banks.output;
  artifact.tail_input_bank = value;
  return artifact;
}

CompiledArtifact compile_cansurvive(const SparsePolynomial& p) {
  NetworkFragment frag(1.0, 1.0);
  const PolyBanks banks = append_poly_network(frag, p);
  const std::string target = frag.bank("target");
  frag.source_cds(target, banks.output, 1.0);
  frag.debt(target, NetworkFragment::kSink, 1.0);

  CompiledArtifact artifact = make_artifact(frag.finalize(), ReductionConstants::defaults());
  artifact.variable_banks = banks.variables;
  artifact.output_bank = banks.output;
  artifact.target_bank = target;
  return artifact;
}

}  // namespace cdsnet
