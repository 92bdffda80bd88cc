#pragma once

#include "cdsnet/constants.hpp"
#include "cdsnet/network.hpp"
#include "cdsnet/pure_circuit.hpp"
#include "cdsnet/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cdsnet {

struct Monomial {
  std::vector<int> exponents;
  Scalar coefficient = 0.0;

  int degree() const;
};

/// Multivariate polynomial of total degree at most four, kept as a list of
/// monomials.
class SparsePolynomial {
 public:
  SparsePolynomial(int var_count, std::vector<Monomial> monomials);

  int var_count() const { return var_count_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  bool empty() const { return monomials_.empty(); }
  Scalar max_abs_coefficient() const;

  Scalar evaluate(const Vector& x) const;

 private:
  int var_count_;
  std::vector<Monomial> monomials_;
};

/// Scale all coefficients so their magnitude is at most 1/s, where s is the
/// monomial count; scaling preserves the root set. Monomials with zero
/// coefficient are dropped first; the zero polynomial is rejected.
SparsePolynomial normalize_poly(const SparsePolynomial& p);

/// Split into the nonnegative-coefficient parts (p_plus, p_minus) with
/// p = p_plus - p_minus.
std::pair<SparsePolynomial, SparsePolynomial> split_poly(const SparsePolynomial& p);

/// Sum of squares of quadratics, expanded to sparse quartic form; vanishes
/// exactly where every input polynomial vanishes.
SparsePolynomial quad_to_quartic(const std::vector<SparsePolynomial>& system);

/// Smallest k such that ((1 + alpha) / 2)^(2^k) <= 1/4. Requires alpha < 1.
int squaring_depth(Scalar alpha);

/// A compiled financial network together with the bookkeeping needed to
/// interpret recovery vectors on it.
struct CompiledArtifact {
  FinancialNetwork network;
  ReductionConstants constants;
  Scalar alpha = 1.0;
  int squaring_depth = 0;

  /// Circuit compilation: wire name -> bank name, plus the source circuit.
  std::map<std::string, std::string> wire_map;
  std::optional<PureCircuit> circuit;

  /// Polynomial compilation: one bank per variable (drive these to pick x),
  /// the bank carrying |p(x)|, and for survivability queries the bank whose
  /// solvency answers the question.
  std::vector<std::string> variable_banks;
  std::string output_bank;
  std::string target_bank;
  /// Value entering the final gadget stage of the decision pipeline.
  std::string tail_input_bank;
};

/// Replace every gate with its financial-network gadget; gate outputs are
/// identified with wire banks and consumers reference those banks directly.
/// Wires produced by no gate become free variables backed by an input pair.
CompiledArtifact compile_circuit(const PureCircuit& circuit,
                                 const ReductionConstants& k = ReductionConstants::defaults());

/// Decode a recovery vector of a compiled circuit back to a tri-valued
/// assignment. Throws ValidationError unless r is eps-approximately
/// clearing at the compiled tolerance.
Assignment extract_solution(const CompiledArtifact& artifact, const Vector& r);

/// Network evaluating |p(x)| at the output bank, with the clearing vectors
/// in one-to-one correspondence with x in [0,1]^n. Requires p normalized.
CompiledArtifact build_poly_network(const SparsePolynomial& p);

/// Decision pipeline: the compiled network has a clearing vector iff p has
/// a root in [0,1]^n. Requires alpha < 1; beta is 1.
CompiledArtifact compile_hasclearing(const SparsePolynomial& p, Scalar alpha);

/// Decision pipeline: some clearing vector keeps the target bank solvent
/// iff p has a root in [0,1]^n. No default costs.
CompiledArtifact compile_cansurvive(const SparsePolynomial& p);

}  // namespace cdsnet
