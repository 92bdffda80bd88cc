#pragma once

#include "cdsnet/types.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace cdsnet {

/// Unconditional obligation of `writer` to pay `notional` to `holder`.
struct DebtContract {
  Index writer;
  Index holder;
  Scalar notional;
};

/// Credit default swap: `writer` owes `holder` the amount
/// (1 - r_reference) * notional, conditioned on the reference bank's
/// recovery rate.
struct CdsContract {
  Index writer;
  Index holder;
  Index reference;
  Scalar notional;
};

/// A financial network: banks with external assets, debt contracts and
/// CDSs between them, and default-cost factors alpha (on external assets)
/// and beta (on incoming payments).
///
/// Recovery-rate vectors are plain Vectors indexed in bank declaration
/// order. Instances are immutable after construction and safe to share
/// across threads.
class FinancialNetwork {
 public:
  FinancialNetwork(std::vector<std::string> bank_names, Vector external_assets,
                   std::vector<DebtContract> debts, std::vector<CdsContract> cds,
                   Scalar alpha = 1.0, Scalar beta = 1.0);

  Index size() const { return static_cast<Index>(names_.size()); }
  const std::vector<std::string>& bank_names() const { return names_; }
  const std::string& bank_name(Index i) const { return names_.at(static_cast<size_t>(i)); }
  Index index_of(const std::string& name) const;
  bool has_bank(const std::string& name) const { return index_.count(name) > 0; }

  const Vector& external_assets() const { return external_; }
  Scalar alpha() const { return alpha_; }
  Scalar beta() const { return beta_; }
  bool has_default_costs() const { return alpha_ < 1.0 || beta_ < 1.0; }

  const std::vector<DebtContract>& debts() const { return debts_; }
  const std::vector<CdsContract>& cds() const { return cds_; }

  /// Dense matrix of debt notionals, (writer, holder).
  const Matrix& debt_matrix() const { return debt_matrix_; }
  /// Total notional written by each bank, debts plus CDSs. The liability
  /// l_i(r) never exceeds this value.
  const Vector& written_notionals() const { return written_; }

  /// Throws ValidationError unless r is a valid recovery vector for this
  /// network: correct length, finite, componentwise in [0,1].
  void check_recovery_vector(const Vector& r) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
  Vector external_;
  std::vector<DebtContract> debts_;
  std::vector<CdsContract> cds_;
  Scalar alpha_;
  Scalar beta_;
  Matrix debt_matrix_;
  Vector written_;
};

/// Liabilities, payments and assets evaluated at a recovery vector.
struct LiabilitySnapshot {
  Matrix liabilities;         ///< (i, j) -> l_{i,j}(r)
  Vector total_liability;     ///< l_i(r) = sum_j l_{i,j}(r)
  Vector assets;              ///< a_i(r) = e_i + sum_j r_j l_{j,i}(r)
  Vector assets_after_costs;  ///< a'_i(r) = alpha e_i + beta sum_j r_j l_{j,i}(r)
};

LiabilitySnapshot snapshot(const FinancialNetwork& net, const Vector& r);

/// One step of the clearing update: banks with assets covering liabilities
/// get recovery 1, defaulting banks get assets-after-costs over liabilities.
/// The solvency comparison a_i >= l_i is exact on the computed doubles.
Vector update_F(const FinancialNetwork& net, const Vector& r);

/// Continuous companion of update_F for networks without default costs:
/// f(r)_i = a_i(r) / max(a_i(r), l_i(r)).
/// Throws DegenerateNetworkError if some bank has a_i = l_i = 0 at r.
Vector map_f(const FinancialNetwork& net, const Vector& r);

/// True iff every bank has positive external assets or writes at least one
/// debt contract. Written CDSs do not count.
bool is_nondegenerate(const FinancialNetwork& net);

/// True iff ||update_F(r) - r||_inf <= tol.
bool is_clearing(const FinancialNetwork& net, const Vector& r, Scalar tol);

/// Approximate clearing for networks without default costs:
/// ||map_f(r) - r||_inf <= eps, and every bank with
/// a_i(r) >= (1 + eps) l_i(r) has r_i = 1.
/// Throws DefaultCostsError when alpha < 1 or beta < 1, and
/// DegenerateNetworkError on degenerate networks.
bool is_eps_approx_clearing(const FinancialNetwork& net, const Vector& r, Scalar eps);

}  // namespace cdsnet
