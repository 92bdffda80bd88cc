#include "cdsnet/network.hpp"

#include <cmath>
#include <sstream>

namespace cdsnet {

namespace {

bool finite_nonneg(Scalar x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

FinancialNetwork::FinancialNetwork(std::vector<std::string> bank_names,
                                   Vector external_assets,
                                   std::vector<DebtContract> debts,
                                   std::vector<CdsContract> cds, Scalar alpha,
                                   Scalar beta)
    : names_(std::move(bank_names)),
      external_(std::move(external_assets)),
      debts_(std::move(debts)),
      cds_(std::move(cds)),
      alpha_(alpha),
      beta_(beta) {
  const Index n = size();
  if (external_.size() != n) {
    throw ValidationError("external asset vector length does not match bank count");
  }
  for (Index i = 0; i < n; ++i) {
    if (names_[static_cast<size_t>(i)].empty()) {
      throw ValidationError("empty bank identifier");
    }
    auto [it, fresh] = index_.emplace(names_[static_cast<size_t>(i)], i);
    (void)it;
    if (!fresh) {
      throw ValidationError("duplicate bank identifier '" + names_[static_cast<size_t>(i)] + "'");
    }
    if (!finite_nonneg(external_[i])) {
      throw ValidationError("external assets of bank '" + names_[static_cast<size_t>(i)] +
                            "' must be finite and nonnegative");
    }
  }
  if (!(std::isfinite(alpha_) && alpha_ >= 0.0 && alpha_ <= 1.0)) {
    throw ValidationError("alpha must lie in [0,1]");
  }
  if (!(std::isfinite(beta_) && beta_ >= 0.0 && beta_ <= 1.0)) {
    throw ValidationError("beta must lie in [0,1]");
  }

  auto check_bank = [&](Index b, const char* role) {
    if (b < 0 || b >= n) {
      std::ostringstream msg;
      msg << role << " bank index " << b << " out of range";
      throw ValidationError(msg.str());
    }
  };
  for (const DebtContract& d : debts_) {
    check_bank(d.writer, "debt writer");
    check_bank(d.holder, "debt holder");
    if (d.writer == d.holder) {
      throw ValidationError("debt contract written by '" + bank_name(d.writer) + "' to itself");
    }
    if (!finite_nonneg(d.notional)) {
      throw ValidationError("debt notional must be finite and nonnegative");
    }
  }
  // Writer-writer coincidences are forbidden; holder may coincide with the
  // reference so that a gate output can feed back into its own inputs.
  for (const CdsContract& c : cds_) {
    check_bank(c.writer, "cds writer");
    check_bank(c.holder, "cds holder");
    check_bank(c.reference, "cds reference");
    if (c.writer == c.holder || c.writer == c.reference) {
      throw ValidationError("cds written by '" + bank_name(c.writer) +
                            "' may not name the writer as holder or reference");
    }
    if (!finite_nonneg(c.notional)) {
      throw ValidationError("cds notional must be finite and nonnegative");
    }
  }

  debt_matrix_ = Matrix::Zero(n, n);
  written_ = Vector::Zero(n);
  for (const DebtContract& d : debts_) {
    debt_matrix_(d.writer, d.holder) += d.notional;
    written_[d.writer] += d.notional;
  }
  for (const CdsContract& c : cds_) {
    written_[c.writer] += c.notional;
  }
}

Index FinancialNetwork::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ValidationError("unknown bank '" + name + "'");
  }
  return it->second;
}

void FinancialNetwork::check_recovery_vector(const Vector& r) const {
  if (r.size() != size()) {
    throw ValidationError("recovery vector length does not match bank count");
  }
  for (Index i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 0.0 && r[i] <= 1.0)) {
      std::ostringstream msg;
      msg << "recovery rate of bank '" << bank_name(i) << "' is " << r[i]
          << ", outside [0,1]";
      throw ValidationError(msg.str());
    }
  }
}

LiabilitySnapshot snapshot(const FinancialNetwork& net, const Vector& r) {
  net.check_recovery_vector(r);
  LiabilitySnapshot snap;
  snap.liabilities = net.debt_matrix();
  for (const CdsContract& c : net.cds()) {
    snap.liabilities(c.writer, c.holder) += (1.0 - r[c.reference]) * c.notional;
  }
  snap.total_liability = snap.liabilities.rowwise().sum();
  const Vector incoming = snap.liabilities.transpose() * r;
  snap.assets = net.external_assets() + incoming;
  snap.assets_after_costs = net.alpha() * net.external_assets() + net.beta() * incoming;
  return snap;
}

Vector update_F(const FinancialNetwork& net, const Vector& r) {
  const LiabilitySnapshot snap = snapshot(net, r);
  Vector out(net.size());
  for (Index i = 0; i < net.size(); ++i) {
    out[i] = snap.assets[i] >= snap.total_liability[i]
                 ? 1.0
                 : snap.assets_after_costs[i] / snap.total_liability[i];
  }
  return out;
}

Vector map_f(const FinancialNetwork& net, const Vector& r) {
  const LiabilitySnapshot snap = snapshot(net, r);
  Vector out(net.size());
  for (Index i = 0; i < net.size(); ++i) {
    const Scalar denom = std::max(snap.assets[i], snap.total_liability[i]);
    if (denom == 0.0) {
      throw DegenerateNetworkError("bank '" + net.bank_name(i) +
                                   "' has zero assets and zero liabilities at this point");
    }
    out[i] = snap.assets[i] / denom;
  }
  return out;
}

bool is_nondegenerate(const FinancialNetwork& net) {
  std::vector<bool> writes_debt(static_cast<size_t>(net.size()), false);
  for (const DebtContract& d : net.debts()) {
    if (d.notional > 0.0) writes_debt[static_cast<size_t>(d.writer)] = true;
  }
  for (Index i = 0; i < net.size(); ++i) {
    if (net.external_assets()[i] <= 0.0 && !writes_debt[static_cast<size_t>(i)]) {
      return false;
    }
  }
  return true;
}

bool is_clearing(const FinancialNetwork& net, const Vector& r, Scalar tol) {
  if (!(tol >= 0.0)) {
    throw ValidationError("tolerance must be nonnegative");
  }
  return (update_F(net, r) - r).lpNorm<Eigen::Infinity>() <= tol;
}

bool is_eps_approx_clearing(const FinancialNetwork& net, const Vector& r, Scalar eps) {
  if (!(eps > 0.0)) {
    throw ValidationError("eps must be positive");
  }
  if (net.has_default_costs()) {
    throw DefaultCostsError("approximate clearing is defined for alpha = beta = 1 only");
  }
  if (!is_nondegenerate(net)) {
    throw DegenerateNetworkError("approximate clearing requires a non-degenerate network");
  }
  const LiabilitySnapshot snap = snapshot(net, r);
  for (Index i = 0; i < net.size(); ++i) {
    const Scalar denom = std::max(snap.assets[i], snap.total_liability[i]);
    if (denom == 0.0) {
      throw DegenerateNetworkError("bank '" + net.bank_name(i) +
                                   "' has zero assets and zero liabilities at this point");
    }
    if (std::abs(snap.assets[i] / denom - r[i]) > eps) {
      return false;
    }
    if (snap.assets[i] >= (1.0 + eps) * snap.total_liability[i] && r[i] != 1.0) {
      return false;
    }
  }
  return true;
}

}  // namespace cdsnet
