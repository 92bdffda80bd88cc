#include "cdsnet/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace cdsnet {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();
constexpr Scalar kEmptySlack = 1e-12;
constexpr Scalar kQuiescence = 1e-14;

Scalar inf_norm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Found: return "Found";
    case SolveStatus::NotFound: return "NotFound";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Undecided: return "Undecided";
  }
  return "?";
}

int default_thread_count() {
  const char* env = std::getenv("CDSNET_THREADS");
  if (env == nullptr) return 1;
  const long parsed = std::strtol(env, nullptr, 10);
  return static_cast<int>(std::clamp(parsed, 1L, 64L));
}

// ---------------------------------------------------------------------------
// Damped fixed-point iteration
// ---------------------------------------------------------------------------

SolveReport iterate_F(const FinancialNetwork& net, const Vector& r0,
                      const IterateOptions& opts) {
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw ValidationError("damping must lie in (0,1]");
  }
  if (!(opts.tol >= 0.0)) {
    throw ValidationError("tolerance must be nonnegative");
  }
  net.check_recovery_vector(r0);

  SolveReport report;
  Vector r = r0;
  Scalar best = kInf;
  long iter = 0;
  while (iter < opts.max_iter) {
    const Vector next = update_F(net, r);
    const Scalar residual = inf_norm(next - r);
    best = std::min(best, residual);
    ++iter;
    ++report.iterations;
    if (residual <= opts.tol) {
      // Confirm convergence rather than mere passage: near a branch
      // discontinuity the orbit can dip under the tolerance while no fixed
      // point exists nearby, in which case continuing blows the residual
      // back up within a few steps.
      const Vector candidate = r;
      bool stable = true;
      for (long w = 0; w < opts.confirmation_window && iter < opts.max_iter; ++w, ++iter) {
        const Vector step = update_F(net, r);
        ++report.iterations;
        if (inf_norm(step - r) > opts.tol) {
          stable = false;
          break;
        }
        r = (1.0 - opts.damping) * r + opts.damping * step;
      }
      if (stable && is_clearing(net, candidate, opts.tol)) {
        report.status = SolveStatus::Found;
        report.recovery = candidate;
        report.residual = residual;
        return report;
      }
      continue;
    }
    r = (1.0 - opts.damping) * r + opts.damping * next;
  }
  report.status = SolveStatus::NotFound;
  report.residual = best;
  return report;
}

SolveReport iterate_F(const FinancialNetwork& net, const IterateOptions& opts) {
  return iterate_F(net, Vector::Ones(net.size()), opts);
}

// ---------------------------------------------------------------------------
// Auxiliary maps on [0, 1+eps]^n
// ---------------------------------------------------------------------------

namespace {

void check_aux_domain(const FinancialNetwork& net, const Vector& r, Scalar eps) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (net.has_default_costs()) {
    throw DefaultCostsError("auxiliary maps require alpha = beta = 1");
  }
  if (!is_nondegenerate(net)) {
    throw DegenerateNetworkError("auxiliary maps require a non-degenerate network");
  }
  if (r.size() != net.size()) {
    throw ValidationError("vector length does not match bank count");
  }
  for (Index i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 0.0 && r[i] <= 1.0 + eps)) {
      throw ValidationError("auxiliary map input must lie in [0, 1+eps]^n");
    }
  }
}

}  // namespace

Vector map_G(const FinancialNetwork& net, const Vector& r, Scalar eps) {
  check_aux_domain(net, r, eps);
  const LiabilitySnapshot snap = snapshot(net, truncate01(r));
  Vector out(net.size());
  for (Index i = 0; i < net.size(); ++i) {
    out[i] = snap.assets[i] >= (1.0 + eps) * snap.total_liability[i]
                 ? 1.0 + eps
                 : snap.assets[i] / snap.total_liability[i];
  }
  return out;
}

Vector map_g(const FinancialNetwork& net, const Vector& r, Scalar eps) {
  check_aux_domain(net, r, eps);
  const LiabilitySnapshot snap = snapshot(net, truncate01(r));
  Vector out(net.size());
  for (Index i = 0; i < net.size(); ++i) {
    const Scalar denom = std::max(snap.assets[i] / (1.0 + eps), snap.total_liability[i]);
    if (denom == 0.0) {
      throw DegenerateNetworkError("bank '" + net.bank_name(i) +
                                   "' has zero assets and zero liabilities at this point");
    }
    out[i] = snap.assets[i] / denom;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Approximate clearing via almost fixed points of map_g
// ---------------------------------------------------------------------------

SolveReport solve_eps_approx(const FinancialNetwork& net, Scalar eps,
                             const ApproxOptions& opts) {
  check_aux_domain(net, Vector::Zero(net.size()), eps);
  const Index n = net.size();
  static constexpr Scalar kDampings[5] = {0.5, 0.25, 0.1, 0.05, 0.02};
  // Running averages of the orbit; when the iteration settles into a limit
  // cycle around a fixed point, the time average lands near the fixed point
  // even though no single iterate does.
  static constexpr Scalar kAverageRates[2] = {0.01, 0.002};
  const Scalar margin = std::min(1e-9, eps / 2.0);

  SolveReport report;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<Scalar> uni(0.0, 1.0 + eps);
  Vector best_point = Vector::Ones(n);
  Scalar best_residual = kInf;

  auto admissible = [&](const Vector& point, Scalar residual) -> std::optional<Vector> {
    if (residual < best_residual) {
      best_residual = residual;
      best_point = point;
    }
    if (residual > eps - margin) return std::nullopt;
    Vector candidate = truncate01(point);
    if (!is_eps_approx_clearing(net, candidate, eps)) return std::nullopt;
    return candidate;
  };

  for (int restart = 0; restart < opts.restarts; ++restart) {
    Vector z(n);
    if (restart == 0) {
      z.setOnes();
    } else {
      for (Index i = 0; i < n; ++i) z[i] = uni(rng);
    }
    const Scalar damping = kDampings[restart % 5];
    Vector averages[2] = {z, z};
    Scalar restart_best = kInf;
    long since_improvement = 0;
    for (long iter = 0; iter < opts.max_iter; ++iter) {
      const Vector gz = map_g(net, z, eps);
      const Scalar residual = inf_norm(gz - z);
      ++report.iterations;
      Scalar step_best = residual;
      if (auto candidate = admissible(z, residual)) {
        report.status = SolveStatus::Found;
        report.recovery = *candidate;
        report.residual = inf_norm(update_F(net, *candidate) - *candidate);
        return report;
      }
      for (int a = 0; a < 2; ++a) {
        averages[a] = (1.0 - kAverageRates[a]) * averages[a] + kAverageRates[a] * z;
        if (iter % 16 == 0) {
          const Vector ga = map_g(net, averages[a], eps);
          const Scalar avg_residual = inf_norm(ga - averages[a]);
          ++report.iterations;
          step_best = std::min(step_best, avg_residual);
          if (auto candidate = admissible(averages[a], avg_residual)) {
            report.status = SolveStatus::Found;
            report.recovery = *candidate;
            report.residual = inf_norm(update_F(net, *candidate) - *candidate);
            return report;
          }
        }
      }
      if (step_best < restart_best - 1e-15) {
        restart_best = step_best;
        since_improvement = 0;
      } else if (++since_improvement > opts.stall_limit) {
        break;
      }
      z = ((1.0 - damping) * z + damping * gz).cwiseMax(0.0).cwiseMin(1.0 + eps);
    }
  }

  if (opts.exact_fallback) {
    PatternOptions fallback;
    fallback.cap = opts.fallback_cap;
    fallback.stop_at_first_solution = true;
    fallback.seed = opts.seed;
    try {
      const SolveReport exact = enumerate_patterns(net, fallback);
      report.iterations += exact.iterations;
      if (exact.status == SolveStatus::Found) {
        const Vector candidate = truncate01(*exact.recovery);
        if (is_eps_approx_clearing(net, candidate, eps)) {
          report.status = SolveStatus::Found;
          report.recovery = candidate;
          report.residual = inf_norm(update_F(net, candidate) - candidate);
          return report;
        }
      }
    } catch (const CapExceededError&) {
      // too many undetermined banks for the exact stage; report the search result
    }
  }

  report.status = SolveStatus::NotFound;
  const Vector candidate = truncate01(best_point);
  report.residual = inf_norm(update_F(net, candidate) - candidate);
  return report;
}

// ---------------------------------------------------------------------------
// Feed-forward evaluation
// ---------------------------------------------------------------------------

namespace {

struct ForwardStructure {
  // Per holder: aggregated incoming contracts.
  struct InPay {
    Index writer;
    Scalar debt = 0.0;
    std::vector<std::pair<Index, Scalar>> refs;  // (reference, notional)
  };
  std::vector<std::vector<InPay>> incoming;
  // Per writer: total CDS notional by reference, for l_i(r).
  std::vector<std::vector<std::pair<Index, Scalar>>> written_refs;

  explicit ForwardStructure(const FinancialNetwork& net) {
    const size_t n = static_cast<size_t>(net.size());
    incoming.resize(n);
    written_refs.resize(n);
    std::vector<std::map<Index, size_t>> slot(n);
    auto in_slot = [&](Index writer, Index holder) -> InPay& {
      auto& m = slot[static_cast<size_t>(holder)];
      auto it = m.find(writer);
      if (it == m.end()) {
        incoming[static_cast<size_t>(holder)].push_back(InPay{writer, 0.0, {}});
        it = m.emplace(writer, incoming[static_cast<size_t>(holder)].size() - 1).first;
      }
      return incoming[static_cast<size_t>(holder)][it->second];
    };
    for (const DebtContract& d : net.debts()) {
      in_slot(d.writer, d.holder).debt += d.notional;
    }
    std::vector<std::map<Index, Scalar>> by_ref(n);
    for (const CdsContract& c : net.cds()) {
      in_slot(c.writer, c.holder).refs.push_back({c.reference, c.notional});
      by_ref[static_cast<size_t>(c.writer)][c.reference] += c.notional;
    }
    for (size_t i = 0; i < n; ++i) {
      written_refs[i].assign(by_ref[i].begin(), by_ref[i].end());
    }
  }
};

}  // namespace

std::pair<Vector, std::vector<bool>> forward_eval_partial(
    const FinancialNetwork& net, const std::map<std::string, Scalar>& driven) {
  const Index n = net.size();
  Vector value = Vector::Zero(n);
  std::vector<bool> known(static_cast<size_t>(n), false);

  for (const auto& [name, v] : driven) {
    const Index i = net.index_of(name);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("driven value for bank '" + name + "' must lie in [0,1]");
    }
    value[i] = v;
    known[static_cast<size_t>(i)] = true;
  }
  // Banks endowed beyond everything they wrote can never default.
  for (Index i = 0; i < n; ++i) {
    if (!known[static_cast<size_t>(i)] &&
        net.external_assets()[i] >= net.written_notionals()[i]) {
      value[i] = 1.0;
      known[static_cast<size_t>(i)] = true;
    }
  }

  const ForwardStructure fs(net);
  std::vector<std::vector<Index>> dependents(static_cast<size_t>(n));
  std::vector<int> missing(static_cast<size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    if (known[static_cast<size_t>(i)]) continue;
    std::vector<Index> deps;
    for (const auto& in : fs.incoming[static_cast<size_t>(i)]) {
      deps.push_back(in.writer);
      for (const auto& [k, c] : in.refs) {
        (void)c;
        deps.push_back(k);
      }
    }
    for (const auto& [k, c] : fs.written_refs[static_cast<size_t>(i)]) {
      (void)c;
      deps.push_back(k);
    }
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    for (Index d : deps) {
      if (!known[static_cast<size_t>(d)]) {
        dependents[static_cast<size_t>(d)].push_back(i);
        ++missing[static_cast<size_t>(i)];
      }
    }
  }

  std::vector<Index> ready;
  for (Index i = 0; i < n; ++i) {
    if (!known[static_cast<size_t>(i)] && missing[static_cast<size_t>(i)] == 0) {
      ready.push_back(i);
    }
  }
  auto evaluate = [&](Index i) {
    Scalar liability = net.written_notionals()[i];
    for (const auto& [k, c] : fs.written_refs[static_cast<size_t>(i)]) {
      liability -= c * value[k];
    }
    Scalar incoming = 0.0;
    for (const auto& in : fs.incoming[static_cast<size_t>(i)]) {
      Scalar pair_liab = in.debt;
      for (const auto& [k, c] : in.refs) pair_liab += c * (1.0 - value[k]);
      incoming += value[in.writer] * pair_liab;
    }
    const Scalar assets = net.external_assets()[i] + incoming;
    if (assets >= liability) return 1.0;
    return (net.alpha() * net.external_assets()[i] + net.beta() * incoming) / liability;
  };
  while (!ready.empty()) {
    // Smallest index first keeps the evaluation order deterministic.
    std::sort(ready.begin(), ready.end(), std::greater<Index>());
    const Index i = ready.back();
    ready.pop_back();
    value[i] = evaluate(i);
    known[static_cast<size_t>(i)] = true;
    for (Index d : dependents[static_cast<size_t>(i)]) {
      if (--missing[static_cast<size_t>(d)] == 0) ready.push_back(d);
    }
  }
  return {value, known};
}

Vector forward_eval(const FinancialNetwork& net,
                    const std::map<std::string, Scalar>& driven) {
  auto [value, known] = forward_eval_partial(net, driven);
  std::vector<std::string> stuck;
  for (Index i = 0; i < net.size(); ++i) {
    if (!known[static_cast<size_t>(i)]) stuck.push_back(net.bank_name(i));
  }
  if (!stuck.empty()) {
    std::ostringstream msg;
    msg << "no feed-forward evaluation order exists; unresolved banks:";
    for (size_t i = 0; i < stuck.size() && i < 6; ++i) msg << " '" << stuck[i] << "'";
    if (stuck.size() > 6) msg << " ...";
    throw CyclicDependencyError(msg.str());
  }
  return value;
}

// ---------------------------------------------------------------------------
// Interval propagation over solvency patterns
// ---------------------------------------------------------------------------

namespace {

struct Interval {
  Scalar lo;
  Scalar hi;
};

bool interval_empty(const Interval& iv) { return iv.lo > iv.hi + kEmptySlack; }

enum class Branch : unsigned char { Unknown, Solvent, Default };

struct PropagationModel {
  const FinancialNetwork* net;
  ForwardStructure structure;
  // Per holder: reference -> contributions (writer, notional) of incoming
  // CDSs naming that reference.
  std::vector<std::map<Index, std::vector<std::pair<Index, Scalar>>>> incoming_by_ref;
  // Banks whose recovery rate enters bank i's assets or liabilities.
  std::vector<std::vector<Index>> deps;

  explicit PropagationModel(const FinancialNetwork& network)
      : net(&network), structure(network) {
    const size_t n = static_cast<size_t>(network.size());
    incoming_by_ref.resize(n);
    deps.resize(n);
    for (size_t i = 0; i < n; ++i) {
      std::vector<Index> d;
      for (const auto& in : structure.incoming[i]) {
        d.push_back(in.writer);
        for (const auto& [k, c] : in.refs) {
          incoming_by_ref[i][k].push_back({in.writer, c});
          d.push_back(k);
        }
      }
      for (const auto& [k, c] : structure.written_refs[i]) {
        (void)c;
        d.push_back(k);
      }
      std::sort(d.begin(), d.end());
      d.erase(std::unique(d.begin(), d.end()), d.end());
      deps[i] = std::move(d);
    }
  }

  // Interval of l_{writer,holder}(r); `frozen` (if >= 0) is treated as r = 0.
  Interval pair_liability(const ForwardStructure::InPay& in,
                          const std::vector<Interval>& box, Index frozen) const {
    Interval out{in.debt, in.debt};
    for (const auto& [k, c] : in.refs) {
      const Interval rk = k == frozen ? Interval{0.0, 0.0} : box[static_cast<size_t>(k)];
      out.lo += c * (1.0 - rk.hi);
      out.hi += c * (1.0 - rk.lo);
    }
    return out;
  }

  Interval incoming_payments(Index i, const std::vector<Interval>& box, Index frozen) const {
    Interval q{0.0, 0.0};
    for (const auto& in : structure.incoming[static_cast<size_t>(i)]) {
      if (in.writer == frozen) continue;
      const Interval lp = pair_liability(in, box, frozen);
      const Interval rw = box[static_cast<size_t>(in.writer)];
      q.lo += rw.lo * lp.lo;
      q.hi += rw.hi * lp.hi;
    }
    return q;
  }

  Interval liability(Index i, const std::vector<Interval>& box, Index frozen) const {
    const Scalar base = net->written_notionals()[i];
    Interval out{base, base};
    for (const auto& [k, c] : structure.written_refs[static_cast<size_t>(i)]) {
      const Interval rk = k == frozen ? Interval{0.0, 0.0} : box[static_cast<size_t>(k)];
      out.lo -= c * rk.hi;
      out.hi -= c * rk.lo;
    }
    out.lo = std::max(out.lo, 0.0);
    return out;
  }
};

struct PropagationState {
  std::vector<Interval> box;
  std::vector<Branch> branch;
  bool contradiction = false;
};

// Value interval a'/l of a defaulting bank; the default branch guarantees
// l > 0 at any consistent point, so a zero lower liability bound only
// loosens the upper end.
Interval default_value(const Interval& after_costs, const Interval& liability) {
  Interval out;
  out.lo = liability.hi > 0.0 ? after_costs.lo / liability.hi : 0.0;
  if (after_costs.hi <= 0.0) {
    out.hi = 0.0;
  } else if (liability.lo > 0.0) {
    out.hi = after_costs.hi / liability.lo;
  } else {
    out.hi = kInf;
  }
  return out;
}

bool shrink(Interval& target, const Interval& with, bool& changed) {
  const Scalar lo = std::max(target.lo, with.lo);
  const Scalar hi = std::min(target.hi, with.hi);
  if (lo > target.lo + kQuiescence || hi < target.hi - kQuiescence) changed = true;
  target.lo = std::max(target.lo, lo);
  target.hi = std::min(target.hi, hi);
  return !interval_empty(target);
}

// Refine box[k] under the one-variable view delta = coef * r_k + rest,
// constrained to be <= 0 (default branch) or >= 0 (solvent branch).
// Returns false on a proven contradiction.
bool project_branch_constraint(Interval& rk, const Interval& coef, const Interval& rest,
                               bool upper_zero, bool& changed) {
  if (upper_zero) {
    // need coef.lo * x + rest.lo <= 0 for a consistent x >= 0
    const Scalar a = coef.lo;
    const Scalar b = rest.lo;
    if (a > 0.0) {
      const Scalar bound = -b / a;
      if (bound < rk.lo - kEmptySlack) return false;
      if (bound < rk.hi - kQuiescence) {
        rk.hi = std::min(rk.hi, bound);
        changed = true;
      }
    } else if (a == 0.0) {
      if (b > kEmptySlack) return false;
    } else {
      const Scalar bound = -b / a;
      if (bound > rk.hi + kEmptySlack) return false;
      if (bound > rk.lo + kQuiescence) {
        rk.lo = std::max(rk.lo, bound);
        changed = true;
      }
    }
  } else {
    // need coef.hi * x + rest.hi >= 0
    const Scalar a = coef.hi;
    const Scalar b = rest.hi;
    if (a < 0.0) {
      const Scalar bound = -b / a;
      if (bound < rk.lo - kEmptySlack) return false;
      if (bound < rk.hi - kQuiescence) {
        rk.hi = std::min(rk.hi, bound);
        changed = true;
      }
    } else if (a == 0.0) {
      if (b < -kEmptySlack) return false;
    } else {
      const Scalar bound = -b / a;
      if (bound > rk.hi + kEmptySlack) return false;
      if (bound > rk.lo + kQuiescence) {
        rk.lo = std::max(rk.lo, bound);
        changed = true;
      }
    }
  }
  return true;
}

// Sweeps forward/backward over every bank until the state is quiescent,
// contradicted, or the sweep budget runs out. The solvency comparison is
// exact: a defaulting branch is contradicted as soon as assets provably
// reach liabilities, including exact ties.
void propagate(const PropagationModel& model, PropagationState& st, int max_sweeps) {
  const Index n = model.net->size();
  const Vector& external = model.net->external_assets();
  const Scalar alpha = model.net->alpha();
  const Scalar beta = model.net->beta();

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const size_t si = static_cast<size_t>(i);
      const Interval q = model.incoming_payments(i, st.box, -1);
      const Interval l = model.liability(i, st.box, -1);
      const Interval a{external[i] + q.lo, external[i] + q.hi};
      const Interval ac{alpha * external[i] + beta * q.lo, alpha * external[i] + beta * q.hi};

      if (st.branch[si] == Branch::Unknown) {
        if (a.lo >= l.hi) {
          st.branch[si] = Branch::Solvent;
          changed = true;
        } else if (a.hi < l.lo) {
          st.branch[si] = Branch::Default;
          changed = true;
        } else {
          const Interval dv = default_value(ac, l);
          if (dv.lo > 1.0 + kEmptySlack) {
            // a defaulting recovery rate would exceed 1, so the bank is solvent
            st.branch[si] = Branch::Solvent;
            changed = true;
          }
        }
      }

      if (st.branch[si] == Branch::Solvent) {
        if (a.hi < l.lo) {
          st.contradiction = true;
          return;
        }
        if (!shrink(st.box[si], Interval{1.0, 1.0}, changed)) {
          st.contradiction = true;
          return;
        }
      } else if (st.branch[si] == Branch::Default) {
        if (a.lo >= l.hi) {
          st.contradiction = true;
          return;
        }
        if (l.hi <= 0.0) {
          st.contradiction = true;
          return;
        }
        if (!shrink(st.box[si], default_value(ac, l), changed)) {
          st.contradiction = true;
          return;
        }
      } else {
        const Interval dv = default_value(ac, l);
        if (!shrink(st.box[si], Interval{std::min(dv.lo, 1.0), 1.0}, changed)) {
          st.contradiction = true;
          return;
        }
      }

      // Backward projection of the branch inequality onto every bank whose
      // recovery rate enters a_i - l_i.
      if (st.branch[si] != Branch::Unknown) {
        const bool upper_zero = st.branch[si] == Branch::Default;
        for (Index k : model.deps[si]) {
          const size_t sk = static_cast<size_t>(k);
          Interval coef{0.0, 0.0};
          for (const auto& in : model.structure.incoming[si]) {
            if (in.writer == k) {
              const Interval lp = model.pair_liability(in, st.box, -1);
              coef.lo += lp.lo;
              coef.hi += lp.hi;
            }
          }
          auto ref_it = model.incoming_by_ref[si].find(k);
          if (ref_it != model.incoming_by_ref[si].end()) {
            Scalar s_lo = 0.0, s_hi = 0.0;
            for (const auto& [writer, c] : ref_it->second) {
              s_lo += st.box[static_cast<size_t>(writer)].lo * c;
              s_hi += st.box[static_cast<size_t>(writer)].hi * c;
            }
            coef.lo -= s_hi;
            coef.hi -= s_lo;
          }
          for (const auto& [ref, c] : model.structure.written_refs[si]) {
            if (ref == k) {
              coef.lo += c;
              coef.hi += c;
            }
          }
          const Interval q0 = model.incoming_payments(i, st.box, k);
          const Interval l0 = model.liability(i, st.box, k);
          const Interval rest{external[i] + q0.lo - l0.hi, external[i] + q0.hi - l0.lo};
          if (!project_branch_constraint(st.box[sk], coef, rest, upper_zero, changed)) {
            st.contradiction = true;
            return;
          }
          if (interval_empty(st.box[sk])) {
            st.contradiction = true;
            return;
          }
        }
      }
    }
    if (!changed) return;
  }
}

// Exact check that r selects the asserted branch of every bank and is a
// clearing vector at the requested tolerance.
bool verify_pattern_solution(const FinancialNetwork& net, const std::vector<Branch>& branch,
                             const Vector& r, Scalar tol) {
  const LiabilitySnapshot snap = snapshot(net, r);
  for (Index i = 0; i < net.size(); ++i) {
    if (branch[static_cast<size_t>(i)] == Branch::Default) {
      if (!(snap.assets[i] < snap.total_liability[i])) return false;
    } else {
      if (!(snap.assets[i] >= snap.total_liability[i])) return false;
    }
  }
  return is_clearing(net, r, tol);
}

// Newton iteration on the pattern-constrained clearing system: banks pinned
// by the propagated box (solvent banks, driven banks, forced values) stay
// at their pin; every other defaulting bank i solves
// a'_i(r) - r_i l_i(r) = 0. With the branch pattern fixed the system is
// polynomial and smooth, so Newton handles feedback loops whose gain makes
// fixed-point iteration diverge; minimum-norm steps absorb the singular
// directions of free-variable families.
bool newton_pattern(const FinancialNetwork& net, const std::vector<Branch>& branch,
                    const std::vector<Interval>& box, Vector& r, long& iterations_used) {
  const Index n = net.size();
  const Scalar beta = net.beta();
  std::vector<bool> pinned(static_cast<size_t>(n), false);
  Vector pin_value(n);
  for (Index i = 0; i < n; ++i) {
    const size_t si = static_cast<size_t>(i);
    if (branch[si] == Branch::Solvent) {
      pinned[si] = true;
      pin_value[i] = 1.0;
    } else if (box[si].hi - box[si].lo <= 1e-11) {
      pinned[si] = true;
      pin_value[i] = truncate01(0.5 * (box[si].lo + box[si].hi));
    }
  }
  auto clamp_into_box = [&](Vector& v) {
    for (Index i = 0; i < n; ++i) {
      const size_t si = static_cast<size_t>(i);
      if (pinned[si]) {
        v[i] = pin_value[i];
      } else {
        v[i] = std::min(std::min(box[si].hi, 1.0), std::max(box[si].lo, v[i]));
      }
    }
  };
  clamp_into_box(r);

  for (int step = 0; step < 60; ++step) {
    ++iterations_used;
    const LiabilitySnapshot snap = snapshot(net, r);
    Vector phi(n);
    for (Index i = 0; i < n; ++i) {
      phi[i] = pinned[static_cast<size_t>(i)]
                   ? 0.0
                   : snap.assets_after_costs[i] - r[i] * snap.total_liability[i];
    }
    if (inf_norm(phi) <= 1e-12) return true;

    Matrix jac = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      if (pinned[static_cast<size_t>(i)]) {
        jac(i, i) = -1.0;
        continue;
      }
      for (Index j = 0; j < n; ++j) {
        jac(i, j) = beta * snap.liabilities(j, i);
      }
      for (const CdsContract& c : net.cds()) {
        if (c.holder == i) jac(i, c.reference) -= beta * r[c.writer] * c.notional;
        if (c.writer == i) jac(i, c.reference) += r[i] * c.notional;
      }
      jac(i, i) -= snap.total_liability[i];
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(jac);
    const Vector delta = cod.solve(-phi);
    if (!delta.allFinite()) return false;
    if (inf_norm(delta) <= 1e-14) return false;
    r += delta;
    clamp_into_box(r);
  }
  return false;
}

// Damped iteration restricted to the branch pattern, targets clipped to the
// propagated box; fallback for patterns Newton does not crack.
std::optional<Vector> iterate_pattern(const FinancialNetwork& net,
                                      const std::vector<Branch>& branch,
                                      const std::vector<Interval>& box,
                                      const PatternOptions& opts, std::mt19937_64& rng,
                                      long& iterations_used) {
  const Index n = net.size();
  static constexpr Scalar kDampings[2] = {0.5, 0.2};

  std::vector<Vector> starts;
  Vector mid(n);
  for (Index i = 0; i < n; ++i) {
    mid[i] = 0.5 * (box[static_cast<size_t>(i)].lo +
                    std::min(box[static_cast<size_t>(i)].hi, 1.0));
  }
  starts.push_back(mid);
  std::uniform_real_distribution<Scalar> uni(0.0, 1.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    Vector r(n);
    for (Index i = 0; i < n; ++i) {
      const Interval& b = box[static_cast<size_t>(i)];
      r[i] = b.lo + uni(rng) * (std::min(b.hi, 1.0) - b.lo);
    }
    starts.push_back(r);
  }

  for (const Vector& start : starts) {
    for (const Scalar damping : kDampings) {
      Vector r = start;
      bool usable = true;
      for (long iter = 0; iter < opts.max_iter; ++iter) {
        const LiabilitySnapshot snap = snapshot(net, r);
        Vector target(n);
        for (Index i = 0; i < n; ++i) {
          const size_t si = static_cast<size_t>(i);
          if (branch[si] == Branch::Default) {
            if (snap.total_liability[i] <= 0.0) {
              usable = false;
              break;
            }
            const Scalar raw = snap.assets_after_costs[i] / snap.total_liability[i];
            target[i] = std::min(std::min(box[si].hi, 1.0), std::max(box[si].lo, raw));
          } else {
            target[i] = std::min(std::min(box[si].hi, 1.0), std::max(box[si].lo, 1.0));
          }
        }
        if (!usable) break;
        const Scalar residual = inf_norm(target - r);
        ++iterations_used;
        if (residual <= 1e-12) break;
        r = (1.0 - damping) * r + damping * target;
      }
      if (!usable) continue;
      if (verify_pattern_solution(net, branch, r, opts.tol)) {
        return r;
      }
    }
  }
  return std::nullopt;
}

std::optional<Vector> solve_pattern(const FinancialNetwork& net,
                                    const std::vector<Branch>& branch,
                                    const std::vector<Interval>& box,
                                    const PatternOptions& opts, std::mt19937_64& rng,
                                    long& iterations_used) {
  const Index n = net.size();
  Vector mid(n);
  for (Index i = 0; i < n; ++i) {
    mid[i] = 0.5 * (box[static_cast<size_t>(i)].lo +
                    std::min(box[static_cast<size_t>(i)].hi, 1.0));
  }
  Vector candidate = mid;
  if (newton_pattern(net, branch, box, candidate, iterations_used) &&
      verify_pattern_solution(net, branch, candidate, opts.tol)) {
    return candidate;
  }
  std::uniform_real_distribution<Scalar> uni(0.0, 1.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    Vector r(n);
    for (Index i = 0; i < n; ++i) {
      const Interval& b = box[static_cast<size_t>(i)];
      r[i] = b.lo + uni(rng) * (std::min(b.hi, 1.0) - b.lo);
    }
    if (newton_pattern(net, branch, box, r, iterations_used) &&
        verify_pattern_solution(net, branch, r, opts.tol)) {
      return r;
    }
  }
  return iterate_pattern(net, branch, box, opts, rng, iterations_used);
}

}  // namespace

SolveReport enumerate_patterns(const FinancialNetwork& net, const PatternOptions& opts) {
  if (opts.cap < 0 || opts.cap > 30) {
    throw ValidationError("pattern cap must lie in [0, 30]");
  }
  const Index n = net.size();
  const PropagationModel model(net);

  PropagationState base;
  base.box.assign(static_cast<size_t>(n), Interval{0.0, 1.0});
  base.branch.assign(static_cast<size_t>(n), Branch::Unknown);
  for (const auto& [name, v] : opts.driven) {
    const Index i = net.index_of(name);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("driven value for bank '" + name + "' must lie in [0,1]");
    }
    base.box[static_cast<size_t>(i)] = Interval{v, v};
  }

  SolveReport report;
  propagate(model, base, opts.max_sweeps);
  if (base.contradiction) {
    report.status = SolveStatus::Infeasible;
    return report;
  }

  std::vector<Index> ambiguous;
  for (Index i = 0; i < n; ++i) {
    if (base.branch[static_cast<size_t>(i)] == Branch::Unknown) ambiguous.push_back(i);
  }
  const int m = static_cast<int>(ambiguous.size());
  if (m > opts.cap) {
    throw CapExceededError("pattern enumeration over " + std::to_string(m) +
                           " undetermined banks exceeds the cap of " +
                           std::to_string(opts.cap));
  }
  for (Index i : ambiguous) report.pattern_banks.push_back(net.bank_name(i));

  const std::uint64_t total = std::uint64_t{1} << m;
  report.pattern_verdicts.resize(total);
  std::atomic<long> iterations{0};

  auto evaluate_pattern = [&](std::uint64_t bits, long& local_iters) {
    PropagationState st = base;
    for (int b = 0; b < m; ++b) {
      st.branch[static_cast<size_t>(ambiguous[static_cast<size_t>(b)])] =
          (bits >> b) & 1 ? Branch::Solvent : Branch::Default;
    }
    propagate(model, st, opts.max_sweeps);
    PatternVerdict verdict;
    verdict.bits = static_cast<std::uint32_t>(bits);
    if (st.contradiction) {
      verdict.kind = PatternVerdict::Kind::Infeasible;
    } else {
      std::mt19937_64 rng(opts.seed ^ (0x9e3779b97f4a7c15ULL * (bits + 1)));
      auto solution = solve_pattern(net, st.branch, st.box, opts, rng, local_iters);
      if (solution.has_value()) {
        verdict.kind = PatternVerdict::Kind::SolutionFound;
        verdict.recovery = std::move(solution);
      } else {
        verdict.kind = PatternVerdict::Kind::Undecided;
      }
    }
    return verdict;
  };

  const int threads = std::max(1, opts.threads > 0 ? opts.threads : default_thread_count());
  if (opts.stop_at_first_solution) {
    long local_iters = 0;
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      PatternVerdict verdict = evaluate_pattern(bits, local_iters);
      const bool hit = verdict.kind == PatternVerdict::Kind::SolutionFound;
      report.pattern_verdicts[bits] = std::move(verdict);
      if (hit) {
        report.pattern_verdicts.resize(bits + 1);
        break;
      }
    }
    iterations += local_iters;
  } else if (threads == 1 || total <= 1) {
    long local_iters = 0;
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      report.pattern_verdicts[bits] = evaluate_pattern(bits, local_iters);
    }
    iterations += local_iters;
  } else {
    auto run_range = [&](std::uint64_t begin, std::uint64_t step) {
      long local_iters = 0;
      for (std::uint64_t bits = begin; bits < total; bits += step) {
        report.pattern_verdicts[bits] = evaluate_pattern(bits, local_iters);
      }
      iterations += local_iters;
    };
    std::vector<std::thread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back(run_range, static_cast<std::uint64_t>(t),
                           static_cast<std::uint64_t>(threads));
    }
    for (auto& w : workers) w.join();
  }
  report.iterations = iterations.load();

  bool all_infeasible = true;
  for (const PatternVerdict& v : report.pattern_verdicts) {
    if (v.kind == PatternVerdict::Kind::SolutionFound && !report.recovery.has_value()) {
      report.status = SolveStatus::Found;
      report.recovery = v.recovery;
      report.residual = inf_norm(update_F(net, *v.recovery) - *v.recovery);
    }
    if (v.kind != PatternVerdict::Kind::Infeasible) all_infeasible = false;
  }
  if (report.status != SolveStatus::Found) {
    report.status = all_infeasible ? SolveStatus::Infeasible : SolveStatus::Undecided;
  }
  return report;
}

}  // namespace cdsnet
