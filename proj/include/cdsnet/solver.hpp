#pragma once

#include "cdsnet/network.hpp"
#include "cdsnet/types.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cdsnet {

enum class SolveStatus { Found, NotFound, Infeasible, Undecided };

const char* to_string(SolveStatus status);

/// One solvency pattern over the banks whose status interval analysis could
/// not decide: bit b set means the b-th such bank is asserted solvent
/// (recovery 1), clear means asserted in default.
struct PatternVerdict {
  enum class Kind { SolutionFound, Infeasible, Undecided };
  std::uint32_t bits = 0;
  Kind kind = Kind::Undecided;
  std::optional<Vector> recovery;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NotFound;
  std::optional<Vector> recovery;
  /// ||update_F(r) - r||_inf at the reported point; for unsuccessful
  /// searches, the best residual seen.
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  long iterations = 0;
  /// Banks enumerated by pattern bits, in bank order (pattern methods only).
  std::vector<std::string> pattern_banks;
  std::vector<PatternVerdict> pattern_verdicts;
};

struct IterateOptions {
  Scalar damping = 0.5;  ///< in (0, 1]; r <- (1-d) r + d F(r)
  long max_iter = 10000;
  Scalar tol = 1e-9;
  /// Steps the iteration must stay within tol before a candidate counts as
  /// converged. Orbits grazing a branch discontinuity reach small residuals
  /// transiently without any fixed point nearby; the window rejects those.
  long confirmation_window = 256;
};

/// Damped fixed-point iteration of the clearing update from r0. Status is
/// Found only when the residual meets tol, stays within tol over the
/// confirmation window, and the point re-checks as clearing; iteration need
/// not converge, in which case NotFound reports the best residual.
SolveReport iterate_F(const FinancialNetwork& net, const Vector& r0,
                      const IterateOptions& opts = {});
/// Same, started from the all-ones vector.
SolveReport iterate_F(const FinancialNetwork& net, const IterateOptions& opts = {});

/// Auxiliary update on [0, 1+eps]^n whose value is 1+eps for banks whose
/// assets cover (1+eps) times their liabilities at the truncated point, and
/// the asset/liability ratio otherwise. Both maps depend on r only through
/// its truncation. Require alpha = beta = 1 and a non-degenerate network.
Vector map_G(const FinancialNetwork& net, const Vector& r, Scalar eps);
/// Continuous companion: g(r)_i = a_i([[r]]) / max(a_i([[r]])/(1+eps), l_i([[r]])).
Vector map_g(const FinancialNetwork& net, const Vector& r, Scalar eps);

struct ApproxOptions {
  int restarts = 64;
  long max_iter = 10000;
  std::uint64_t seed = 1;
  /// Stop a restart early after this many iterations without residual
  /// improvement.
  long stall_limit = 1500;
  /// When the iterative search exhausts its budget, fall back to solvency
  /// pattern enumeration (an exact clearing vector is eps-approximately
  /// clearing for every eps). Compiled circuits can contain positive-gain
  /// feedback loops whose fixed points repel damped iteration at every step
  /// size; the exact stage still finds those. Skipped when more than
  /// fallback_cap banks stay undetermined.
  bool exact_fallback = true;
  int fallback_cap = 18;
};

/// Searches for an eps-almost fixed point of map_g by damped iteration with
/// random restarts, then truncates it to a recovery vector. Status is Found
/// only when the truncation passes is_eps_approx_clearing.
SolveReport solve_eps_approx(const FinancialNetwork& net, Scalar eps,
                             const ApproxOptions& opts = {});

struct PatternOptions {
  Scalar tol = 1e-9;
  /// Maximum number of banks left ambiguous after interval presolve; the
  /// enumeration is exponential in this count.
  int cap = 16;
  int max_sweeps = 400;
  long max_iter = 20000;
  int random_starts = 2;
  std::uint64_t seed = 1;
  /// Pin these banks to fixed recovery values before solving.
  std::map<std::string, Scalar> driven;
  /// Worker threads; 0 reads the CDSNET_THREADS environment variable.
  int threads = 0;
  /// Stop scanning once some pattern yields a solution; the verdict list
  /// then covers only the patterns scanned before the hit. Infeasible
  /// verdicts still require the full scan. Forces single-threaded scanning
  /// so the reported solution stays deterministic.
  bool stop_at_first_solution = false;
};

/// Exhaustive case analysis over solvency patterns. Interval bound
/// propagation first pins every bank whose branch is forced; each
/// assignment of the remaining banks is then either contradicted
/// (provably no clearing vector selects those branches), solved, or left
/// undecided. Overall status is Infeasible only when every pattern is
/// contradicted, Found when some pattern yields a verified clearing vector
/// (the lowest-bits pattern wins ties), Undecided otherwise.
SolveReport enumerate_patterns(const FinancialNetwork& net, const PatternOptions& opts = {});

/// Evaluates the unique recovery values of banks whose assets and
/// liabilities depend only on driven banks and banks evaluated before them.
/// Banks endowed beyond their total written notionals are solvent
/// regardless of the rest and evaluate first. Throws CyclicDependencyError
/// when no such order covers all banks.
Vector forward_eval(const FinancialNetwork& net, const std::map<std::string, Scalar>& driven);

/// Partial variant: evaluates the feed-forward prefix and reports which
/// banks were resolved, never throwing on cycles.
std::pair<Vector, std::vector<bool>> forward_eval_partial(
    const FinancialNetwork& net, const std::map<std::string, Scalar>& driven);

/// Worker count from the CDSNET_THREADS environment variable, default 1.
int default_thread_count();

}  // namespace cdsnet
