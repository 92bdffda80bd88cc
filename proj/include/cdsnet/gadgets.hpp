#pragma once

#include "cdsnet/constants.hpp"
#include "cdsnet/network.hpp"
#include "cdsnet/types.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cdsnet {

/// A partially built financial network with named bank handles.
///
/// Gadget methods append banks and contracts and return the names of the
/// output banks they created; those names feed directly into further gadget
/// calls, so fragments compose by chaining. Undriven inputs are declared
/// with input() and must be driven or claimed as some gadget's output
/// before finalize().
///
/// finalize() closes the fragment with the shared scaffolding: one source
/// bank "s" that writes every source-side contract, endowed with twice its
/// total written notionals so it can never default, and one sink bank "t"
/// with unit external assets. The source also owes the sink a unit debt.
/// Every bank a gadget introduces owes something, so finalized networks are
/// non-degenerate by construction.
class NetworkFragment {
 public:
  explicit NetworkFragment(Scalar alpha = 1.0, Scalar beta = 1.0);

  static constexpr const char* kSource = "s";
  static constexpr const char* kSink = "t";

  Scalar alpha() const { return alpha_; }
  Scalar beta() const { return beta_; }

  /// Declare a bank expected to be wired up later.
  std::string input(const std::string& name);
  /// Declare a bank with the given external assets.
  std::string bank(const std::string& name, Scalar external = 0.0);

  void debt(const std::string& writer, const std::string& holder, Scalar notional);
  void cds(const std::string& writer, const std::string& holder,
           const std::string& reference, Scalar notional);
  /// Contract written by the shared source bank.
  void source_debt(const std::string& holder, Scalar notional);
  void source_cds(const std::string& holder, const std::string& reference, Scalar notional);

  // --- gate and arithmetic gadgets -----------------------------------
  // Each returns the output bank name; pass `out` to claim a previously
  // declared input bank as the output instead of creating a fresh one.

  /// r_out = min(1, weight * (1 - r_u)).
  std::string inverter(const std::string& u, Scalar weight, const std::string& out = "");
  /// r_out = zeta at every clearing vector, for any alpha.
  std::string constant(Scalar zeta, const std::string& out = "");
  /// r_out = [[r_u + r_v]].
  std::string sum(const std::string& u, const std::string& v, const std::string& out = "");
  /// r_out = [[r_v - r_u]]; note the order.
  std::string difference(const std::string& u, const std::string& v, const std::string& out = "");
  /// r_out = r_u r_v / 2.
  std::string half_product(const std::string& u, const std::string& v, const std::string& out = "");
  /// r_out = r_u r_v, two half products feeding a sum.
  std::string product(const std::string& u, const std::string& v, const std::string& out = "");
  /// Two banks owing each other a unit debt; the clearing solutions are
  /// exactly r_u = r_x = t for every t in [0,1], modeling a free variable.
  /// Pass an existing input bank as `u` to attach the free value to it.
  std::pair<std::string, std::string> input_pair(const std::string& u = "");
  /// r_u <= K forces r_out = 0 and r_u >= L forces r_out = 1.
  std::string cutoff(const std::string& u, Scalar threshold_k, Scalar threshold_l,
                     const std::string& out = "");
  /// Both inputs <= 1/4 force 0; either input >= 3/4 forces 1.
  std::string or_gate(const std::string& u, const std::string& v, const std::string& out = "");

  struct InfeasibilityHandles {
    std::string or_output;   ///< bank A, the or-gate output
    std::string middle;      ///< bank B, endowed with 4/5 and owing 1
    std::string cut_output;  ///< bank C, the cutoff output feeding the or-gate
  };
  /// Gadget with input u such that a clearing vector exists when r_u >= 3/4
  /// and none exists when r_u <= 1/4. Requires alpha < 1 and beta = 1 on
  /// the enclosing fragment.
  InfeasibilityHandles infeasibility(const std::string& u);

  /// r_u = 0 gives r_out = 1; r_u > 0 gives r_out = (alpha + 1 - r_u) / 2.
  std::string discontinuity(const std::string& u, const std::string& out = "");

  /// Gate gadget: r_out = [[ (1 - r_u) c1 + (1 - r_v) c2 ]] at exact
  /// clearing; approximately clearing vectors decode to a valid NAND.
  std::string nand_gate(const std::string& u, const std::string& v,
                        const ReductionConstants& k, const std::string& out = "");

  struct PurifyOutputs {
    std::string v;
    std::string w;
  };
  /// Gate gadget guaranteeing one pure output; four chained inverters.
  PurifyOutputs purify_gate(const std::string& u, const ReductionConstants& k,
                            const std::string& v_out = "", const std::string& w_out = "");

  /// Pin an undriven input bank to a constant value in [0,1].
  void drive(const std::string& input_bank, Scalar value);

  bool has_bank(const std::string& name) const { return external_.count(name) > 0; }
  const std::vector<std::string>& bank_order() const { return order_; }

  /// Close the fragment and build the validated network. Bank order is
  /// creation order with the source and sink appended last.
  FinancialNetwork finalize() const;

 private:
  std::string fresh(const std::string& kind);
  std::string claim_or_create(const std::string& out, const std::string& fallback);
  void require_bank(const std::string& name) const;

  Scalar alpha_;
  Scalar beta_;
  std::vector<std::string> order_;
  std::map<std::string, Scalar> external_;
  std::set<std::string> pending_;    // declared inputs not yet wired
  std::set<std::string> contracted_; // banks appearing as writer or holder
  std::map<std::string, int> counters_;
  struct NamedDebt { std::string writer, holder; Scalar notional; };
  struct NamedCds { std::string writer, holder, reference; Scalar notional; };
  std::vector<NamedDebt> debts_;
  std::vector<NamedCds> cds_;
  std::vector<std::pair<std::string, Scalar>> source_debts_;
  struct SourceCds { std::string holder, reference; Scalar notional; };
  std::vector<SourceCds> source_cds_;
};

}  // namespace cdsnet
