#include "cdsnet/gadgets.hpp"

#include <cmath>
#include <sstream>

namespace cdsnet {

NetworkFragment::NetworkFragment(Scalar alpha, Scalar beta) : alpha_(alpha), beta_(beta) {
  if (!(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0) ||
      !(std::isfinite(beta) && beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("alpha and beta must lie in [0,1]");
  }
}

std::string NetworkFragment::fresh(const std::string& kind) {
  return kind + std::to_string(counters_[kind]++);
}

std::string NetworkFragment::input(const std::string& name) {
  bank(name);
  pending_.insert(name);
  return name;
}

std::string NetworkFragment::bank(const std::string& name, Scalar external) {
  if (name.empty()) throw ValidationError("empty bank name");
  if (name == kSource || name == kSink) {
    throw ValidationError("bank names '" + std::string(kSource) + "' and '" +
                          std::string(kSink) + "' are reserved for the scaffolding");
  }
  if (has_bank(name)) throw ValidationError("duplicate bank '" + name + "'");
  if (!(std::isfinite(external) && external >= 0.0)) {
    throw ValidationError("external assets must be finite and nonnegative");
  }
  order_.push_back(name);
  external_[name] = external;
  return name;
}

void NetworkFragment::require_bank(const std::string& name) const {
  if (!has_bank(name)) throw ValidationError("unknown bank '" + name + "'");
}

void NetworkFragment::debt(const std::string& writer, const std::string& holder,
                           Scalar notional) {
  if (writer != kSource) require_bank(writer);
  if (holder != kSink) require_bank(holder);
  debts_.push_back({writer, holder, notional});
  contracted_.insert(writer);
  contracted_.insert(holder);
}

void NetworkFragment::cds(const std::string& writer, const std::string& holder,
                          const std::string& reference, Scalar notional) {
  if (writer != kSource) require_bank(writer);
  if (holder != kSink) require_bank(holder);
  require_bank(reference);
  cds_.push_back({writer, holder, reference, notional});
  contracted_.insert(writer);
  contracted_.insert(holder);
}

void NetworkFragment::source_debt(const std::string& holder, Scalar notional) {
  require_bank(holder);
  source_debts_.push_back({holder, notional});
  contracted_.insert(holder);
}

void NetworkFragment::source_cds(const std::string& holder, const std::string& reference,
                                 Scalar notional) {
  require_bank(holder);
  require_bank(reference);
  source_cds_.push_back({holder, reference, notional});
  contracted_.insert(holder);
}

std::string NetworkFragment::claim_or_create(const std::string& out, const std::string& fallback) {
  if (out.empty()) return bank(fallback);
  require_bank(out);
  if (contracted_.count(out) > 0) {
    throw ValidationError("bank '" + out + "' already has contracts and cannot be a gadget output");
  }
  pending_.erase(out);
  return out;
}

std::string NetworkFragment::inverter(const std::string& u, Scalar weight,
                                      const std::string& out) {
  require_bank(u);
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ValidationError("inverter weight must be positive");
  }
  const std::string v = claim_or_create(out, fresh("inv"));
  source_cds(v, u, weight);
  debt(v, kSink, 1.0);
  return v;
}

std::string NetworkFragment::constant(Scalar zeta, const std::string& out) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) {
    throw ValidationError("constant value must lie in [0,1]");
  }
  const std::string v = claim_or_create(out, fresh("const"));
  if (zeta > 0.0) source_debt(v, zeta);
  debt(v, kSink, 1.0);
  return v;
}

std::string NetworkFragment::sum(const std::string& u, const std::string& v,
                                 const std::string& out) {
  const std::string tag = fresh("sum");
  const std::string a = inverter(u, 1.0, bank(tag + "/A"));
  const std::string b = inverter(v, 1.0, bank(tag + "/B"));
  const std::string w = claim_or_create(out, tag + "/w");
  source_cds(w, a, 1.0);
  source_cds(w, b, 1.0);
  debt(w, kSink, 1.0);
  return w;
}

std::string NetworkFragment::difference(const std::string& u, const std::string& v,
                                        const std::string& out) {
  const std::string tag = fresh("diff");
  const std::string a = inverter(u, 1.0, bank(tag + "/A"));
  // b = [[ (1 - r_a) + (1 - r_v) ]]
  const std::string b = bank(tag + "/B");
  source_cds(b, a, 1.0);
  source_cds(b, v, 1.0);
  debt(b, kSink, 1.0);
  return inverter(b, 1.0, out);
}

std::string NetworkFragment::half_product(const std::string& u, const std::string& v,
                                          const std::string& out) {
  const std::string tag = fresh("half");
  const std::string a = inverter(u, 1.0, bank(tag + "/A"));
  const std::string b = inverter(v, 1.0, bank(tag + "/B"));
  // c collects r_u as assets against liabilities 1 + (1 - r_v) + (1 - r_b) = 2,
  // so r_c = r_u / 2 at clearing; the third liability is the CDS held by w,
  // whose payment r_c * (1 - r_b) = r_u r_v / 2 becomes the output.
  const std::string c = bank(tag + "/C");
  source_cds(c, a, 1.0);
  debt(c, kSink, 1.0);
  cds(c, kSink, v, 1.0);
  const std::string w = claim_or_create(out, tag + "/w");
  cds(c, w, b, 1.0);
  debt(w, kSink, 1.0);
  return w;
}

std::string NetworkFragment::product(const std::string& u, const std::string& v,
                                     const std::string& out) {
  const std::string h1 = half_product(u, v);
  const std::string h2 = half_product(u, v);
  return sum(h1, h2, out);
}

std::pair<std::string, std::string> NetworkFragment::input_pair(const std::string& u) {
  const std::string tag = fresh("in");
  std::string a = u;
  if (a.empty()) {
    a = bank(tag + "/u");
  } else {
    require_bank(a);
    if (contracted_.count(a) > 0) {
      throw ValidationError("bank '" + a + "' already has contracts and cannot become a free variable");
    }
    pending_.erase(a);
  }
  const std::string x = bank(tag + "/x");
  debt(a, x, 1.0);
  debt(x, a, 1.0);
  return {a, x};
}

std::string NetworkFragment::cutoff(const std::string& u, Scalar threshold_k,
                                    Scalar threshold_l, const std::string& out) {
  if (!(threshold_k >= 0.0 && threshold_k < threshold_l && threshold_l <= 1.0)) {
    throw ValidationError("cutoff thresholds must satisfy 0 <= K < L <= 1");
  }
  const std::string tag = fresh("cut");
  const std::string a =
      inverter(u, 1.0 / (1.0 - threshold_k), bank(tag + "/A"));
  return inverter(a, (1.0 - threshold_k) / (threshold_l - threshold_k), out);
}

std::string NetworkFragment::or_gate(const std::string& u, const std::string& v,
                                     const std::string& out) {
  const std::string cu = cutoff(u, 0.25, 0.75);
  const std::string cv = cutoff(v, 0.25, 0.75);
  return sum(cu, cv, out);
}

NetworkFragment::InfeasibilityHandles NetworkFragment::infeasibility(const std::string& u) {
  if (alpha_ >= 1.0) {
    throw ValidationError("infeasibility gadget requires alpha < 1");
  }
  if (beta_ < 1.0) {
    throw ValidationError("infeasibility gadget requires beta = 1");
  }
  require_bank(u);
  const std::string tag = fresh("inf");
  const std::string b = bank(tag + "/B", 4.0 / 5.0);
  debt(b, kSink, 1.0);
  const Scalar k = (3.0 * alpha_ + 1.0) / 4.0;
  const Scalar l = (alpha_ + 3.0) / 4.0;
  const std::string c = cutoff(b, k, l);
  const std::string a = or_gate(u, c);
  source_cds(b, a, 1.0);
  return {a, b, c};
}

std::string NetworkFragment::discontinuity(const std::string& u, const std::string& out) {
  require_bank(u);
  const std::string v = claim_or_create(out, fresh("disc"));
  external_[v] = 1.0;
  source_cds(v, u, 1.0);
  debt(v, kSink, 2.0);
  return v;
}

std::string NetworkFragment::nand_gate(const std::string& u, const std::string& v,
                                       const ReductionConstants& k, const std::string& out) {
  require_bank(u);
  require_bank(v);
  const std::string w = claim_or_create(out, fresh("nand"));
  source_cds(w, u, k.c1());
  source_cds(w, v, k.c2());
  debt(w, kSink, 1.0);
  return w;
}

NetworkFragment::PurifyOutputs NetworkFragment::purify_gate(const std::string& u,
                                                            const ReductionConstants& k,
                                                            const std::string& v_out,
                                                            const std::string& w_out) {
  require_bank(u);
  const std::string tag = fresh("pur");
  const std::string a = inverter(u, 1.0 / (1.0 - k.phi), bank(tag + "/A"));
  const std::string v = inverter(a, 1.0 / (1.0 - k.gamma), v_out);
  const std::string b = inverter(u, 1.0 / (1.0 - k.gamma), bank(tag + "/B"));
  const std::string w = inverter(b, 1.0 / (1.0 - k.eta()), w_out);
  return {v, w};
}

void NetworkFragment::drive(const std::string& input_bank, Scalar value) {
  require_bank(input_bank);
  if (contracted_.count(input_bank) > 0) {
    throw ValidationError("bank '" + input_bank + "' already has contracts and cannot be driven");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError("driven value must lie in [0,1]");
  }
  if (value > 0.0) source_debt(input_bank, value);
  debt(input_bank, kSink, 1.0);
  pending_.erase(input_bank);
}

FinancialNetwork NetworkFragment::finalize() const {
  if (!pending_.empty()) {
    std::ostringstream msg;
    msg << "fragment has undriven input banks:";
    for (const std::string& p : pending_) msg << " '" << p << "'";
    throw ValidationError(msg.str());
  }

  std::vector<std::string> names = order_;
  names.push_back(kSource);
  names.push_back(kSink);
  const Index n = static_cast<Index>(names.size());
  const Index source = n - 2;
  const Index sink = n - 1;

  std::unordered_map<std::string, Index> idx;
  for (Index i = 0; i < n; ++i) idx[names[static_cast<size_t>(i)]] = i;
  auto resolve = [&](const std::string& name) { return idx.at(name); };

  std::vector<DebtContract> debts;
  std::vector<CdsContract> cds;
  Scalar source_written = 1.0;  // the unit debt to the sink
  for (const auto& d : debts_) {
    debts.push_back({resolve(d.writer), resolve(d.holder), d.notional});
  }
  for (const auto& c : cds_) {
    cds.push_back({resolve(c.writer), resolve(c.holder), resolve(c.reference), c.notional});
  }
  for (const auto& d : source_debts_) {
    debts.push_back({source, resolve(d.first), d.second});
    source_written += d.second;
  }
  for (const auto& c : source_cds_) {
    cds.push_back({source, resolve(c.holder), resolve(c.reference), c.notional});
    source_written += c.notional;
  }
  debts.push_back({source, sink, 1.0});

  Vector external = Vector::Zero(n);
  for (Index i = 0; i < n - 2; ++i) {
    external[i] = external_.at(names[static_cast<size_t>(i)]);
  }
  external[source] = 2.0 * source_written;
  external[sink] = 1.0;

  FinancialNetwork net(std::move(names), std::move(external), std::move(debts),
                       std::move(cds), alpha_, beta_);
  if (!is_nondegenerate(net)) {
    throw ValidationError("finalized fragment is degenerate; some bank neither holds "
                          "external assets nor writes a debt");
  }
  return net;
}

}  // namespace cdsnet
