#include "cdsnet/pure_circuit.hpp"

#include <algorithm>
#include <cmath>

namespace cdsnet {

const char* to_string(TriValue v) {
  switch (v) {
    case TriValue::Zero: return "0";
    case TriValue::One: return "1";
    case TriValue::Bot: return "⊥";
  }
  return "?";
}

DecodingParams DecodingParams::defaults() {
  const Scalar root6 = std::sqrt(6.0);
  return DecodingParams{3.0 - root6, 5.0 - 2.0 * root6};
}

TriValue dec(Scalar r, const DecodingParams& params) {
  if (!(params.gamma >= 0.0 && params.delta >= 0.0 && params.gamma + params.delta < 1.0)) {
    throw ValidationError("decoding thresholds must satisfy gamma, delta >= 0 and gamma + delta < 1");
  }
  if (r <= params.gamma) return TriValue::Zero;
  if (r >= 1.0 - params.delta) return TriValue::One;
  return TriValue::Bot;
}

bool check_nand(TriValue u, TriValue v, TriValue w) {
  if (u == TriValue::One && v == TriValue::One && w != TriValue::Zero) return false;
  if ((u == TriValue::Zero || v == TriValue::Zero) && w != TriValue::One) return false;
  return true;
}

bool check_purify(TriValue u, TriValue v, TriValue w) {
  if (u != TriValue::Bot && (v != u || w != u)) return false;
  return v != TriValue::Bot || w != TriValue::Bot;
}

void PureCircuit::add_wire(const std::string& name) {
  if (name.empty()) throw ValidationError("empty wire name");
  if (has_wire(name)) throw ValidationError("duplicate wire '" + name + "'");
  wires_.push_back(name);
  produced_[name] = false;
}

bool PureCircuit::has_wire(const std::string& name) const {
  return produced_.count(name) > 0;
}

void PureCircuit::require_wire(const std::string& name) const {
  if (!has_wire(name)) throw ValidationError("unknown wire '" + name + "'");
}

void PureCircuit::claim_output(const std::string& name) {
  require_wire(name);
  if (produced_[name]) {
    throw ValidationError("wire '" + name + "' is already the output of another gate");
  }
  produced_[name] = true;
}

void PureCircuit::add_nand(const std::string& u, const std::string& v, const std::string& w) {
  require_wire(u);
  require_wire(v);
  claim_output(w);
  gates_.push_back(Gate{GateKind::Nand, {u, v}, {w}});
}

void PureCircuit::add_purify(const std::string& u, const std::string& v, const std::string& w) {
  require_wire(u);
  if (v == w) throw ValidationError("purify outputs must be distinct wires");
  claim_output(v);
  claim_output(w);
  gates_.push_back(Gate{GateKind::Purify, {u}, {v, w}});
}

std::vector<std::string> PureCircuit::free_wires() const {
  std::vector<std::string> out;
  for (const std::string& w : wires_) {
    if (!produced_.at(w)) out.push_back(w);
  }
  return out;
}

namespace {

bool gate_satisfied(const Gate& gate, const Assignment& a) {
  if (gate.kind == GateKind::Nand) {
    return check_nand(a.at(gate.inputs[0]), a.at(gate.inputs[1]), a.at(gate.outputs[0]));
  }
  return check_purify(a.at(gate.inputs[0]), a.at(gate.outputs[0]), a.at(gate.outputs[1]));
}

}  // namespace

bool is_solution(const PureCircuit& circuit, const Assignment& assignment) {
  for (const std::string& w : circuit.wires()) {
    if (assignment.count(w) == 0) {
      throw ValidationError("assignment is missing wire '" + w + "'");
    }
  }
  return std::all_of(circuit.gates().begin(), circuit.gates().end(),
                     [&](const Gate& g) { return gate_satisfied(g, assignment); });
}

Assignment brute_solve(const PureCircuit& circuit, int wire_cap) {
  const auto& wires = circuit.wires();
  const int n = static_cast<int>(wires.size());
  if (n > wire_cap) {
    throw CapExceededError("circuit has " + std::to_string(n) + " wires, exhaustive cap is " +
                           std::to_string(wire_cap));
  }
  static constexpr TriValue kOrder[3] = {TriValue::Zero, TriValue::One, TriValue::Bot};
  std::vector<int> digits(static_cast<size_t>(n), 0);
  Assignment a;
  while (true) {
    for (int i = 0; i < n; ++i) {
      a[wires[static_cast<size_t>(i)]] = kOrder[digits[static_cast<size_t>(i)]];
    }
    if (is_solution(circuit, a)) return a;
    int pos = n - 1;
    while (pos >= 0 && digits[static_cast<size_t>(pos)] == 2) {
      digits[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++digits[static_cast<size_t>(pos)];
  }
  throw ValidationError("no satisfying assignment found; malformed circuit instance");
}

}  // namespace cdsnet
