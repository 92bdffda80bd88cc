#pragma once

#include "cdsnet/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace cdsnet {

/// Tri-valued wire domain: the two pure bits plus the garbage value.
enum class TriValue : unsigned char { Zero, One, Bot };

const char* to_string(TriValue v);

/// Thresholds of the decoding function from [0,1] to {0, 1, bot}:
/// [0, gamma] reads as 0, [1 - delta, 1] reads as 1, the open interval
/// between as garbage. Requires gamma, delta >= 0 and gamma + delta < 1.
struct DecodingParams {
  Scalar gamma;
  Scalar delta;

  /// gamma = 3 - sqrt(6), delta = 5 - 2 sqrt(6). These maximize the
  /// tolerance the NAND gadget can absorb; delta * (c1 + c2) + eps = gamma
  /// holds with equality for the matching gadget notionals.
  static DecodingParams defaults();
};

TriValue dec(Scalar r, const DecodingParams& params = DecodingParams::defaults());

/// NAND over {0, 1, bot}: satisfied iff (u = 1 and v = 1 implies w = 0)
/// and (u = 0 or v = 0 implies w = 1).
bool check_nand(TriValue u, TriValue v, TriValue w);

/// PURIFY over {0, 1, bot}: satisfied iff a pure input is copied to both
/// outputs and at least one output is always pure.
bool check_purify(TriValue u, TriValue v, TriValue w);

enum class GateKind : unsigned char { Nand, Purify };

struct Gate {
  GateKind kind;
  std::vector<std::string> inputs;   // NAND: {u, v}; PURIFY: {u}
  std::vector<std::string> outputs;  // NAND: {w};    PURIFY: {v, w}
};

/// A circuit of NAND and PURIFY gates over named wires. There are no
/// designated circuit inputs or outputs and cycles are allowed; a wire may
/// feed any number of gate inputs but is produced by at most one gate.
/// Finding an assignment satisfying every gate is a constraint satisfaction
/// problem with a guaranteed solution.
class PureCircuit {
 public:
  PureCircuit() = default;

  void add_wire(const std::string& name);
  void add_nand(const std::string& u, const std::string& v, const std::string& w);
  void add_purify(const std::string& u, const std::string& v, const std::string& w);

  const std::vector<std::string>& wires() const { return wires_; }
  const std::vector<Gate>& gates() const { return gates_; }
  bool has_wire(const std::string& name) const;
  /// Wires that are not the output of any gate; free to take any value.
  std::vector<std::string> free_wires() const;

 private:
  void require_wire(const std::string& name) const;
  void claim_output(const std::string& name);

  std::vector<std::string> wires_;
  std::vector<Gate> gates_;
  std::map<std::string, bool> produced_;
};

using Assignment = std::map<std::string, TriValue>;

/// True iff the assignment is total on the circuit's wires and every gate
/// check passes. Throws ValidationError on a partial assignment.
bool is_solution(const PureCircuit& circuit, const Assignment& assignment);

/// Exhaustive search over all 3^w assignments, wires in declaration order,
/// values tried in the order Zero, One, Bot; returns the first satisfying
/// assignment. Throws CapExceededError when the circuit has more than
/// `wire_cap` wires.
Assignment brute_solve(const PureCircuit& circuit, int wire_cap = 12);

}  // namespace cdsnet
