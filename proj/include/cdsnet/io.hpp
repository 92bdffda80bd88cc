#pragma once

#include "cdsnet/network.hpp"
#include "cdsnet/pure_circuit.hpp"
#include "cdsnet/reductions.hpp"
#include "cdsnet/types.hpp"

#include <string>

namespace cdsnet {

/// Malformed or inconsistent document.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// JSON documents. Serialization emits the shortest decimal that parses back
// to the same double, so round trips are bit-exact.

FinancialNetwork parse_network(const std::string& text);
std::string serialize_network(const FinancialNetwork& net);

PureCircuit parse_circuit(const std::string& text);
std::string serialize_circuit(const PureCircuit& circuit);

SparsePolynomial parse_polynomial(const std::string& text);
std::string serialize_polynomial(const SparsePolynomial& p);

/// Sidecar describing how to interpret a compiled network: wire map,
/// constants, pipeline metadata, and the source circuit when present.
/// parse_artifact rebuilds the artifact against the given network.
std::string serialize_artifact_sidecar(const CompiledArtifact& artifact);
CompiledArtifact parse_artifact_sidecar(const std::string& text, FinancialNetwork network);

struct DotOptions {
  /// Drop the source-to-sink scaffolding debt and the scaffolding asset
  /// labels, matching the usual drawing convention.
  bool hide_scaffolding = false;
};

/// Graphviz text: debt contracts as solid blue arcs labeled by notional,
/// CDSs as dashed orange arcs labeled by notional and reference bank,
/// external assets in the node labels.
std::string export_dot(const FinancialNetwork& net, const DotOptions& opts = {});

// Whitespace-separated decimals in bank declaration order.
Vector parse_recovery_vector(const std::string& text, const FinancialNetwork& net);
std::string format_recovery_vector(const Vector& r);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace cdsnet
