#include "cdsnet/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cdsnet {

namespace {

using Json = nlohmann::ordered_json;

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

// Runs a parser body, translating JSON access errors into IoError.
template <typename Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed ") + what + " document: " + e.what());
  }
}

const Json& field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw IoError(std::string("missing field '") + name + "'");
  }
  return *it;
}

Scalar number_field(const Json& obj, const char* name) {
  const Json& f = field(obj, name);
  if (!f.is_number()) throw IoError(std::string("field '") + name + "' must be a number");
  return f.get<Scalar>();
}

std::string string_field(const Json& obj, const char* name) {
  const Json& f = field(obj, name);
  if (!f.is_string()) throw IoError(std::string("field '") + name + "' must be a string");
  return f.get<std::string>();
}

std::string format_number(Scalar x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

FinancialNetwork parse_network_doc(const Json& doc) {
  if (!doc.is_object()) throw IoError("network document must be a JSON object");

  std::vector<std::string> names;
  std::unordered_map<std::string, Index> index;
  std::vector<Scalar> external;
  for (const Json& bank : field(doc, "banks")) {
    const std::string id = string_field(bank, "id");
    if (index.count(id) > 0) throw IoError("duplicate bank '" + id + "'");
    index[id] = static_cast<Index>(names.size());
    names.push_back(id);
    external.push_back(bank.contains("external") ? number_field(bank, "external") : 0.0);
  }
  auto resolve = [&](const Json& obj, const char* key) {
    const std::string id = string_field(obj, key);
    auto it = index.find(id);
    if (it == index.end()) {
      throw IoError(std::string("contract field '") + key + "' names undeclared bank '" + id +
                    "'");
    }
    return it->second;
  };

  std::vector<DebtContract> debts;
  if (doc.contains("debts")) {
    for (const Json& d : doc["debts"]) {
      debts.push_back({resolve(d, "from"), resolve(d, "to"), number_field(d, "notional")});
    }
  }
  std::vector<CdsContract> cds;
  if (doc.contains("cds")) {
    for (const Json& c : doc["cds"]) {
      cds.push_back({resolve(c, "from"), resolve(c, "to"), resolve(c, "reference"),
                     number_field(c, "notional")});
    }
  }
  const Scalar alpha = doc.contains("alpha") ? number_field(doc, "alpha") : 1.0;
  const Scalar beta = doc.contains("beta") ? number_field(doc, "beta") : 1.0;

  Vector e(static_cast<Index>(external.size()));
  for (size_t i = 0; i < external.size(); ++i) e[static_cast<Index>(i)] = external[i];
  try {
    return FinancialNetwork(std::move(names), std::move(e), std::move(debts), std::move(cds),
                            alpha, beta);
  } catch (const ValidationError& err) {
    throw IoError(std::string("invalid network: ") + err.what());
  }
}

PureCircuit parse_circuit_doc(const Json& doc) {
  PureCircuit circuit;
  try {
    for (const Json& w : field(doc, "wires")) {
      if (!w.is_string()) throw IoError("wire names must be strings");
      circuit.add_wire(w.get<std::string>());
    }
    for (const Json& g : field(doc, "gates")) {
      const std::string kind = string_field(g, "kind");
      const Json& inputs = field(g, "inputs");
      const Json& outputs = field(g, "outputs");
      if (kind == "NAND") {
        if (inputs.size() != 2 || outputs.size() != 1) {
          throw IoError("NAND gate takes 2 inputs and 1 output");
        }
        circuit.add_nand(inputs[0].get<std::string>(), inputs[1].get<std::string>(),
                         outputs[0].get<std::string>());
      } else if (kind == "PURIFY") {
        if (inputs.size() != 1 || outputs.size() != 2) {
          throw IoError("PURIFY gate takes 1 input and 2 outputs");
        }
        circuit.add_purify(inputs[0].get<std::string>(), outputs[0].get<std::string>(),
                           outputs[1].get<std::string>());
      } else {
        throw IoError("unknown gate kind '" + kind + "'");
      }
    }
  } catch (const ValidationError& err) {
    throw IoError(std::string("invalid circuit: ") + err.what());
  }
  return circuit;
}

SparsePolynomial parse_polynomial_doc(const Json& doc) {
  const Json& vars = field(doc, "vars");
  if (!vars.is_number_integer()) throw IoError("field 'vars' must be an integer");
  const int var_count = vars.get<int>();
  std::vector<Monomial> monomials;
  for (const Json& m : field(doc, "monomials")) {
    Monomial mono;
    for (const Json& e : field(m, "exponents")) {
      if (!e.is_number_integer()) throw IoError("exponents must be integers");
      mono.exponents.push_back(e.get<int>());
    }
    mono.coefficient = number_field(m, "coefficient");
    monomials.push_back(std::move(mono));
  }
  try {
    return SparsePolynomial(var_count, std::move(monomials));
  } catch (const ValidationError& err) {
    throw IoError(std::string("invalid polynomial: ") + err.what());
  }
}

CompiledArtifact parse_sidecar_doc(const Json& doc, FinancialNetwork network) {
  CompiledArtifact artifact{std::move(network), ReductionConstants::defaults(), 1.0, 0,
                            {}, std::nullopt, {}, {}, {}, {}};
  if (doc.contains("constants")) {
    const Json& k = doc["constants"];
    artifact.constants.gamma = number_field(k, "gamma");
    artifact.constants.eps = number_field(k, "eps");
    artifact.constants.delta = number_field(k, "delta");
    artifact.constants.phi = number_field(k, "phi");
  }
  if (doc.contains("alpha")) artifact.alpha = number_field(doc, "alpha");
  if (doc.contains("squaring_depth")) artifact.squaring_depth = doc["squaring_depth"].get<int>();
  if (doc.contains("wire_map")) {
    for (const auto& [wire, bank] : doc["wire_map"].items()) {
      const std::string bank_name = bank.get<std::string>();
      if (!artifact.network.has_bank(bank_name)) {
        throw IoError("wire map names undeclared bank '" + bank_name + "'");
      }
      artifact.wire_map[wire] = bank_name;
    }
  }
  if (doc.contains("circuit")) {
    artifact.circuit = parse_circuit_doc(doc["circuit"]);
  }
  if (doc.contains("variables")) {
    for (const Json& v : doc["variables"]) {
      artifact.variable_banks.push_back(v.get<std::string>());
    }
  }
  if (doc.contains("output")) artifact.output_bank = string_field(doc, "output");
  if (doc.contains("target")) artifact.target_bank = string_field(doc, "target");
  if (doc.contains("tail_input")) artifact.tail_input_bank = string_field(doc, "tail_input");
  return artifact;
}

}  // namespace

FinancialNetwork parse_network(const std::string& text) {
  const Json doc = parse_json(text);
  return guarded("network", [&] { return parse_network_doc(doc); });
}

std::string serialize_network(const FinancialNetwork& net) {
  Json doc;
  doc["alpha"] = net.alpha();
  doc["beta"] = net.beta();
  doc["banks"] = Json::array();
  for (Index i = 0; i < net.size(); ++i) {
    Json bank;
    bank["id"] = net.bank_name(i);
    bank["external"] = net.external_assets()[i];
    doc["banks"].push_back(bank);
  }
  doc["debts"] = Json::array();
  for (const DebtContract& d : net.debts()) {
    Json obj;
    obj["from"] = net.bank_name(d.writer);
    obj["to"] = net.bank_name(d.holder);
    obj["notional"] = d.notional;
    doc["debts"].push_back(obj);
  }
  doc["cds"] = Json::array();
  for (const CdsContract& c : net.cds()) {
    Json obj;
    obj["from"] = net.bank_name(c.writer);
    obj["to"] = net.bank_name(c.holder);
    obj["reference"] = net.bank_name(c.reference);
    obj["notional"] = c.notional;
    doc["cds"].push_back(obj);
  }
  return doc.dump(2) + "\n";
}

PureCircuit parse_circuit(const std::string& text) {
  const Json doc = parse_json(text);
  return guarded("circuit", [&] { return parse_circuit_doc(doc); });
}

std::string serialize_circuit(const PureCircuit& circuit) {
  Json doc;
  doc["wires"] = circuit.wires();
  doc["gates"] = Json::array();
  for (const Gate& g : circuit.gates()) {
    Json obj;
    obj["kind"] = g.kind == GateKind::Nand ? "NAND" : "PURIFY";
    obj["inputs"] = g.inputs;
    obj["outputs"] = g.outputs;
    doc["gates"].push_back(obj);
  }
  return doc.dump(2) + "\n";
}

SparsePolynomial parse_polynomial(const std::string& text) {
  const Json doc = parse_json(text);
  return guarded("polynomial", [&] { return parse_polynomial_doc(doc); });
}

std::string serialize_polynomial(const SparsePolynomial& p) {
  Json doc;
  doc["vars"] = p.var_count();
  doc["monomials"] = Json::array();
  for (const Monomial& m : p.monomials()) {
    Json obj;
    obj["exponents"] = m.exponents;
    obj["coefficient"] = m.coefficient;
    doc["monomials"].push_back(obj);
  }
  return doc.dump(2) + "\n";
}

std::string serialize_artifact_sidecar(const CompiledArtifact& artifact) {
  Json doc;
  doc["kind"] = artifact.circuit.has_value()
                    ? "circuit"
                    : (!artifact.target_bank.empty()      ? "cansurvive"
                       : !artifact.tail_input_bank.empty() ? "hasclearing"
                                                           : "polynomial");
  Json constants;
  constants["gamma"] = artifact.constants.gamma;
  constants["eps"] = artifact.constants.eps;
  constants["delta"] = artifact.constants.delta;
  constants["phi"] = artifact.constants.phi;
  doc["constants"] = constants;
  doc["alpha"] = artifact.alpha;
  doc["squaring_depth"] = artifact.squaring_depth;
  if (!artifact.wire_map.empty()) {
    Json wires;
    for (const auto& [wire, bank] : artifact.wire_map) wires[wire] = bank;
    doc["wire_map"] = wires;
  }
  if (artifact.circuit.has_value()) {
    doc["circuit"] = Json::parse(serialize_circuit(*artifact.circuit));
  }
  if (!artifact.variable_banks.empty()) doc["variables"] = artifact.variable_banks;
  if (!artifact.output_bank.empty()) doc["output"] = artifact.output_bank;
  if (!artifact.target_bank.empty()) doc["target"] = artifact.target_bank;
  if (!artifact.tail_input_bank.empty()) doc["tail_input"] = artifact.tail_input_bank;
  return doc.dump(2) + "\n";
}

CompiledArtifact parse_artifact_sidecar(const std::string& text, FinancialNetwork network) {
  const Json doc = parse_json(text);
  return guarded("sidecar", [&] { return parse_sidecar_doc(doc, std::move(network)); });
}

std::string export_dot(const FinancialNetwork& net, const DotOptions& opts) {
  auto is_scaffolding = [&](Index i) {
    const std::string& name = net.bank_name(i);
    return name == "s" || name == "t";
  };
  std::ostringstream out;
  out << "digraph financial_network {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=circle];\n";
  for (Index i = 0; i < net.size(); ++i) {
    out << "  \"" << net.bank_name(i) << "\" [label=\"" << net.bank_name(i);
    if (!(opts.hide_scaffolding && is_scaffolding(i))) {
      out << "\\ne=" << format_number(net.external_assets()[i]);
    }
    out << "\"];\n";
  }
  for (const DebtContract& d : net.debts()) {
    if (opts.hide_scaffolding && is_scaffolding(d.writer) && is_scaffolding(d.holder)) {
      continue;
    }
    out << "  \"" << net.bank_name(d.writer) << "\" -> \"" << net.bank_name(d.holder)
        << "\" [label=\"" << format_number(d.notional) << "\", color=blue];\n";
  }
  for (const CdsContract& c : net.cds()) {
    out << "  \"" << net.bank_name(c.writer) << "\" -> \"" << net.bank_name(c.holder)
        << "\" [label=\"" << format_number(c.notional) << " (ref "
        << net.bank_name(c.reference) << ")\", color=orange, style=dashed];\n";
  }
  out << "}\n";
  return out.str();
}

Vector parse_recovery_vector(const std::string& text, const FinancialNetwork& net) {
  std::istringstream in(text);
  std::vector<Scalar> values;
  std::string token;
  while (in >> token) {
    try {
      size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw IoError("cannot parse recovery rate '" + token + "'");
    }
  }
  if (static_cast<Index>(values.size()) != net.size()) {
    throw IoError("expected " + std::to_string(net.size()) + " recovery rates, got " +
                  std::to_string(values.size()));
  }
  Vector r(net.size());
  for (size_t i = 0; i < values.size(); ++i) r[static_cast<Index>(i)] = values[i];
  return r;
}

std::string format_recovery_vector(const Vector& r) {
  std::ostringstream out;
  for (Index i = 0; i < r.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_number(r[i]);
  }
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace cdsnet
