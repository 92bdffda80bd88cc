#include "cli_app.hpp"

#include "cdsnet/io.hpp"
#include "cdsnet/network.hpp"
#include "cdsnet/pure_circuit.hpp"
#include "cdsnet/reductions.hpp"
#include "cdsnet/solver.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace cdsnet {

namespace {

constexpr int kExitFound = 0;
constexpr int kExitNo = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNotFound = 3;
constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;

int status_exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::Found: return kExitFound;
    case SolveStatus::Infeasible: return kExitInfeasible;
    case SolveStatus::NotFound:
    case SolveStatus::Undecided: return kExitNotFound;
  }
  return kExitNotFound;
}

void print_report(const SolveReport& report, std::ostream& out) {
  out << "status      " << to_string(report.status) << "\n";
  if (report.recovery.has_value()) {
    out << "residual    " << report.residual << "\n";
  }
  out << "iterations  " << report.iterations << "\n";
  if (!report.pattern_verdicts.empty()) {
    size_t infeasible = 0, undecided = 0, found = 0;
    for (const PatternVerdict& v : report.pattern_verdicts) {
      switch (v.kind) {
        case PatternVerdict::Kind::Infeasible: ++infeasible; break;
        case PatternVerdict::Kind::Undecided: ++undecided; break;
        case PatternVerdict::Kind::SolutionFound: ++found; break;
      }
    }
    out << "patterns    " << report.pattern_verdicts.size() << " over {";
    for (size_t i = 0; i < report.pattern_banks.size(); ++i) {
      out << (i > 0 ? " " : "") << report.pattern_banks[i];
    }
    out << "}: " << infeasible << " infeasible, " << undecided << " undecided, " << found
        << " with solutions\n";
  }
  if (report.recovery.has_value()) {
    out << "recovery    " << format_recovery_vector(*report.recovery) << "\n";
  }
}

void warn_tiny_liabilities(const FinancialNetwork& net, const Vector& r, std::ostream& err) {
  const LiabilitySnapshot snap = snapshot(net, r);
  for (Index i = 0; i < net.size(); ++i) {
    if (snap.total_liability[i] > 0.0 && snap.total_liability[i] < 1e-12) {
      err << "warning: bank '" << net.bank_name(i) << "' has tiny nonzero liabilities ("
          << snap.total_liability[i] << ") at this point; the recovery ratio is ill-conditioned\n";
    }
  }
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::ostringstream joined;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) joined << ' ';
    joined << tokens[i];
  }
  return joined.str();
}

struct ClearArgs {
  std::string network_path;
  std::string method = "iterate";
  double eps = 5.0 - 2.0 * std::sqrt(6.0);
  double damping = 0.5;
  double tol = 1e-9;
  long max_iter = 10000;
  int restarts = 64;
  int cap = 16;
  std::uint64_t seed = 1;
};

struct CompileCircuitArgs {
  std::string circuit_path;
  std::string out_path;
  std::string map_path;
};

struct CompilePolyArgs {
  std::string poly_path;
  std::string mode;
  double alpha = 0.5;
  std::string out_path;
  std::string map_path;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"financial networks with credit default swaps: clearing, gadgets, compilers"};
  app.require_subcommand(1);

  ClearArgs clear_args;
  CLI::App* clear = app.add_subcommand("clear", "search for a clearing recovery vector");
  clear->add_option("network", clear_args.network_path, "network JSON file")->required();
  clear->add_option("--method", clear_args.method, "iterate | patterns | approx")
      ->check(CLI::IsMember({"iterate", "patterns", "approx"}));
  clear->add_option("--eps", clear_args.eps, "approximation tolerance for --method approx");
  clear->add_option("--damping", clear_args.damping, "damped-iteration step size");
  clear->add_option("--tol", clear_args.tol, "clearing residual tolerance");
  clear->add_option("--max-iter", clear_args.max_iter, "iteration budget");
  clear->add_option("--restarts", clear_args.restarts, "random restarts for --method approx");
  clear->add_option("--cap", clear_args.cap, "pattern enumeration cap");
  clear->add_option("--seed", clear_args.seed, "random seed");

  std::string verify_network;
  std::vector<std::string> verify_rates;
  std::optional<double> verify_eps;
  double verify_tol = 1e-9;
  CLI::App* verify = app.add_subcommand("verify", "check a recovery vector");
  verify->add_option("network", verify_network, "network JSON file")->required();
  verify->add_option("recovery", verify_rates, "recovery rates in bank order")->required();
  verify->add_option("--eps", verify_eps, "check approximate clearing at this eps");
  verify->add_option("--tol", verify_tol, "exact-clearing residual tolerance");

  CLI::App* compile = app.add_subcommand("compile", "compile circuits and polynomials to networks");
  compile->require_subcommand(1);
  CompileCircuitArgs cc;
  CLI::App* compile_circuit_cmd = compile->add_subcommand("circuit", "gate circuit to network");
  compile_circuit_cmd->add_option("circuit", cc.circuit_path, "circuit JSON file")->required();
  compile_circuit_cmd->add_option("-o,--output", cc.out_path, "network output file")->required();
  compile_circuit_cmd->add_option("--map", cc.map_path, "sidecar with the wire map");
  CompilePolyArgs cp;
  CLI::App* compile_poly_cmd = compile->add_subcommand("poly", "degree-4 polynomial to network");
  compile_poly_cmd->add_option("poly", cp.poly_path, "polynomial JSON file")->required();
  compile_poly_cmd->add_option("--mode", cp.mode, "hasclearing | cansurvive")
      ->required()
      ->check(CLI::IsMember({"hasclearing", "cansurvive"}));
  compile_poly_cmd->add_option("--alpha", cp.alpha, "default-cost factor for hasclearing");
  compile_poly_cmd->add_option("-o,--output", cp.out_path, "network output file")->required();
  compile_poly_cmd->add_option("--map", cp.map_path, "sidecar with pipeline metadata");

  std::string decode_network, decode_map;
  std::vector<std::string> decode_rates;
  CLI::App* decode_cmd = app.add_subcommand("decode", "read gate values off a recovery vector");
  decode_cmd->add_option("network", decode_network, "compiled network JSON file")->required();
  decode_cmd->add_option("recovery", decode_rates, "recovery rates in bank order")->required();
  decode_cmd->add_option("--map", decode_map, "sidecar produced by compile")->required();

  CLI::App* brute = app.add_subcommand("brute", "exhaustive search");
  brute->require_subcommand(1);
  std::string brute_path;
  int brute_cap = 12;
  CLI::App* brute_circuit_cmd = brute->add_subcommand("circuit", "solve a circuit by enumeration");
  brute_circuit_cmd->add_option("circuit", brute_path, "circuit JSON file")->required();
  brute_circuit_cmd->add_option("--cap", brute_cap, "maximum wire count");

  CLI::App* export_cmd = app.add_subcommand("export", "export to other formats");
  export_cmd->require_subcommand(1);
  std::string export_path, export_out;
  bool hide_scaffolding = false;
  CLI::App* export_dot_cmd = export_cmd->add_subcommand("dot", "Graphviz digraph text");
  export_dot_cmd->add_option("network", export_path, "network JSON file")->required();
  export_dot_cmd->add_option("-o,--output", export_out, "write to file instead of stdout");
  export_dot_cmd->add_flag("--hide-scaffolding", hide_scaffolding,
                           "suppress source/sink decoration");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  std::string program = "cdsnet";
  argv.push_back(program.data());
  for (std::string& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitFound;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (clear->parsed()) {
      const FinancialNetwork net = parse_network(read_file(clear_args.network_path));
      SolveReport report;
      if (clear_args.method == "iterate") {
        IterateOptions opts;
        opts.damping = clear_args.damping;
        opts.max_iter = clear_args.max_iter;
        opts.tol = clear_args.tol;
        report = iterate_F(net, opts);
      } else if (clear_args.method == "patterns") {
        PatternOptions opts;
        opts.tol = clear_args.tol;
        opts.cap = clear_args.cap;
        opts.seed = clear_args.seed;
        report = enumerate_patterns(net, opts);
      } else {
        ApproxOptions opts;
        opts.restarts = clear_args.restarts;
        opts.max_iter = clear_args.max_iter;
        opts.seed = clear_args.seed;
        report = solve_eps_approx(net, clear_args.eps, opts);
      }
      print_report(report, out);
      return status_exit_code(report.status);
    }

    if (verify->parsed()) {
      const FinancialNetwork net = parse_network(read_file(verify_network));
      const Vector r = parse_recovery_vector(join_tokens(verify_rates), net);
      warn_tiny_liabilities(net, r, err);
      bool ok;
      if (verify_eps.has_value()) {
        ok = is_eps_approx_clearing(net, r, *verify_eps);
        out << (ok ? "eps-approximately clearing" : "not eps-approximately clearing") << " (eps "
            << *verify_eps << ")\n";
      } else {
        ok = is_clearing(net, r, verify_tol);
        const Scalar residual = (update_F(net, r) - r).lpNorm<Eigen::Infinity>();
        out << (ok ? "clearing" : "not clearing") << " (residual " << residual << ", tol "
            << verify_tol << ")\n";
      }
      return ok ? kExitFound : kExitNo;
    }

    if (compile_circuit_cmd->parsed()) {
      const PureCircuit circuit = parse_circuit(read_file(cc.circuit_path));
      const CompiledArtifact artifact = compile_circuit(circuit);
      write_file(cc.out_path, serialize_network(artifact.network));
      if (!cc.map_path.empty()) {
        write_file(cc.map_path, serialize_artifact_sidecar(artifact));
      }
      out << "compiled " << circuit.gates().size() << " gates to "
          << artifact.network.size() << " banks -> " << cc.out_path << "\n";
      return kExitFound;
    }

    if (compile_poly_cmd->parsed()) {
      const SparsePolynomial parsed = parse_polynomial(read_file(cp.poly_path));
      const SparsePolynomial normalized = normalize_poly(parsed);
      if (normalized.max_abs_coefficient() != parsed.max_abs_coefficient()) {
        err << "note: coefficients rescaled to magnitude at most 1/"
            << normalized.monomials().size() << "; the root set is unchanged\n";
      }
      const CompiledArtifact artifact = cp.mode == "hasclearing"
                                            ? compile_hasclearing(normalized, cp.alpha)
                                            : compile_cansurvive(normalized);
      write_file(cp.out_path, serialize_network(artifact.network));
      if (!cp.map_path.empty()) {
        write_file(cp.map_path, serialize_artifact_sidecar(artifact));
      }
      out << "compiled polynomial to " << artifact.network.size() << " banks -> " << cp.out_path
          << "\n";
      return kExitFound;
    }

    if (decode_cmd->parsed()) {
      const FinancialNetwork net = parse_network(read_file(decode_network));
      const CompiledArtifact artifact = parse_artifact_sidecar(read_file(decode_map), net);
      const Vector r = parse_recovery_vector(join_tokens(decode_rates), artifact.network);
      Assignment assignment;
      try {
        assignment = extract_solution(artifact, r);
      } catch (const ValidationError& e) {
        err << e.what() << "\n";
        return kExitNo;
      }
      for (const auto& [wire, value] : assignment) {
        out << wire << " = " << to_string(value) << "\n";
      }
      bool satisfied = false;
      if (artifact.circuit.has_value()) {
        satisfied = is_solution(*artifact.circuit, assignment);
        out << (satisfied ? "satisfies the circuit" : "does not satisfy the circuit") << "\n";
      }
      return satisfied ? kExitFound : kExitNo;
    }

    if (brute_circuit_cmd->parsed()) {
      const PureCircuit circuit = parse_circuit(read_file(brute_path));
      const Assignment assignment = brute_solve(circuit, brute_cap);
      for (const auto& [wire, value] : assignment) {
        out << wire << " = " << to_string(value) << "\n";
      }
      return kExitFound;
    }

    if (export_dot_cmd->parsed()) {
      const FinancialNetwork net = parse_network(read_file(export_path));
      DotOptions opts;
      opts.hide_scaffolding = hide_scaffolding;
      const std::string dot = export_dot(net, opts);
      if (export_out.empty()) {
        out << dot;
      } else {
        write_file(export_out, dot);
      }
      return kExitFound;
    }
  } catch (const IoError& e) {
    err << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cdsnet
