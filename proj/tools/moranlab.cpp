// Command-line front end: graph generation, Monte Carlo estimates, exact
// solves, recurrence evaluation, structural audits and theorem checks.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "moranlab/audit.hpp"
#include "moranlab/errors.hpp"
#include "moranlab/exact.hpp"
#include "moranlab/experiment.hpp"
#include "moranlab/walks.hpp"

namespace {

using namespace moranlab;
using nlohmann::ordered_json;

struct Common {
  std::size_t n = 0;
  double p = 0;
  double s = 2;
  std::string variant = "bd";
  std::string v0_rule = "uniform";
  long long v0 = -1;
  std::uint64_t runs = 1000;
  std::uint64_t seed = 1;
  double eps = 0.3;
  std::string out;
  unsigned threads = 1;
  std::uint64_t max_steps = 10'000'000;
  std::string format = "json";
  std::string graph;
  std::uint64_t retries = 10'000;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

ExperimentSpec spec_from(const Common& c, const std::string& command) {
  ExperimentSpec spec;
  spec.command = command;
  if (!c.graph.empty()) {
    spec.graph_file = c.graph;
  } else {
    spec.n = c.n;
    spec.p = c.p;
  }
  spec.process.s = c.s;
  spec.process.variant = parse_variant(c.variant);
  spec.v0_rule = parse_v0_rule(c.v0_rule);
  if (c.v0 >= 0) {
    spec.v0 = static_cast<Vertex>(c.v0);
    if (spec.v0_rule == V0Rule::Uniform) spec.v0_rule = V0Rule::Explicit;
  }
  spec.runs = c.runs;
  spec.master_seed = c.seed;
  spec.eps = c.eps;
  spec.threads = c.threads;
  spec.max_steps = c.max_steps;
  spec.retry_budget = c.retries;
  return spec;
}

Graph named_graph(const std::string& family, std::size_t n, std::size_t b) {
  if (family == "complete") return complete_graph(n);
  if (family == "cycle") return cycle_graph(n);
  if (family == "path") return path_graph(n);
  if (family == "star") return star_graph(n == 0 ? 0 : n - 1);
  if (family == "bipartite") return complete_bipartite_graph(n, b);
  throw ParameterError("unknown graph family \"" + family + "\" (complete, cycle, path, star, bipartite)");
}

Graph load_graph(const Common& c, const std::string& family, std::size_t b) {
  if (!c.graph.empty()) {
    std::ifstream in(c.graph);
    if (!in) throw ParameterError("cannot open graph file " + c.graph);
    return read_edge_list(in);
  }
  if (!family.empty()) return named_graph(family, c.n, b);
  if (c.n < 1) throw ParameterError("need --graph, --family or --n/--p");
  return generate_gnp(c.n, c.p, c.seed);
}

std::string csv_of(const RegimeWalkSpec& spec, const RecurrenceSolution& sol) {
  std::ostringstream out;
  out.precision(17);
  out << "j";
  for (std::size_t l = 0; l < sol.layers.size(); ++l) out << (sol.layers.size() == 1 ? ",p" : ",p_delta" + std::to_string(l));
  out << '\n';
  for (std::size_t j = 0; j <= spec.m; ++j) {
    out << j;
    for (const auto& layer : sol.layers) out << ',' << layer[j];
    out << '\n';
  }
  return out.str();
}

void add_common(CLI::App* cmd, Common& c, bool process, bool campaign) {
  cmd->add_option("--n", c.n, "vertex count of G(n,p)");
  cmd->add_option("--p", c.p, "edge probability of G(n,p)");
  cmd->add_option("--graph", c.graph, "edge-list file (header \"n m\")");
  cmd->add_option("--seed", c.seed, "master seed (default: $MORANLAB_SEED or 1)");
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  if (process) {
    cmd->add_option("--s", c.s, "mutant fitness");
    cmd->add_option("--variant", c.variant, "bd or db")->check(CLI::IsMember({"bd", "db"}));
  }
  if (campaign) {
    cmd->add_option("--v0-rule", c.v0_rule, "explicit, uniform, uniform-conditioned, min-degree");
    cmd->add_option("--v0", c.v0, "start vertex (rule explicit)");
    cmd->add_option("--runs", c.runs, "Monte Carlo runs");
    cmd->add_option("--eps", c.eps, "eps override for the vertex classes");
    cmd->add_option("--threads", c.threads, "concurrent runs");
    cmd->add_option("--max-steps", c.max_steps, "active-step cap per run");
    cmd->add_option("--retries", c.retries, "conditioning retry budget");
  }
}

// Folds a flat "key = value" file into the argument list as "--key value"
// for every key not already given on the command line, so flags win over
// the file and the file over defaults.
std::vector<std::string> with_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  auto trim = [](std::string x) {
    const auto b = x.find_first_not_of(" \t\r");
    const auto e = x.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
  };
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError("config line without '=': " + line);
    const std::string flag = "--" + trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (given(flag)) continue;
    if (value == "true") {
      args.push_back(flag);
    } else if (value != "false") {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

int run(int argc, char** argv) {
  CLI::App app{"Moran processes on graphs: simulation, exact solves, recurrences and audits"};
  app.add_option("--config", "flat key = value configuration file (keys are flag names)");
  app.require_subcommand(1);

  Common c;
  std::string family;
  std::size_t bipartite_b = 0;
  auto* generate = app.add_subcommand("generate", "write a G(n,p) edge list");
  add_common(generate, c, false, false);

  auto* estimate = app.add_subcommand("estimate", "Monte Carlo fixation estimate");
  add_common(estimate, c, true, true);

  auto* theorem = app.add_subcommand("theorem", "theorem-case experiment with target annotation");
  add_common(theorem, c, true, true);

  auto* exact = app.add_subcommand("exact", "exact fixation probabilities from every vertex");
  add_common(exact, c, true, false);
  exact->add_option("--family", family, "complete, cycle, path, star, bipartite (with --n)");
  exact->add_option("--b", bipartite_b, "second side of the complete bipartite graph");

  FamilyParams fp;
  std::string walk_family = "bdf3";
  std::string landing = "j";
  std::string mu = "printed";
  std::string psi = "dbf3";
  std::string csv_path;
  auto* recurrence = app.add_subcommand("recurrence", "solve a fixation recurrence");
  recurrence->add_option("--family", walk_family, "bdf3, bdf4, dbf2, dbf3, dbf4, dbf5");
  recurrence->add_option("--alpha", fp.alpha, "d(v0)/np");
  recurrence->add_option("--dy0", fp.d_y0, "d(y0)");
  recurrence->add_option("--dx1", fp.d_x1, "d(x1)");
  recurrence->add_option("--s", fp.s, "mutant fitness");
  recurrence->add_option("--m", fp.options.m, "right boundary");
  recurrence->add_option("--np", fp.np, "nominal degree");
  recurrence->add_option("--landing", landing, "switch lands at q_j (j) or q_{j-1} (j-1)")
      ->check(CLI::IsMember({"j", "j-1"}));
  recurrence->add_option("--mu", mu, "dbf5 down weight: printed or drift")->check(CLI::IsMember({"printed", "drift"}));
  recurrence->add_option("--psi", psi, "dbf4 psi source: dbf3 or dbf2")->check(CLI::IsMember({"dbf3", "dbf2"}));
  recurrence->add_option("--csv", csv_path, "also write the solution vector as CSV");
  recurrence->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  recurrence->add_option("--out", c.out, "output file (default: stdout)");

  AuditConfig audit_config;
  bool no_clamp = false;
  auto* audit_cmd = app.add_subcommand("audit", "check the structural properties (a)-(m)");
  add_common(audit_cmd, c, false, false);
  audit_cmd->add_option("--eps", c.eps, "eps override");
  audit_cmd->add_option("--samples", audit_config.subset_samples, "random sets per size");
  audit_cmd->add_flag("--no-clamp", no_clamp, "use omega0 unclamped as distance bound");

  try {
    auto args = with_config(argc, argv);
    std::reverse(args.begin() + 1, args.end());  // CLI11 consumes from the back
    args.erase(args.begin());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // Seed precedence: flag, then config file, then the environment.
  const auto* active = app.get_subcommands().front();
  const auto* seed_opt = active->get_option_no_throw("--seed");
  if (seed_opt != nullptr && seed_opt->count() == 0) {
    if (const char* env = std::getenv("MORANLAB_SEED")) {
      try {
        c.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw ParameterError(std::string("MORANLAB_SEED is not an unsigned integer: ") + env);
      }
    }
  }

  if (generate->parsed()) {
    if (c.n < 1) throw ParameterError("generate needs --n");
    std::ostringstream text;
    write_edge_list(text, generate_gnp(c.n, c.p, c.seed));
    emit(text.str(), c.out);
    return 0;
  }
  if (estimate->parsed() || theorem->parsed()) {
    const auto rec = cmd_theorem_check(spec_from(c, estimate->parsed() ? "estimate" : "theorem"));
    if (c.format == "csv") {
      std::ostringstream out;
      out << "p_hat,ci_low,ci_high,runs,fixations,timeouts,seed,case\n"
          << rec.estimate.p_hat << ',' << rec.estimate.ci.low << ',' << rec.estimate.ci.high << ','
          << rec.estimate.runs << ',' << rec.estimate.fixations << ',' << rec.estimate.timeouts << ','
          << rec.estimate.seed << ',' << rec.label << '\n';
      emit(out.str(), c.out);
    } else {
      emit(to_json(rec), c.out);
    }
    return 0;
  }
  if (exact->parsed()) {
    ProcessParams params{c.s, parse_variant(c.variant)};
    const auto g = load_graph(c, family, bipartite_b);
    const auto f = exact_fixation_all(g, params);
    ordered_json out;
    out["spec"] = {{"n", g.num_vertices()}, {"m", g.num_edges()}, {"s", c.s}, {"variant", c.variant}};
    if (!family.empty()) out["spec"]["family"] = family;
    if (!c.graph.empty()) out["spec"]["graph"] = c.graph;
    out["f"] = f;
    if (c.format == "csv") {
      std::ostringstream text;
      text.precision(17);
      text << "v,f\n";
      for (std::size_t v = 0; v < f.size(); ++v) text << v << ',' << f[v] << '\n';
      emit(text.str(), c.out);
    } else {
      emit(out.dump(2), c.out);
    }
    return 0;
  }
  if (recurrence->parsed()) {
    fp.family = parse_family(walk_family);
    fp.options.landing = landing == "j" ? Landing::AtJ : Landing::AtJMinus1;
    fp.dbf5_reading = mu == "printed" ? Dbf5Reading::Printed : Dbf5Reading::Drift;
    fp.dbf4_psi = psi == "dbf3" ? Dbf4Psi::Dbf3Layer1 : Dbf4Psi::Dbf2;
    const auto spec = build_family(fp);
    const auto sol = solve_recurrence(spec);
    const auto conv = check_m_convergence(fp);
    if (!csv_path.empty()) emit(csv_of(spec, sol), csv_path);
    if (c.format == "csv") {
      emit(csv_of(spec, sol), c.out);
      return 0;
    }
    ordered_json out;
    out["family"] = walk_family;
    out["description"] = spec.description;
    out["m"] = spec.m;
    out["p_1"] = sol.p1();
    out["fixation"] = 1 - sol.p1();
    out["residual"] = sol.residual;
    out["convergence"] = {{"p1_m", conv.p1_m},
                          {"p1_2m", conv.p1_2m},
                          {"tolerance", conv.tolerance},
                          {"converged", conv.converged}};
    // Pure-bias gambler value at the same (s, m), the limit the family
    // approaches as alpha -> 1 and d(y0) -> infinity.
    const double q1 = gambler_phi(1 / fp.s, 1, static_cast<std::int64_t>(spec.m));
    out["gambler_reference"] = {{"q_1", q1},
                                {"gap", std::abs(sol.p1() - q1)},
                                {"tolerance", 1e-6},
                                {"within_tolerance", std::abs(sol.p1() - q1) < 1e-6}};
    if (sol.layers.size() > 1) out["p_1_layers"] = {sol.layers[0][1], sol.layers[1][1]};
    emit(out.dump(2), c.out);
    return 0;
  }
  if (audit_cmd->parsed()) {
    const auto g = load_graph(c, "", 0);
    const double p = c.graph.empty() ? c.p : nominal_p(g);
    const auto t = derive_thresholds(g.num_vertices(), p, c.eps);
    audit_config.seed = c.seed;
    audit_config.clamp_omega0 = !no_clamp;
    emit(to_json(audit(g, t, audit_config)), c.out);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const moranlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return moranlab::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
