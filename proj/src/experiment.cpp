#include "moranlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "moranlab/errors.hpp"
#include "moranlab/exact.hpp"
#include "moranlab/rng.hpp"
#include "moranlab/walks.hpp"

namespace moranlab {

V0Rule parse_v0_rule(const std::string& name) {
  if (name == "explicit") return V0Rule::Explicit;
  if (name == "uniform") return V0Rule::Uniform;
  if (name == "uniform-conditioned") return V0Rule::UniformConditioned;
  if (name == "min-degree") return V0Rule::MinDegree;
  throw ParameterError("unknown v0 rule \"" + name +
                       "\" (explicit, uniform, uniform-conditioned, min-degree)");
}

std::string v0_rule_name(V0Rule rule) {
  switch (rule) {
    case V0Rule::Explicit: return "explicit";
    case V0Rule::Uniform: return "uniform";
    case V0Rule::UniformConditioned: return "uniform-conditioned";
    case V0Rule::MinDegree: return "min-degree";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "bd") return Variant::BirthDeath;
  if (name == "db") return Variant::DeathBirth;
  throw ParameterError("unknown variant \"" + name + "\" (bd, db)");
}

std::string variant_name(Variant variant) { return variant == Variant::BirthDeath ? "bd" : "db"; }

void ExperimentSpec::check() const {
  validate(process);
  if (!graph_file) {
    if (n < 1) throw ParameterError("need --n >= 1 or --graph");
    if (!(p >= 0 && p <= 1)) throw ParameterError("--p must lie in [0,1]");
  }
  if (v0_rule == V0Rule::Explicit && !v0) throw ParameterError("v0 rule 'explicit' needs --v0");
  if (runs < 1) throw ParameterError("--runs must be at least 1");
  if (max_steps < 1) throw ParameterError("--max-steps must be at least 1");
  if (retry_budget < 1) throw ParameterError("retry budget must be at least 1");
}

namespace {

constexpr std::uint64_t kGraphStream = 0x6772617068ULL;
constexpr std::uint64_t kVertexStream = 0x76657274ULL;

std::size_t s0_neighbors(const Graph& g, const VertexClasses& c, Vertex v) {
  std::size_t k = 0;
  for (Vertex u : g.neighbors(v)) k += c.in_s0(u);
  return k;
}

std::optional<Vertex> pick_v0(const ExperimentSpec& spec, const Graph& g, const ThresholdParams& t,
                              const VertexClasses& c, std::uint64_t attempt_seed) {
  const auto n = g.num_vertices();
  Rng rng = make_stream(attempt_seed, kVertexStream);
  switch (spec.v0_rule) {
    case V0Rule::Explicit:
      if (*spec.v0 >= n) throw ParameterError("--v0 " + std::to_string(*spec.v0) + " out of range");
      return *spec.v0;
    case V0Rule::Uniform:
      return static_cast<Vertex>(uniform_below(rng, n));
    case V0Rule::UniformConditioned: {
      std::vector<Vertex> eligible;
      for (Vertex v = 0; v < n; ++v)
        if (!c.in_s1(v) && s0_neighbors(g, c, v) == 0) eligible.push_back(v);
      if (eligible.empty()) return std::nullopt;
      return eligible[uniform_below(rng, eligible.size())];
    }
    case V0Rule::MinDegree: {
      Vertex best = 0;
      for (Vertex v = 1; v < n; ++v)
        if (g.degree(v) < g.degree(best)) best = v;
      if (static_cast<double>(g.degree(best)) > t.s0_cutoff) return std::nullopt;
      return best;
    }
  }
  return std::nullopt;
}

}  // namespace

Realization realize(const ExperimentSpec& spec) {
  spec.check();
  Realization r;
  if (spec.graph_file) {
    std::ifstream in(*spec.graph_file);
    if (!in) throw ParameterError("cannot open graph file " + *spec.graph_file);
    r.graph = read_edge_list(in);
    if (!r.graph.is_connected()) throw StructureError("graph in " + *spec.graph_file + " is not connected");
    r.thresholds = derive_thresholds(r.graph.num_vertices(), nominal_p(r.graph), spec.eps);
    r.classes = classify(r.graph, r.thresholds);
    r.attempts = 1;
    auto v0 = pick_v0(spec, r.graph, r.thresholds, r.classes, spec.master_seed);
    if (!v0) {
      throw ConditioningError("no start vertex in " + *spec.graph_file + " satisfies rule " +
                              v0_rule_name(spec.v0_rule));
    }
    r.v0 = *v0;
    return r;
  }
  const auto thresholds = derive_thresholds(spec.n, spec.p, spec.eps);
  const std::uint64_t graph_master = derive_seed(spec.master_seed, kGraphStream);
  for (std::uint64_t attempt = 0; attempt < spec.retry_budget; ++attempt) {
    const auto seed = derive_seed(graph_master, attempt);
    auto g = generate_gnp(spec.n, spec.p, seed);
    if (!g.is_connected()) continue;
    auto classes = classify(g, thresholds);
    auto v0 = pick_v0(spec, g, thresholds, classes, seed);
    if (!v0) continue;
    r.graph = std::move(g);
    r.thresholds = thresholds;
    r.classes = std::move(classes);
    r.v0 = *v0;
    r.graph_seed = seed;
    r.attempts = attempt + 1;
    return r;
  }
  throw ConditioningError("rule " + v0_rule_name(spec.v0_rule) + " not realised on a connected graph within " +
                          std::to_string(spec.retry_budget) + " attempts");
}

std::string case_label(const Graph& g, const ThresholdParams& t, const VertexClasses& c, Vertex v0,
                       Variant variant) {
  const bool in_s1 = c.in_s1(v0);
  const auto y0 = s0_neighbors(g, c, v0);
  if (variant == Variant::BirthDeath) {
    if (c.in_s0(v0)) return "BDF2";
    if (y0 > 1) return "unclassified";
    if (!in_s1) return y0 == 0 ? "BDF1" : "BDF4";
    return y0 == 0 ? "BDF3" : "BDF5";
  }
  if (y0 > 1) return "unclassified";
  if (!in_s1) return y0 == 0 ? "DBF1" : "DBF4";
  if (y0 == 1) return "DBF5";
  return static_cast<double>(g.degree(v0)) > 1 / (t.eps * t.eps) ? "DBF2" : "DBF3";
}

Target theorem_target(const Graph& g, const ThresholdParams& t, const VertexClasses& c, Vertex v0,
                      const ProcessParams& params, const std::string& label) {
  const double s = params.s;
  if (s < 1) return {"o(1)", 0.0};
  if (s == 1) {
    return {params.variant == Variant::BirthDeath ? "d(v0)^-1/sum d^-1" : "d(v0)/sum d",
            neutral_fixation(g, params.variant)[v0]};
  }
  if (label == "BDF1" || label == "DBF1") return {"(s-1)/s", (s - 1) / s};
  if (label == "BDF2") return {"1-o(1)", std::nullopt};
  if (label == "unclassified") return {"none", std::nullopt};

  const double alpha = static_cast<double>(g.degree(v0)) / t.np_nominal;
  double d_y0 = 0;
  for (Vertex u : g.neighbors(v0))
    if (c.in_s0(u)) d_y0 = static_cast<double>(g.degree(u));

  FamilyParams fp;
  fp.s = s;
  fp.alpha = alpha;
  fp.d_y0 = d_y0;
  fp.d_x1 = static_cast<double>(g.degree(v0));
  fp.np = t.np_nominal;
  if (label == "BDF3" || label == "BDF5") {
    fp.family = WalkFamily::Bdf3;
  } else if (label == "BDF4") {
    fp.family = WalkFamily::Bdf4;
  } else if (label == "DBF2") {
    fp.family = WalkFamily::Dbf2;
  } else if (label == "DBF3") {
    fp.family = WalkFamily::Dbf3;
  } else if (label == "DBF4") {
    fp.family = WalkFamily::Dbf4;
  } else {
    fp.family = WalkFamily::Dbf5;
  }
  const double p1 = solve_recurrence(build_family(fp)).p1();
  return {"1-p_1(" + family_name(fp.family) + ")", 1 - p1};
}

ResultRecord cmd_theorem_check(const ExperimentSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  ResultRecord rec;
  rec.spec = spec;
  rec.realized = realize(spec);
  const auto& r = rec.realized;
  rec.label = case_label(r.graph, r.thresholds, r.classes, r.v0, spec.process.variant);
  rec.target = theorem_target(r.graph, r.thresholds, r.classes, r.v0, spec.process, rec.label);
  EstimateOptions opts;
  opts.runs = spec.runs;
  opts.master_seed = spec.master_seed;
  opts.threads = spec.threads;
  opts.max_active_steps = spec.max_steps;
  rec.estimate = MoranSimulator(r.graph, spec.process).estimate_fixation(r.v0, opts);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

namespace {

nlohmann::ordered_json estimate_object(const Estimate& e) {
  return {{"p_hat", e.p_hat},
          {"ci_low", e.ci.low},
          {"ci_high", e.ci.high},
          {"runs", e.runs},
          {"fixations", e.fixations},
          {"timeouts", e.timeouts},
          {"seed", e.seed}};
}

}  // namespace

std::string estimate_json(const Estimate& e) { return estimate_object(e).dump(2); }

std::string to_json(const ResultRecord& rec) {
  using nlohmann::ordered_json;
  const auto& s = rec.spec;
  const auto& r = rec.realized;
  ordered_json spec;
  spec["command"] = s.command;
  if (s.graph_file) {
    spec["graph"] = *s.graph_file;
  } else {
    spec["n"] = s.n;
    spec["p"] = s.p;
  }
  spec["s"] = s.process.s;
  spec["variant"] = variant_name(s.process.variant);
  spec["v0_rule"] = v0_rule_name(s.v0_rule);
  if (s.v0) spec["v0"] = *s.v0;
  spec["runs"] = s.runs;
  spec["seed"] = s.master_seed;
  spec["eps"] = s.eps ? ordered_json(*s.eps) : ordered_json(nullptr);
  spec["threads"] = s.threads;
  spec["max_steps"] = s.max_steps;
  spec["retry_budget"] = s.retry_budget;

  ordered_json out;
  out["spec"] = spec;
  out["graph"] = {{"n", r.graph.num_vertices()},
                  {"m", r.graph.num_edges()},
                  {"max_degree", r.graph.max_degree()},
                  {"s0_size", r.classes.s0.size()},
                  {"s1_size", r.classes.s1.size()},
                  {"graph_seed", r.graph_seed},
                  {"attempts", r.attempts}};
  out["thresholds"] = {{"eps", r.thresholds.eps},
                       {"omega0", r.thresholds.omega0},
                       {"n1", r.thresholds.n1},
                       {"s0_cutoff", r.thresholds.s0_cutoff}};
  std::vector<std::size_t> s0_degrees;
  for (Vertex u : r.graph.neighbors(r.v0))
    if (r.classes.in_s0(u)) s0_degrees.push_back(r.graph.degree(u));
  out["v0"] = {{"vertex", r.v0},
               {"degree", r.graph.degree(r.v0)},
               {"in_s0", r.classes.in_s0(r.v0)},
               {"in_s1", r.classes.in_s1(r.v0)},
               {"s0_neighbor_degrees", s0_degrees}};
  out["case"] = rec.label;
  out["target"] = {{"text", rec.target.text},
                   {"value", rec.target.value ? ordered_json(*rec.target.value) : ordered_json(nullptr)}};
  out["estimate"] = estimate_object(rec.estimate);
  out["timeout_warning"] = rec.estimate.timeout_warning;
  out["wall_seconds"] = rec.wall_seconds;
  return out.dump(2);
}

}  // namespace moranlab
