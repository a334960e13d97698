// Acceptance run: one PASS/FAIL line per criterion. Optional arguments
// select criteria by name (e.g. "AC3 AC7"); the exit status is non-zero if
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "moranlab/audit.hpp"
#include "moranlab/exact.hpp"
#include "moranlab/experiment.hpp"
#include "moranlab/moran.hpp"
#include "moranlab/stats.hpp"
#include "moranlab/walks.hpp"

using namespace moranlab;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Graph connected_gnp(std::size_t n, double p, std::uint64_t seed) {
  for (;; seed = derive_seed(seed, 1)) {
    auto g = generate_gnp(n, p, seed);
    if (g.is_connected()) return g;
  }
}

double log_np_p(std::size_t n) { return (std::log(static_cast<double>(n)) + 2) / static_cast<double>(n); }

// ---------------------------------------------------------------------------

Verdict ac1() {
  double worst = 0;
  for (std::size_t n = 2; n <= 10; ++n) {
    for (double s : {0.5, 1.5, 2.0, 4.0}) {
      const double expected = (1 - 1 / s) / (1 - std::pow(s, -static_cast<double>(n)));
      for (double f : exact_fixation_all(complete_graph(n), {s, Variant::BirthDeath}))
        worst = std::max(worst, std::abs(f - expected));
    }
  }
  return {worst < 1e-9, fmt("max |f - (1-1/s)/(1-s^-n)| = %.2e over n=2..10, 4 values of s", worst)};
}

Verdict ac2() {
  const Graph graphs[] = {cycle_graph(6), complete_graph(6), complete_bipartite_graph(3, 3)};
  double spread[2] = {0, 0};
  for (auto variant : {Variant::BirthDeath, Variant::DeathBirth}) {
    std::vector<double> all;
    for (const auto& g : graphs)
      for (double f : exact_fixation_all(g, {2.0, variant})) all.push_back(f);
    const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
    spread[variant == Variant::DeathBirth] = *hi - *lo;
  }
  return {spread[0] < 1e-9 && spread[1] < 1e-9,
          fmt("spread across C6, K6, K3,3 and all starts: BD %.2e, DB %.2e", spread[0], spread[1])};
}

Verdict ac3() {
  double worst = 0;
  std::mt19937_64 pick(3);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 4 + pick() % 7;
    const auto g = connected_gnp(n, 0.45, 1000 + i);
    double inv_sum = 0, deg_sum = 0;
    for (Vertex v = 0; v < n; ++v) {
      inv_sum += 1.0 / static_cast<double>(g.degree(v));
      deg_sum += static_cast<double>(g.degree(v));
    }
    const auto bd = exact_fixation_all(g, {1.0, Variant::BirthDeath});
    const auto db = exact_fixation_all(g, {1.0, Variant::DeathBirth});
    for (Vertex v = 0; v < n; ++v) {
      const double d = static_cast<double>(g.degree(v));
      worst = std::max(worst, std::abs(bd[v] - (1 / d) / inv_sum));
      worst = std::max(worst, std::abs(db[v] - d / deg_sum));
    }
  }
  return {worst < 1e-9, fmt("max deviation from the degree formulas on 20 graphs = %.2e", worst)};
}

Verdict ac4() {
  double worst = 0, worst_residual = 0;
  for (double s : {1.2, 2.0, 5.0}) {
    for (std::size_t m = 2; m <= 100; ++m) {
      const auto sol = solve_recurrence(constant_bias(s, m));
      worst_residual = std::max(worst_residual, sol.residual);
      const double r = 1 / s;
      for (std::size_t j = 0; j <= m; ++j) {
        const double phi = (std::pow(r, j) - std::pow(r, m)) / (1 - std::pow(r, m));
        worst = std::max(worst, std::abs(sol.p()[j] - phi));
      }
    }
  }
  // Duration: raw-step walk from a = 3 on {0..10}, up 0.6, down 0.4.
  WalkClosedFormQuery q;
  q.alpha = 0.6;
  q.beta = 0.4;
  q.ratio = q.beta / q.alpha;
  q.a = 3;
  q.m = 10;
  const double oracle = oracle_duration(q);
  std::mt19937_64 rng(44);
  std::bernoulli_distribution up(0.6);
  const int runs = 1'000'000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < runs; ++i) {
    int x = 3, t = 0;
    while (x > 0 && x < 10) {
      x += up(rng) ? 1 : -1;
      ++t;
    }
    sum += t;
    sum2 += static_cast<double>(t) * t;
  }
  const double mean = sum / runs;
  const double se = std::sqrt((sum2 / runs - mean * mean) / runs);
  const bool ok = worst < 1e-12 && worst_residual < 1e-12 && std::abs(mean - oracle) < 3 * se;
  return {ok, fmt("ruin max err %.2e, residual %.2e; duration oracle %.4f vs simulated %.4f +- %.4f", worst,
                  worst_residual, oracle, mean, se)};
}

Verdict ac5() {
  std::vector<Graph> graphs;
  for (std::size_t n = 2; n <= 6; ++n) graphs.push_back(complete_graph(n));
  for (int i = 0; i < 5; ++i) graphs.push_back(connected_gnp(5 + i % 4, 0.45, 500 + i));
  const double z3 = 0.9973002039367398;  // two-sided 3 sigma
  int cases = 0, misses = 0;
  std::string miss;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (double s : {0.5, 2.0}) {
      for (auto variant : {Variant::BirthDeath, Variant::DeathBirth}) {
        const ProcessParams params{s, variant};
        const double exact = exact_fixation(graphs[gi], 0, params);
        EstimateOptions opts;
        opts.runs = 100'000;
        opts.confidence = z3;
        opts.master_seed = derive_seed(5, static_cast<std::uint64_t>(cases));
        const auto e = estimate_fixation(graphs[gi], 0, params, opts);
        ++cases;
        if (!e.ci.contains(exact) || e.timeouts > 0) {
          ++misses;
          miss += fmt(" [graph %zu s=%.1f %s: exact %.5f, p_hat %.5f]", gi, s,
                      variant == Variant::BirthDeath ? "bd" : "db", exact, e.p_hat);
        }
      }
    }
  }
  return {misses == 0, fmt("%d/%d cases inside the 3-sigma Wilson interval", cases - misses, cases) + miss};
}

Verdict ac6() {
  const auto g = star_graph(499);
  std::mt19937_64 pick(6);
  const auto leaf = static_cast<Vertex>(1 + pick() % 499);
  EstimateOptions opts;
  opts.runs = 20'000;
  opts.master_seed = 6;
  const auto e = estimate_fixation(g, leaf, {2.0, Variant::BirthDeath}, opts);
  const bool ok = std::abs(e.p_hat - 0.75) <= 0.04 && e.timeouts == 0;
  return {ok, fmt("leaf %u: p_hat = %.4f [%.4f, %.4f], timeouts %llu", leaf, e.p_hat, e.ci.low, e.ci.high,
                  static_cast<unsigned long long>(e.timeouts))};
}

Verdict ac7() {
  struct Case {
    const char* name;
    RegimeWalkSpec spec;
  };
  const WalkOptions o{200, Landing::AtJ};
  const std::vector<Case> cases{{"bdf3 alpha=0.5", bdf3(0.5, 2, o)},     {"bdf3 alpha=2", bdf3(2, 2, o)},
                                {"bdf4 d_y0=1", bdf4(1, 2, o)},           {"bdf4 d_y0=3", bdf4(3, 2, o)},
                                {"dbf2 alpha=2", dbf2(2, 2, o)},          {"dbf3 d_x1=1", dbf3_coupled(1, 2, o)},
                                {"dbf3 d_x1=2", dbf3_coupled(2, 2, o)},   {"dbf4 d_y0=3 np=10", dbf4(3, 2, 10, o)},
                                {"dbf5 alpha=2 d_y0=3", dbf5(2, 3, 2, o)}};
  double worst = 0;
  std::string detail;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double p1 = solve_recurrence(cases[i].spec).p1();
    const double sim = simulate_spec(cases[i].spec, 1, 1'000'000, 700 + i).p_hat;
    worst = std::max(worst, std::abs(p1 - sim));
    detail += fmt(" %s: %.4f/%.4f;", cases[i].name, p1, sim);
  }
  return {worst < 0.01, fmt("max |p_1 - p_hat_1| = %.4f (solver/simulated:", worst) + detail + ")"};
}

ExperimentSpec desk_spec(V0Rule rule, Variant variant, double s, std::size_t n, std::uint64_t runs,
                         std::uint64_t seed) {
  ExperimentSpec spec;
  spec.n = n;
  spec.p = log_np_p(n);
  spec.process = {s, variant};
  spec.v0_rule = rule;
  spec.runs = runs;
  spec.master_seed = seed;
  return spec;
}

// Birth-Death uniform-conditioned record, shared by AC8 and AC9.
const ResultRecord& bd_conditioned() {
  static const ResultRecord rec =
      cmd_theorem_check(desk_spec(V0Rule::UniformConditioned, Variant::BirthDeath, 2, 3000, 2000, 8));
  return rec;
}

Verdict ac8() {
  const auto& bd = bd_conditioned();
  const auto db = cmd_theorem_check(desk_spec(V0Rule::UniformConditioned, Variant::DeathBirth, 2, 3000, 2000, 8));
  const bool ok = std::abs(bd.estimate.p_hat - 0.5) <= 0.08 && std::abs(db.estimate.p_hat - 0.5) <= 0.08;
  return {ok, fmt("BD %s p_hat = %.4f, DB %s p_hat = %.4f (target 0.5 +- 0.08)", bd.label.c_str(),
                  bd.estimate.p_hat, db.label.c_str(), db.estimate.p_hat)};
}

Verdict ac9() {
  const auto& uc = bd_conditioned();
  const auto md = cmd_theorem_check(desk_spec(V0Rule::MinDegree, Variant::BirthDeath, 2, 3000, 2000, 9));
  const bool ok = md.estimate.p_hat > uc.estimate.p_hat + 0.1 && md.estimate.ci.low > uc.estimate.ci.high;
  return {ok, fmt("min-degree (d=%zu) p_hat = %.4f [%.4f, %.4f] vs conditioned %.4f [%.4f, %.4f]",
                  md.realized.graph.degree(md.realized.v0), md.estimate.p_hat, md.estimate.ci.low,
                  md.estimate.ci.high, uc.estimate.p_hat, uc.estimate.ci.low, uc.estimate.ci.high)};
}

Verdict ac10() {
  const auto bd = cmd_theorem_check(desk_spec(V0Rule::Uniform, Variant::BirthDeath, 0.8, 2000, 1000, 10));
  const auto db = cmd_theorem_check(desk_spec(V0Rule::Uniform, Variant::DeathBirth, 0.8, 2000, 1000, 10));
  const bool ok = bd.estimate.p_hat <= 0.02 && db.estimate.p_hat <= 0.02;
  return {ok, fmt("BD p_hat = %.4f, DB p_hat = %.4f", bd.estimate.p_hat, db.estimate.p_hat)};
}

Verdict ac11() {
  const std::size_t n = 2000;
  const double p = log_np_p(n);
  const auto t = derive_thresholds(n, p, 0.3);
  int a_pass = 0, witnesses = 0, bad = 0;
  bool shape = true, deterministic = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = generate_gnp(n, p, seed);
    AuditConfig config;
    config.seed = seed;
    const auto r = audit(g, t, config);
    deterministic = deterministic && to_json(r) == to_json(audit(g, t, config));
    shape = shape && r.entries.size() == 13;
    a_pass += r.entries.at(0).status == PropertyStatus::Pass;
    for (const auto& e : r.entries) {
      if (e.status != PropertyStatus::Fail && e.status != PropertyStatus::SampledFail) continue;
      ++witnesses;
      if (!e.witness || !verify_witness(g, t, e.id, *e.witness, config)) ++bad;
    }
  }
  const bool ok = shape && deterministic && a_pass == 10 && bad == 0;
  return {ok, fmt("13 entries: %s; (a) passes %d/10; %d witnesses, %d unconfirmed; deterministic: %s",
                  shape ? "yes" : "no", a_pass, witnesses, bad, deterministic ? "yes" : "no")};
}

Verdict ac12() {
  // Aggregates and transition bounds along 10^4 steps per variant.
  const auto g = connected_gnp(200, 0.05, 12);
  double agg_err = 0;
  bool bounds = true;
  for (auto variant : {Variant::BirthDeath, Variant::DeathBirth}) {
    const ProcessParams params{1.05, variant};
    MoranSimulator sim(g, params);
    Rng rng(derive_seed(12, static_cast<std::uint64_t>(variant)));
    auto st = sim.initial_state(0);
    for (int step = 0; step < 10'000; ++step) {
      if (st.absorbed()) st = sim.initial_state(static_cast<Vertex>(uniform_below(rng, 200)));
      sim.step_active(st, rng);
      const auto ref = direct_aggregates(g, st.membership(), params);
      agg_err = std::max(agg_err, std::abs(st.agg_up() - ref.up) / std::max(1.0, ref.up));
      agg_err = std::max(agg_err, std::abs(st.agg_down() - ref.down) / std::max(1.0, ref.down));
      const auto tp = st.transition_probs();
      const bool still = tp.p_plus == 0 && tp.p_minus == 0;
      bounds = bounds && tp.p_plus >= 0 && tp.p_minus >= 0 && tp.p_plus + tp.p_minus <= 1 && still == st.absorbed();
    }
  }
  // q_j against the gambler form.
  double q_err = 0;
  for (double s : {1.1, 2.0, 5.0})
    for (std::size_t m : {5, 50, 200}) {
      const auto q = q_vector(s, m);
      for (std::size_t j = 0; j <= m; ++j)
        q_err = std::max(q_err, std::abs(q[j] - gambler_phi(1 / s, static_cast<std::int64_t>(j),
                                                            static_cast<std::int64_t>(m))));
    }
  // Residuals of every constructor.
  double residual = 0;
  for (auto landing : {Landing::AtJ, Landing::AtJMinus1}) {
    const WalkOptions o{200, landing};
    for (const auto& spec : {bdf3(0.5, 2, o), bdf3(2, 2, o), bdf4(1, 2, o), bdf4(3, 2, o), dbf2(2, 2, o),
                             dbf3_coupled(1, 2, o), dbf3_coupled(2, 2, o), dbf4(3, 2, 10, o),
                             dbf4(3, 2, 10, o, Dbf4Psi::Dbf2), dbf5(2, 3, 2, o),
                             dbf5(2, 3, 2, o, Dbf5Reading::Drift)})
      residual = std::max(residual, solve_recurrence(spec).residual);
  }
  // Wilson coverage.
  std::mt19937_64 rng(1212);
  std::binomial_distribution<std::uint64_t> draw(500, 0.3);
  int covered = 0;
  for (int i = 0; i < 1000; ++i) covered += stats::binomial_ci(draw(rng), 500, 0.95).contains(0.3);

  const bool ok = agg_err < 1e-9 && bounds && q_err < 1e-12 && residual < 1e-12 && covered >= 930;
  return {ok, fmt("aggregate rel err %.2e, bounds %s, q-gambler %.2e, residual %.2e, CI coverage %d/1000", agg_err,
                  bounds ? "ok" : "violated", q_err, residual, covered)};
}

struct Criterion {
  const char* id;
  const char* title;
  double budget_seconds;
  Verdict (*check)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {"AC1", "classical Moran oracle", 10, ac1},
      {"AC2", "isothermal invariance", 10, ac2},
      {"AC3", "neutral closed forms", 60, ac3},
      {"AC4", "gambler's ruin and duration", 60, ac4},
      {"AC5", "engine vs exact", 300, ac5},
      {"AC6", "star amplifier", 300, ac6},
      {"AC7", "recurrence vs chain simulation", 600, ac7},
      {"AC8", "typical start, desk scale", 900, ac8},
      {"AC9", "low-degree start advantage", 900, ac9},
      {"AC10", "extinction for s < 1", 600, ac10},
      {"AC11", "audit soundness", 300, ac11},
      {"AC12", "invariant suite", 600, ac12},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::printf("%-5s %s  %s: %s [%.1f s of %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.title, v.detail.c_str(),
                secs, c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
