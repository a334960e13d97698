#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "moranlab/errors.hpp"
#include "moranlab/exact.hpp"
#include "moranlab/moran.hpp"

namespace moranlab {
namespace {

constexpr ProcessParams kBd2{2.0, Variant::BirthDeath};
constexpr ProcessParams kDb2{2.0, Variant::DeathBirth};

double three_sigma(double p, double runs) { return 3 * std::sqrt(p * (1 - p) / runs); }

TEST(TransitionProbs, TriangleBirthDeath) {
  const auto g = complete_graph(3);
  const Vertex x[] = {0};
  MutantState st(g, kBd2, x);
  EXPECT_DOUBLE_EQ(st.fitness_total(), 4.0);
  const auto tp = st.transition_probs();
  EXPECT_NEAR(tp.p_plus, 0.5, 1e-15);
  EXPECT_NEAR(tp.p_minus, 0.25, 1e-15);
}

TEST(TransitionProbs, TriangleDeathBirth) {
  const auto g = complete_graph(3);
  const Vertex x[] = {0};
  MutantState st(g, kDb2, x);
  const auto tp = st.transition_probs();
  EXPECT_NEAR(tp.p_plus, 4.0 / 9, 1e-15);
  EXPECT_NEAR(tp.p_minus, 1.0 / 3, 1e-15);
}

TEST(TransitionProbs, EdgeBirthDeath) {
  const auto g = complete_graph(2);
  const Vertex x[] = {1};
  const auto tp = MutantState(g, kBd2, x).transition_probs();
  EXPECT_NEAR(tp.p_plus, 2.0 / 3, 1e-15);
  EXPECT_NEAR(tp.p_minus, 1.0 / 3, 1e-15);
}

TEST(TransitionProbs, AbsorbedStatesAreStill) {
  const auto g = complete_graph(4);
  const Vertex all[] = {0, 1, 2, 3};
  for (auto params : {kBd2, kDb2}) {
    const auto empty = MutantState(g, params, {}).transition_probs();
    const auto full = MutantState(g, params, all).transition_probs();
    EXPECT_EQ(empty.p_plus, 0.0);
    EXPECT_EQ(empty.p_minus, 0.0);
    EXPECT_EQ(full.p_plus, 0.0);
    EXPECT_EQ(full.p_minus, 0.0);
  }
}

TEST(TransitionProbs, DirectFormulaMatchesState) {
  const auto g = generate_gnp(40, 0.2, 9);
  Rng rng(4);
  for (auto params : {kBd2, kDb2, ProcessParams{0.6, Variant::BirthDeath}}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vertex> x;
      std::vector<std::uint8_t> in(40, 0);
      for (Vertex v = 0; v < 40; ++v)
        if (uniform01(rng) < 0.4) {
          x.push_back(v);
          in[v] = 1;
        }
      const auto a = MutantState(g, params, x).transition_probs();
      const auto b = direct_transition_probs(g, in, params);
      EXPECT_NEAR(a.p_plus, b.p_plus, 1e-12);
      EXPECT_NEAR(a.p_minus, b.p_minus, 1e-12);
    }
  }
}

TEST(ProcessParams, RejectsNonPositiveFitness) {
  EXPECT_THROW(validate(ProcessParams{0.0, Variant::BirthDeath}), ParameterError);
  EXPECT_THROW(validate(ProcessParams{-1.0, Variant::DeathBirth}), ParameterError);
  EXPECT_THROW(MoranSimulator(complete_graph(3), ProcessParams{0.0, Variant::BirthDeath}), ParameterError);
}

TEST(Simulator, RejectsDisconnectedGraph) {
  const std::vector<Edge> edges{{0, 1}, {2, 3}};
  EXPECT_THROW(MoranSimulator(Graph::from_edges(4, edges), kBd2), StructureError);
}

TEST(Simulator, StepOnAbsorbedStateIsAnError) {
  MoranSimulator sim(complete_graph(3), kBd2);
  auto st = sim.state_of({});
  Rng rng(1);
  EXPECT_THROW(sim.step_active(st, rng), StateError);
}

TEST(Simulator, SingleVertexFixesImmediately) {
  MoranSimulator sim(Graph::from_edges(1, {}), kBd2);
  Rng rng(1);
  const auto out = sim.run(0, rng);
  EXPECT_EQ(out.terminal, Terminal::Fixation);
  EXPECT_EQ(out.active_steps, 0u);
}

TEST(Simulator, OneStepAbsorbsOnEdge) {
  MoranSimulator sim(complete_graph(2), kBd2);
  RunOptions opts;
  opts.max_active_steps = 1;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto out = sim.run(1, rng, opts);
    EXPECT_NE(out.terminal, Terminal::Timeout);
    EXPECT_EQ(out.active_steps, 1u);
  }
  opts.max_active_steps = 0;
  EXPECT_THROW(sim.run(1, rng, opts), ParameterError);
}

TEST(Simulator, StepChangesSizeByOne) {
  MoranSimulator sim(generate_gnp(60, 0.15, 2), kDb2);
  ASSERT_TRUE(sim.graph().is_connected());
  auto st = sim.initial_state(5);
  Rng rng(7);
  while (!st.absorbed()) {
    const auto before = st.size();
    const auto r = sim.step_active(st, rng);
    EXPECT_EQ(st.size(), r.grew ? before + 1 : before - 1);
    EXPECT_EQ(st.contains(r.flipped), r.grew);
  }
}

TEST(Simulator, OutcomeMatchesFinalSize) {
  MoranSimulator sim(cycle_graph(8), kBd2);
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    std::size_t last = 1;
    RunOptions opts;
    opts.observer = [&](const MutantState& st) { last = st.size(); };
    const auto out = sim.run(0, rng, opts);
    if (out.terminal == Terminal::Fixation) EXPECT_EQ(last, 8u);
    if (out.terminal == Terminal::Extinction) EXPECT_EQ(last, 0u);
  }
}

TEST(Simulator, GrowFrequencyOnTriangle) {
  MoranSimulator sim(complete_graph(3), kBd2);
  Rng rng(12345);
  const int trials = 1'000'000;
  int grew = 0;
  for (int i = 0; i < trials; ++i) {
    auto st = sim.initial_state(0);
    grew += sim.step_active(st, rng).grew;
  }
  EXPECT_NEAR(grew / static_cast<double>(trials), 2.0 / 3, three_sigma(2.0 / 3, trials));
}

TEST(Simulator, GrowFromStarCentreHitsLeavesUniformly) {
  const std::size_t k = 6;
  MoranSimulator sim(star_graph(k), kBd2);
  Rng rng(2);
  std::vector<int> hits(k + 1, 0);
  const int events = 60000;
  for (int i = 0; i < events; ++i) {
    auto st = sim.initial_state(0);
    ++hits[st.sample_grow(rng)];
  }
  EXPECT_EQ(hits[0], 0);
  const double p = 1.0 / k;
  for (std::size_t leaf = 1; leaf <= k; ++leaf)
    EXPECT_NEAR(hits[leaf], events * p, 4 * std::sqrt(events * p * (1 - p)));
}

TEST(Simulator, PathShrinkAlwaysFlipsMiddle) {
  for (auto params : {kBd2, kDb2}) {
    MoranSimulator sim(path_graph(3), params);
    const Vertex x[] = {0, 1};
    auto st = sim.state_of(x);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(st.sample_shrink(rng), 1u);
  }
}

TEST(Simulator, RawStepsAtLeastActiveSteps) {
  MoranSimulator sim(complete_graph(10), kBd2);
  RunOptions opts;
  opts.count_raw_steps = true;
  Rng rng(8);
  double raw_total = 0;
  for (int i = 0; i < 200; ++i) {
    const auto out = sim.run(0, rng, opts);
    ASSERT_TRUE(out.raw_steps.has_value());
    EXPECT_GE(*out.raw_steps, out.active_steps);
    raw_total += *out.raw_steps;
  }
  EXPECT_GT(raw_total, 0);
}

// Aggregates after every flip of a long random walk against a full pass.
void check_aggregates(const Graph& g, ProcessParams params, std::uint64_t seed) {
  MoranSimulator sim(g, params);
  auto st = sim.initial_state(0);
  Rng rng(seed);
  int steps = 0;
  while (steps < 10'000) {
    if (st.absorbed()) st = sim.initial_state(static_cast<Vertex>(uniform_below(rng, g.num_vertices())));
    sim.step_active(st, rng);
    ++steps;
    const auto ref = direct_aggregates(g, st.membership(), params);
    const auto tol_up = 1e-9 * std::max(1.0, std::abs(ref.up));
    const auto tol_down = 1e-9 * std::max(1.0, std::abs(ref.down));
    ASSERT_NEAR(st.agg_up(), ref.up, tol_up) << "step " << steps;
    ASSERT_NEAR(st.agg_down(), ref.down, tol_down) << "step " << steps;
    const auto tp = st.transition_probs();
    ASSERT_GE(tp.p_plus, 0);
    ASSERT_GE(tp.p_minus, 0);
    ASSERT_LE(tp.p_plus + tp.p_minus, 1 + 1e-12);
    ASSERT_EQ(st.absorbed(), tp.p_plus == 0 && tp.p_minus == 0);
    const double w = (params.s - 1) * static_cast<double>(st.size()) + static_cast<double>(g.num_vertices());
    ASSERT_DOUBLE_EQ(st.fitness_total(), w);
  }
}

TEST(Aggregates, MatchRecomputeOnRandomGraph) {
  const auto g = generate_gnp(200, 0.05, 17);
  ASSERT_TRUE(g.is_connected());
  // s close to 1 keeps |X| wandering instead of fixing quickly.
  check_aggregates(g, {1.05, Variant::BirthDeath}, 1);
  check_aggregates(g, {1.05, Variant::DeathBirth}, 2);
  check_aggregates(g, {0.9, Variant::BirthDeath}, 3);
}

TEST(Aggregates, MatchRecomputeWithHubs) {
  // Star plus a sparse random layer: the centre exceeds the hub threshold.
  const std::size_t n = 400;
  std::vector<Edge> edges;
  for (Vertex v = 1; v < n; ++v) edges.push_back({0, v});
  Rng rng(4);
  std::set<Edge> extra;
  for (Vertex v = 2; v < 200; ++v) extra.insert({1, v});  // a second hub, adjacent to the first
  while (extra.size() < 300) {
    Vertex u = 1 + static_cast<Vertex>(uniform_below(rng, n - 1));
    Vertex v = 1 + static_cast<Vertex>(uniform_below(rng, n - 1));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    extra.insert({u, v});
  }
  edges.insert(edges.end(), extra.begin(), extra.end());
  const auto g = Graph::from_edges(n, edges);
  check_aggregates(g, {1.05, Variant::BirthDeath}, 5);
  check_aggregates(g, {0.95, Variant::BirthDeath}, 6);
  check_aggregates(g, {1.05, Variant::DeathBirth}, 7);
  check_aggregates(complete_graph(80), {1.02, Variant::BirthDeath}, 8);
}

TEST(Aggregates, HubStateMatchesSamplingLaw) {
  // Exact grow law from X = {centre, leaf 1} on a star with 60 leaves.
  const auto g = star_graph(60);
  MoranSimulator sim(g, kBd2);
  const Vertex x[] = {0, 1};
  auto st = sim.state_of(x);
  Rng rng(9);
  std::vector<int> hits(61, 0);
  const int draws = 59000;
  for (int i = 0; i < draws; ++i) ++hits[st.sample_grow(rng)];
  EXPECT_EQ(hits[0] + hits[1], 0);
  const double p = 1.0 / 59;
  for (Vertex v = 2; v <= 60; ++v) EXPECT_NEAR(hits[v], draws * p, 4.5 * std::sqrt(draws * p * (1 - p)));
  // Shrink: every mutant-adjacent resident is a leaf whose only neighbour is
  // the centre.
  for (int i = 0; i < 100; ++i) EXPECT_EQ(st.sample_shrink(rng), 0u);
}

TEST(Estimate, EdgeAgreesWithGamblerValue) {
  EstimateOptions opts;
  opts.runs = 100'000;
  opts.master_seed = 77;
  const auto e = estimate_fixation(complete_graph(2), 1, kBd2, opts);
  EXPECT_NEAR(e.p_hat, 2.0 / 3, three_sigma(2.0 / 3, 1e5));
  EXPECT_EQ(e.timeouts, 0u);
  EXPECT_EQ(e.fixations + e.extinctions, e.runs);
}

TEST(Estimate, NeutralCompleteGraph) {
  EstimateOptions opts;
  opts.runs = 20'000;
  const auto e = estimate_fixation(complete_graph(5), 0, {1.0, Variant::BirthDeath}, opts);
  EXPECT_NEAR(e.p_hat, 0.2, three_sigma(0.2, 2e4));
}

TEST(Estimate, SingleRun) {
  EstimateOptions opts;
  opts.runs = 1;
  const auto e = estimate_fixation(complete_graph(4), 0, kBd2, opts);
  EXPECT_TRUE(e.p_hat == 0.0 || e.p_hat == 1.0);
  EXPECT_TRUE(e.ci.contains(e.p_hat));
  opts.runs = 0;
  EXPECT_THROW(estimate_fixation(complete_graph(4), 0, kBd2, opts), ParameterError);
}

TEST(Estimate, IndependentOfThreadCount) {
  const auto g = generate_gnp(50, 0.15, 3);
  EstimateOptions opts;
  opts.runs = 3000;
  opts.master_seed = 42;
  opts.threads = 1;
  const auto a = estimate_fixation(g, 0, kDb2, opts);
  opts.threads = 4;
  const auto b = estimate_fixation(g, 0, kDb2, opts);
  EXPECT_EQ(a.fixations, b.fixations);
  EXPECT_EQ(a.extinctions, b.extinctions);
  EXPECT_EQ(a.p_hat, b.p_hat);
}

TEST(Estimate, TimeoutsAreExcludedAndFlagged) {
  EstimateOptions opts;
  opts.runs = 200;
  opts.max_active_steps = 2;
  const auto e = estimate_fixation(cycle_graph(30), 0, kBd2, opts);
  EXPECT_GT(e.timeouts, 0u);
  EXPECT_TRUE(e.timeout_warning);
  EXPECT_EQ(e.fixations, 0u);
  EXPECT_EQ(e.fixations + e.extinctions + e.timeouts, e.runs);
  if (e.runs > e.timeouts) EXPECT_EQ(e.p_hat, 0.0);
}

TEST(Monotonicity, FixationIncreasesWithFitness) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Graph g;
    std::uint64_t graph_seed = seed * 101 + 3;
    do g = generate_gnp(7, 0.45, graph_seed++);
    while (!g.is_connected());
    for (auto variant : {Variant::BirthDeath, Variant::DeathBirth}) {
      double prev = -1;
      for (double s : {1.0, 1.5, 2.0}) {
        const double f = exact_fixation(g, 0, {s, variant});
        EXPECT_GT(f, prev);
        prev = f;
      }
    }
  }
}

TEST(RatioSpotCheck, TypicalSetDriftNearFitness) {
  const std::size_t n = 3000;
  const double p = (std::log(3000.0) + 2) / n;
  Graph g;
  std::uint64_t seed = 1;
  do g = generate_gnp(n, p, seed++);
  while (!g.is_connected());
  const auto t = derive_thresholds(n, p, 0.3);
  const auto c = classify(g, t);
  std::vector<std::uint8_t> allowed(n, 1);
  for (Vertex v : c.s1) allowed[v] = 0;
  for (Vertex v : c.s0)
    for (Vertex u : g.neighbors(v)) allowed[u] = 0;
  Rng rng(31);
  int sets = 0;
  for (int attempt = 0; attempt < 200 && sets < 10; ++attempt) {
    const auto x = grow_random_subset(g, 50, rng, allowed);
    if (!x) continue;
    ++sets;
    const auto tp = MutantState(g, kBd2, *x).transition_probs();
    const double ratio = tp.p_plus / tp.p_minus;
    EXPECT_NEAR(ratio, 2.0, 0.5) << "set " << sets;
  }
  EXPECT_EQ(sets, 10);
}

}  // namespace
}  // namespace moranlab
