#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moranlab/graph.hpp"
#include "moranlab/moran.hpp"

namespace moranlab {

enum class V0Rule {
  Explicit,
  Uniform,
  UniformConditioned,  // v0 outside S1 with no neighbour in S0
  MinDegree            // a minimum-degree vertex, required to lie in S0
};

V0Rule parse_v0_rule(const std::string& name);
std::string v0_rule_name(V0Rule rule);
Variant parse_variant(const std::string& name);
std::string variant_name(Variant variant);

struct ExperimentSpec {
  std::string command = "theorem";
  // Exactly one graph source: a file, or G(n, p).
  std::optional<std::string> graph_file;
  std::size_t n = 0;
  double p = 0;

  ProcessParams process;
  V0Rule v0_rule = V0Rule::Uniform;
  std::optional<Vertex> v0;  // for V0Rule::Explicit
  std::uint64_t runs = 1000;
  std::uint64_t master_seed = 1;
  std::optional<double> eps = 0.3;
  unsigned threads = 1;
  std::uint64_t max_steps = 10'000'000;
  std::uint64_t retry_budget = 10'000;

  void check() const;
};

// The graph and start vertex an experiment actually ran on.
struct Realization {
  Graph graph;
  ThresholdParams thresholds;
  VertexClasses classes;
  Vertex v0 = 0;
  std::uint64_t graph_seed = 0;  // meaningful for generated graphs
  std::uint64_t attempts = 0;    // graphs drawn before the conditioning held
};

// Draws graphs (derive_seed-keyed per attempt) and a start vertex until the
// rule's event holds and the graph is connected. Throws ConditioningError
// when the retry budget runs out.
Realization realize(const ExperimentSpec& spec);

// Theorem case label of the start vertex: BDF1-5 / DBF1-5, or
// "unclassified" when no case hypothesis matches.
std::string case_label(const Graph& g, const ThresholdParams& t, const VertexClasses& c, Vertex v0,
                       Variant variant);

struct Target {
  std::string text;             // e.g. "(s-1)/s", "1-p_1(bdf3)"
  std::optional<double> value;  // absent for purely asymptotic statements
};

Target theorem_target(const Graph& g, const ThresholdParams& t, const VertexClasses& c, Vertex v0,
                      const ProcessParams& params, const std::string& label);

struct ResultRecord {
  ExperimentSpec spec;
  Realization realized;
  std::string label;
  Target target;
  Estimate estimate;
  double wall_seconds = 0;
};

ResultRecord cmd_theorem_check(const ExperimentSpec& spec);

// JSON rendering; the numeric payload is a pure function of the ExperimentSpec.
std::string to_json(const ResultRecord& record);
std::string estimate_json(const Estimate& e);

}  // namespace moranlab
