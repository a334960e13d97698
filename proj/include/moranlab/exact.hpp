#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "moranlab/graph.hpp"
#include "moranlab/moran.hpp"

namespace moranlab {

struct ExactOptions {
  std::size_t max_vertices = 16;
  double tolerance = 1e-12;  // max residual of the fixed-point equations
  std::uint64_t max_sweeps = 1'000'000;
};

// Fixation probability from every single-vertex start, by solving the
// absorbing chain over all 2^n mutant sets. Entry v is f({v}).
std::vector<double> exact_fixation_all(const Graph& g, const ProcessParams& params,
                                       const ExactOptions& options = {});
double exact_fixation(const Graph& g, Vertex v0, const ProcessParams& params,
                      const ExactOptions& options = {});

// Same chain, absorbing value 1 at the empty set instead of the full set.
// Solved independently so that fixation + extinction = 1 is a real check.
std::vector<double> exact_extinction_all(const Graph& g, const ProcessParams& params,
                                         const ExactOptions& options = {});

// (1 - 1/s) / (1 - 1/s^n): the complete graph and every regular graph;
// 1/n at s = 1.
double classical_fixation(std::size_t n, double s);

// f({v}) at s = 1: d(v)^-1 / sum d^-1 for Birth-Death, d(v) / sum d for
// Death-Birth.
std::vector<double> neutral_fixation(const Graph& g, Variant variant);

// Biased walk on {0..z1} stepping up w.p. alpha, down w.p. beta.
struct WalkClosedFormQuery {
  double ratio = 0.5;  // r = beta / alpha
  std::int64_t z0 = 0;  // start
  std::int64_t z1 = 0;  // right absorbing state
  double alpha = 0;
  double beta = 0;
  std::int64_t a = 0;  // duration: start
  std::int64_t m = 0;  // duration: right absorbing state
};

// Probability of absorption at 0: (r^z0 - r^z1) / (1 - r^z1).
double gambler_phi(const WalkClosedFormQuery& query);
double gambler_phi(double ratio, std::int64_t z0, std::int64_t z1);

// Expected duration from a, evaluated exactly as the formula
//   m/(alpha-beta) * (1 - r^a)/(1 - r^m) + a/(alpha-beta)
// is written. This does not agree with the true absorption time (it gives
// 2m/(alpha-beta) at a = m); oracle_duration() is the correct value.
double expected_duration(const WalkClosedFormQuery& query);

// Expected number of raw steps to absorption at 0 or m from a, solving
// E_j = 1 + alpha E_{j+1} + beta E_{j-1} + (1 - alpha - beta) E_j exactly.
double oracle_duration(const WalkClosedFormQuery& query);

}  // namespace moranlab
