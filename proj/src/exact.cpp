#include "moranlab/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "moranlab/errors.hpp"
#include "moranlab/tridiagonal.hpp"

namespace moranlab {

namespace {

// Flip rates of vertex y out of mutant set x, proportional to the raw-chain
// probabilities (the common 1/w or 1/n factor cancels in the jump chain).
double flip_rate(const Graph& g, const std::vector<std::uint32_t>& nb_mask, std::uint32_t x,
                 Vertex y, const ProcessParams& params) {
  const bool mutant = ((x >> y) & 1U) != 0;
  if (params.variant == Variant::BirthDeath) {
    // y adopts the type of a reproducing neighbour of the other type.
    double r = 0;
    for (Vertex v : g.neighbors(y)) {
      const bool v_mutant = ((x >> v) & 1U) != 0;
      if (v_mutant != mutant) r += 1.0 / static_cast<double>(g.degree(v));
    }
    return mutant ? r : params.s * r;
  }
  // y dies and is replaced by a fitness-weighted neighbour.
  const auto d = static_cast<double>(g.degree(y));
  const auto dx = static_cast<double>(std::popcount(nb_mask[y] & x));
  const double denom = params.s * dx + (d - dx);
  return mutant ? (d - dx) / denom : params.s * dx / denom;
}

std::vector<double> solve_subset_chain(const Graph& g, const ProcessParams& params,
                                       const ExactOptions& options, bool fixation) {
  validate(params);
  const auto n = g.num_vertices();
  if (n == 0) throw ParameterError("exact solve: graph has no vertices");
  if (n > options.max_vertices || n > 30) {
    throw CapacityError("exact solve: n=" + std::to_string(n) + " exceeds the cap of " +
                        std::to_string(options.max_vertices) + " vertices");
  }
  if (!g.is_connected()) throw StructureError("exact solve: graph is not connected");
  if (n == 1) return {fixation ? 1.0 : 0.0};

  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<std::uint32_t> nb_mask(n, 0);
  for (Vertex v = 0; v < n; ++v)
    for (Vertex u : g.neighbors(v)) nb_mask[v] |= std::uint32_t{1} << u;

  // Normalised jump-chain kernel, row X holds P(X -> X xor {y}).
  const std::size_t states = std::size_t{1} << n;
  std::vector<double> kernel(states * n, 0.0);
  for (std::uint32_t x = 1; x < full; ++x) {
    double total = 0;
    double* row = kernel.data() + std::size_t{x} * n;
    for (Vertex y = 0; y < n; ++y) {
      row[y] = flip_rate(g, nb_mask, x, y, params);
      total += row[y];
    }
    if (!(total > 0)) throw StructureError("exact solve: transient state without transitions");
    for (Vertex y = 0; y < n; ++y) row[y] /= total;
  }

  std::vector<double> f(states, 0.0);
  for (std::uint32_t x = 1; x < full; ++x) {
    const double frac = static_cast<double>(std::popcount(x)) / static_cast<double>(n);
    f[x] = fixation ? frac : 1 - frac;
  }
  f[0] = fixation ? 0.0 : 1.0;
  f[full] = fixation ? 1.0 : 0.0;

  auto relax = [&](std::uint32_t x) {
    const double* row = kernel.data() + std::size_t{x} * n;
    double next = 0;
    for (Vertex y = 0; y < n; ++y) next += row[y] * f[x ^ (std::uint32_t{1} << y)];
    const double change = std::abs(next - f[x]);
    f[x] = next;
    return change;
  };

  for (std::uint64_t sweep = 0;; ++sweep) {
    if (sweep >= options.max_sweeps) {
      throw CapacityError("exact solve: no convergence within " + std::to_string(options.max_sweeps) +
                          " sweeps");
    }
    double residual = 0;
    // Symmetric sweep: increasing then decreasing set order.
    for (std::uint32_t x = 1; x < full; ++x) residual = std::max(residual, relax(x));
    for (std::uint32_t x = full - 1; x >= 1; --x) relax(x);
    if (residual < options.tolerance) break;
  }

  std::vector<double> out(n);
  for (Vertex v = 0; v < n; ++v) out[v] = f[std::uint32_t{1} << v];
  return out;
}

}  // namespace

std::vector<double> exact_fixation_all(const Graph& g, const ProcessParams& params,
                                       const ExactOptions& options) {
  return solve_subset_chain(g, params, options, true);
}

double exact_fixation(const Graph& g, Vertex v0, const ProcessParams& params,
                      const ExactOptions& options) {
  if (v0 >= g.num_vertices()) throw ParameterError("exact_fixation: v0 out of range");
  return exact_fixation_all(g, params, options)[v0];
}

std::vector<double> exact_extinction_all(const Graph& g, const ProcessParams& params,
                                         const ExactOptions& options) {
  return solve_subset_chain(g, params, options, false);
}

double classical_fixation(std::size_t n, double s) {
  if (n == 0) throw ParameterError("classical_fixation: n must be positive");
  if (!(s > 0)) throw ParameterError("classical_fixation: s must be positive");
  if (s == 1) return 1.0 / static_cast<double>(n);
  return -std::expm1(-std::log(s)) / -std::expm1(-static_cast<double>(n) * std::log(s));
}

std::vector<double> neutral_fixation(const Graph& g, Variant variant) {
  const auto n = g.num_vertices();
  std::vector<double> w(n);
  double total = 0;
  for (Vertex v = 0; v < n; ++v) {
    const auto d = static_cast<double>(g.degree(v));
    if (d == 0) throw StructureError("neutral_fixation: isolated vertex");
    w[v] = variant == Variant::BirthDeath ? 1.0 / d : d;
    total += w[v];
  }
  for (auto& x : w) x /= total;
  return w;
}

double gambler_phi(double ratio, std::int64_t z0, std::int64_t z1) {
  if (!(ratio < 1)) throw DomainError("gambler_phi: need r = beta/alpha < 1, got " + std::to_string(ratio));
  if (!(ratio > 0)) throw ParameterError("gambler_phi: need r > 0");
  if (z0 < 0 || z0 > z1) throw ParameterError("gambler_phi: need 0 <= z0 <= z1");
  if (z0 == 0) return 1.0;
  const double lr = std::log(ratio);
  const double rz0 = std::exp(static_cast<double>(z0) * lr);
  const double rz1 = std::exp(static_cast<double>(z1) * lr);
  return (rz0 - rz1) / -std::expm1(static_cast<double>(z1) * lr);
}

double gambler_phi(const WalkClosedFormQuery& query) {
  return gambler_phi(query.ratio, query.z0, query.z1);
}

double expected_duration(const WalkClosedFormQuery& q) {
  if (q.a < 0 || q.a > q.m) throw ParameterError("expected_duration: need 0 <= a <= m");
  if (!(q.alpha > q.beta) || !(q.beta > 0)) {
    throw DomainError("expected_duration: need alpha > beta > 0");
  }
  if (q.m == 0) return 0;
  const double r = q.beta / q.alpha;
  const double gap = q.alpha - q.beta;
  const auto a = static_cast<double>(q.a);
  const auto m = static_cast<double>(q.m);
  return m / gap * (1 - std::pow(r, a)) / (1 - std::pow(r, m)) + a / gap;
}

double oracle_duration(const WalkClosedFormQuery& q) {
  if (q.a < 0 || q.a > q.m) throw ParameterError("oracle_duration: need 0 <= a <= m");
  if (!(q.alpha > 0 && q.beta > 0 && q.alpha + q.beta <= 1 + 1e-12)) {
    throw ParameterError("oracle_duration: need alpha, beta > 0 and alpha + beta <= 1");
  }
  if (q.a == 0 || q.a == q.m) return 0;
  // Unknowns E_1..E_{m-1}: (alpha+beta) E_j - alpha E_{j+1} - beta E_{j-1} = 1.
  const auto k = static_cast<std::size_t>(q.m - 1);
  std::vector<double> lower(k, -q.beta);
  std::vector<double> diag(k, q.alpha + q.beta);
  std::vector<double> upper(k, -q.alpha);
  std::vector<double> rhs(k, 1.0);
  return solve_tridiagonal(lower, diag, upper, rhs)[static_cast<std::size_t>(q.a - 1)];
}

}  // namespace moranlab
