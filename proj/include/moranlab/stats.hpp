#pragma once

#include <cstdint>

namespace moranlab::stats {

// Parameters of a Binomial(N, p) tail query.
struct TailBoundQuery {
  double trials = 0;  // N
  double p = 0;
  double theta = 0;   // relative deviation, [0, 1]
  double lambda = 1;  // multiplier, > 0
};

enum class Tail {
  Lower,      // P(B <= (1 - theta) N p) <= exp(-theta^2 N p / 2)
  Upper,      // P(B >= (1 + theta) N p) <= exp(-theta^2 N p / 3)
  Multiplier  // P(B >= lambda N p)      <= (e / lambda)^(lambda N p)
};

double chernoff(const TailBoundQuery& query, Tail which);

struct Interval {
  double low = 0;
  double high = 1;

  bool contains(double x) const { return low <= x && x <= high; }
};

// Wilson score interval for `successes` out of `trials` at two-sided
// confidence `confidence` (e.g. 0.95).
Interval binomial_ci(std::uint64_t successes, std::uint64_t trials,
                     double confidence);

// Standard normal quantile z with P(Z <= z) = prob.
double normal_quantile(double prob);

}  // namespace moranlab::stats
