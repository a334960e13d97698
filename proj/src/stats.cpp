#include "moranlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "moranlab/errors.hpp"

namespace moranlab::stats {

double chernoff(const TailBoundQuery& query, Tail which) {
  if (!(query.trials >= 0) || !(query.p >= 0 && query.p <= 1)) {
    throw ParameterError("chernoff: need N >= 0 and p in [0,1]");
  }
  const double mean = query.trials * query.p;
  switch (which) {
    case Tail::Lower:
    case Tail::Upper: {
      if (!(query.theta >= 0 && query.theta <= 1)) {
        throw DomainError("chernoff: theta must lie in [0,1], got " +
                          std::to_string(query.theta));
      }
      const double denom = which == Tail::Lower ? 2.0 : 3.0;
      return std::exp(-query.theta * query.theta * mean / denom);
    }
    case Tail::Multiplier: {
      if (!(query.lambda > 0)) {
        throw DomainError("chernoff: lambda must be positive");
      }
      // (e/lambda)^(lambda N p), evaluated in log space.
      const double exponent = query.lambda * mean;
      return std::exp(exponent * (1.0 - std::log(query.lambda)));
    }
  }
  throw ParameterError("chernoff: unknown tail");
}

double normal_quantile(double prob) {
  if (!(prob > 0 && prob < 1)) {
    throw ParameterError("normal_quantile: probability must lie in (0,1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

Interval binomial_ci(std::uint64_t successes, std::uint64_t trials,
                     double confidence) {
  if (trials == 0) {
    throw ParameterError("binomial_ci: trials must be positive");
  }
  if (successes > trials) {
    throw ParameterError("binomial_ci: successes exceed trials");
  }
  if (!(confidence > 0 && confidence < 1)) {
    throw ParameterError("binomial_ci: confidence must lie in (0,1)");
  }
  const double z = normal_quantile(0.5 + confidence / 2);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (phat + z2 / (2 * n)) / (1 + z2 / n);
  const double half =
      z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // Pin the degenerate endpoints exactly; rounding can leave 1e-17 residue.
  if (successes == 0) ci.low = 0;
  if (successes == trials) ci.high = 1;
  return ci;
}

}  // namespace moranlab::stats
