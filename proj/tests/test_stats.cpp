#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "moranlab/errors.hpp"
#include "moranlab/stats.hpp"

namespace moranlab::stats {
namespace {

TEST(Chernoff, ZeroDeviationIsTrivial) {
  TailBoundQuery q{100, 0.3, 0.0, 1};
  EXPECT_DOUBLE_EQ(chernoff(q, Tail::Lower), 1.0);
  EXPECT_DOUBLE_EQ(chernoff(q, Tail::Upper), 1.0);
}

TEST(Chernoff, MultiplierAtEIsOne) {
  TailBoundQuery q{100, 0.3, 0.0, std::exp(1.0)};
  EXPECT_NEAR(chernoff(q, Tail::Multiplier), 1.0, 1e-12);
}

TEST(Chernoff, LowerTailExample) {
  // theta^2 N p / 2 = 0.04 * 50 / 2 = 1
  TailBoundQuery q{100, 0.5, 0.2, 1};
  EXPECT_NEAR(chernoff(q, Tail::Lower), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(chernoff(q, Tail::Upper), std::exp(-2.0 / 3.0), 1e-12);
}

TEST(Chernoff, MultiplierFormula) {
  TailBoundQuery q{10, 0.2, 0.0, 4};
  EXPECT_NEAR(chernoff(q, Tail::Multiplier), std::pow(std::exp(1.0) / 4, 8.0), 1e-12);
}

TEST(Chernoff, DecreasesInThetaAndMean) {
  for (Tail t : {Tail::Lower, Tail::Upper}) {
    double prev = 2;
    for (double theta = 0.1; theta <= 1.0; theta += 0.1) {
      const double b = chernoff({100, 0.5, theta, 1}, t);
      EXPECT_LT(b, prev);
      prev = b;
    }
    prev = 2;
    for (double n = 10; n <= 1000; n *= 2) {
      const double b = chernoff({n, 0.5, 0.3, 1}, t);
      EXPECT_LT(b, prev);
      prev = b;
    }
  }
}

TEST(Chernoff, RejectsThetaOutsideUnitInterval) {
  EXPECT_THROW(chernoff({100, 0.5, 1.5, 1}, Tail::Lower), DomainError);
  EXPECT_THROW(chernoff({100, 0.5, -0.1, 1}, Tail::Upper), DomainError);
}

TEST(BinomialCi, WilsonExample) {
  // Pre-computed: centre 0.5, half width z sqrt(1/400 + z^2/40000) / (1 + z^2/100).
  const double z = 1.959963984540054;
  const double half = z * std::sqrt(0.0025 + z * z / 40000) / (1 + z * z / 100);
  const auto ci = binomial_ci(50, 100, 0.95);
  EXPECT_NEAR(ci.low, 0.5 - half, 1e-12);
  EXPECT_NEAR(ci.high, 0.5 + half, 1e-12);
  EXPECT_NEAR(ci.low, 0.4038, 1e-4);
  EXPECT_NEAR(ci.high, 0.5962, 1e-4);
}

TEST(BinomialCi, Boundaries) {
  EXPECT_DOUBLE_EQ(binomial_ci(0, 37, 0.95).low, 0.0);
  EXPECT_DOUBLE_EQ(binomial_ci(37, 37, 0.95).high, 1.0);
  const auto one = binomial_ci(1, 1, 0.95);
  EXPECT_TRUE(one.contains(1.0));
  EXPECT_GT(one.low, 0.0);
}

TEST(BinomialCi, ContainsPointEstimateAndStaysInUnitInterval) {
  for (std::uint64_t k = 0; k <= 20; ++k) {
    const auto ci = binomial_ci(k, 20, 0.9);
    EXPECT_TRUE(ci.contains(k / 20.0));
    EXPECT_GE(ci.low, 0.0);
    EXPECT_LE(ci.high, 1.0);
  }
}

TEST(BinomialCi, NestedByConfidence) {
  for (std::uint64_t k : {0, 3, 50, 97, 100}) {
    const auto narrow = binomial_ci(k, 100, 0.95);
    const auto wide = binomial_ci(k, 100, 0.99);
    EXPECT_LE(wide.low, narrow.low);
    EXPECT_GE(wide.high, narrow.high);
  }
}

TEST(BinomialCi, RejectsBadInput) {
  EXPECT_THROW(binomial_ci(0, 0, 0.95), ParameterError);
  EXPECT_THROW(binomial_ci(5, 4, 0.95), ParameterError);
  EXPECT_THROW(binomial_ci(1, 4, 1.0), ParameterError);
}

TEST(BinomialCi, CalibrationSmoke) {
  std::mt19937_64 rng(20240601);
  std::binomial_distribution<std::uint64_t> draw(500, 0.3);
  int covered = 0;
  for (int i = 0; i < 1000; ++i) covered += binomial_ci(draw(rng), 500, 0.95).contains(0.3);
  EXPECT_GE(covered, 930);
}

TEST(NormalQuantile, KnownValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
}

}  // namespace
}  // namespace moranlab::stats
