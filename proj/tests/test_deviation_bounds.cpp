#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dmed/deviation_bounds.hpp"

namespace dmed {
namespace {

// kl(0.5, 0.7) from direct arithmetic.
constexpr double kKlHalfSeven = 0.0871766935723888764;

std::vector<ArmModel> families() {
  return {Bernoulli{0.7}, TwoPoint{-2.0, 0.5, 0.6}, UniformInterval{-1.0, 1.0}, ShiftedNegExponential{1.0},
          ShiftedNegGamma{2.5, 3.0}, FiniteSupport{{-4.0, -1.0, 0.25, 1.0}, {0.1, 0.2, 0.3, 0.4}}};
}

double grid_legendre(const ArmModel& m, double x, double lo, double hi) {
  double best = 0.0;
  for (int k = 0; k <= 2'000'000; ++k) {
    const double l = lo + (hi - lo) * k / 2'000'000.0;
    best = std::max(best, l * x - log_mgf(m, l));
  }
  return best;
}

TEST(Legendre, ZeroAtMean) {
  for (const auto& m : families()) {
    const auto p = legendre(m, mean(m));
    EXPECT_LE(p.value, 1e-10);
    EXPECT_EQ(p.lambda_star, 0.0);
  }
}

TEST(Legendre, BernoulliIsBinaryDivergence) {
  const auto p = legendre(Bernoulli{0.7}, 0.5);
  EXPECT_NEAR(p.value, kKlHalfSeven, 1e-12);
  EXPECT_NEAR(p.value, grid_legendre(Bernoulli{0.7}, 0.5, -5.0, 5.0), 1e-9);
  // lambda* = log(x(1-p) / ((1-x)p))
  EXPECT_NEAR(p.lambda_star, std::log(0.3 / 0.7), 1e-6);
}

TEST(Legendre, ShiftedExponential) {
  const auto p = legendre(ShiftedNegExponential{1.0}, -1.0);
  EXPECT_NEAR(p.lambda_star, -0.5, 1e-6);
  EXPECT_NEAR(p.value, 1.0 - std::log(2.0), 1e-12);
  EXPECT_NEAR(p.value, grid_legendre(ShiftedNegExponential{1.0}, -1.0, -0.999999, 3.0), 1e-9);
}

TEST(Legendre, OutsideSupportHull) {
  EXPECT_TRUE(std::isinf(legendre(Bernoulli{0.7}, 1.2).value));
  EXPECT_TRUE(std::isinf(legendre(Bernoulli{0.7}, -0.1).value));
  EXPECT_TRUE(std::isinf(legendre(ShiftedNegExponential{1.0}, 1.5).value));
  EXPECT_TRUE(std::isinf(legendre(UniformInterval{-1.0, 0.5}, 0.5).value));
  // Hull endpoints of a discrete law: -log P(X = x).
  EXPECT_NEAR(legendre(Bernoulli{0.7}, 1.0).value, -std::log(0.7), 1e-15);
  EXPECT_NEAR(legendre(Bernoulli{0.7}, 0.0).value, -std::log(0.3), 1e-15);
}

TEST(Legendre, ConvexAndChernoffShaped) {
  for (const auto& m : families()) {
    const auto hull = support_hull(m);
    const double lo = std::isfinite(hull.lo) ? hull.lo : mean(m) - 4.0;
    const double mu = mean(m);
    std::vector<double> xs, vs;
    for (int k = 1; k < 60; ++k) {
      xs.push_back(lo + (hull.hi - lo) * k / 60.0);
      vs.push_back(legendre(m, xs.back()).value);
      EXPECT_GE(vs.back(), 0.0);
    }
    for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
      EXPECT_LE(vs[k], 0.5 * (vs[k - 1] + vs[k + 1]) + 1e-8) << family_name(m) << " x=" << xs[k];
      if (xs[k + 1] < mu) {
        EXPECT_GE(vs[k], vs[k + 1] - 1e-12) << family_name(m);
      }
      if (xs[k - 1] > mu) {
        EXPECT_GE(vs[k], vs[k - 1] - 1e-12) << family_name(m);
      }
    }
  }
}

TEST(RateUI, Examples) {
  EXPECT_NEAR(rate_u_I(0.1, 0.0, 0.5), 0.01 / 8.326, 1e-15);
  EXPECT_NEAR(rate_u_I(0.1, 0.0, 0.5), 0.0012010569300984866, 1e-15);
  EXPECT_NEAR(rate_u_I(3.0, 0.0, 0.5), 0.979625, 1e-12);
  EXPECT_THROW(rate_u_I(0.1, 0.0, 1.0), DomainError);
}

TEST(RateUI, ContinuousAtBreakpointAndPositive) {
  for (double mean_f : {-3.0, 0.0, 0.4}) {
    for (double mu : {-1.0, 0.5, 0.95}) {
      const double s = kRateConstantC0 + (1 - mean_f) / (1 - mu);
      EXPECT_NEAR(rate_u_I(s / 2, mean_f, mu), s / 8, 1e-14);
      EXPECT_NEAR(rate_u_I(s / 2 * (1 + 1e-12), mean_f, mu), s / 8, 1e-10);
      for (double v : {1e-6, 0.01, 1.0, 10.0, 100.0}) EXPECT_GT(rate_u_I(v, mean_f, mu), 0.0);
    }
  }
}

TEST(LowerDevBound, Examples) {
  EXPECT_EQ(lower_dev_bound(0, 0.1, 0.0, 0.5), 1.0);
  EXPECT_NEAR(lower_dev_bound(100, 0.1, 0.0, 0.5), 0.886826700380429630, 1e-12);
  EXPECT_NEAR(lower_dev_bound(1000, 0.1, 0.0, 0.5), 0.300876038857100671, 1e-12);
  EXPECT_THROW(lower_dev_bound(10, 0.1, 0.5, 0.5), DomainError);
}

TEST(UpperDevBound, Examples) {
  EXPECT_NEAR(upper_dev_bound(10, 0.3, 0.5), 2 * std::exp(-5.0), 1e-15);
  EXPECT_NEAR(upper_dev_bound(10, 0.3, 0.5), 0.0134758939981709342, 1e-15);
  EXPECT_NEAR(upper_dev_bound(10, 1.0, 0.5), 0.00271501568990695009, 1e-15);
  EXPECT_EQ(upper_dev_bound(1, 0.1, 0.05), 1.0);
  EXPECT_THROW(upper_dev_bound(0, 0.1, 0.05), DomainError);
}

TEST(DevBounds, ProbabilitiesNonincreasingInT) {
  for (double v : {0.01, 0.2, 3.0}) {
    double prev = 1.0;
    for (std::uint64_t t = 1; t < 5000; t += 37) {
      const double b = lower_dev_bound(t, v, 0.1, 0.8);
      EXPECT_GE(b, 0.0);
      EXPECT_LE(b, prev);
      prev = b;
    }
  }
  for (double u : {0.01, 0.087, 0.5}) {
    double prev = 1.0;
    for (std::uint64_t t = 1; t < 3000; t += 13) {
      const double b = upper_dev_bound(t, u, 0.087);
      EXPECT_GE(b, 0.0);
      EXPECT_LE(b, 1.0);
      EXPECT_LE(b, prev);
      prev = b;
    }
  }
}

const std::vector<ArmModel> kTwoBernoulli{Bernoulli{0.7}, Bernoulli{0.5}};

TEST(RegretBound, TwoArmedBernoulli) {
  const auto rep = regret_bound(kTwoBernoulli, 1, 100'000, 0.5, 0.01, 0.1);
  EXPECT_NEAR(rep.dinf_true, kKlHalfSeven, 1e-12);
  EXPECT_NEAR(rep.xi, 0.0102550134528611048, 1e-12);
  EXPECT_NEAR(rep.log_coeff, 25.4910129205228051, 1e-9);
  EXPECT_DOUBLE_EQ(rep.mu_star, 0.7);
  EXPECT_DOUBLE_EQ(rep.mu_prime, 0.5);
  ASSERT_EQ(rep.optimal_arms, std::vector<std::size_t>{0});
}

TEST(RegretBound, ConstantRecomputedTermByTerm) {
  // Second evaluation of every summand straight from the formula.
  const auto rep = regret_bound(kTwoBernoulli, 1, 100'000, 0.5, 0.01, 0.1);
  const double K = 2.0;
  const double s = kRateConstantC0 + (1 - 0.5) / (1 - 0.7);
  const double u = rep.xi * rep.xi / (2 * s);
  const double t1 = 1 / (1 - std::exp(-u));
  // Lambda* of a Bernoulli is the binary divergence.
  auto kl = [](double x, double p) { return x * std::log(x / p) + (1 - x) * std::log((1 - x) / (1 - p)); };
  const double l_opt_lo = kl(0.69, 0.7);
  const double l_opt_hi = kl(0.51, 0.7);
  const double l_sub_hi = kl(0.51, 0.5);
  const double t2 = K / (1 - std::exp(-l_opt_lo));
  const double t3 = K / (1 - std::exp(-l_sub_hi));
  const double q = 1 - std::exp(-0.1 * l_opt_hi);
  const double t4 = 2 * (1 + K) / (1 - std::exp(-l_opt_hi)) + 2 * std::numbers::e / (0.1 * q * q);
  EXPECT_NEAR(rep.components.u_I, u, 1e-15);
  EXPECT_NEAR(rep.components.index_term, t1, 1e-9 * t1);
  EXPECT_NEAR(rep.components.optimal_term, t2, 1e-8 * t2);
  EXPECT_NEAR(rep.components.suboptimal_term, t3, 1e-8 * t3);
  EXPECT_NEAR(rep.components.min_optimal_term, t4, 1e-8 * t4);
  EXPECT_NEAR(rep.constant_C, t1 + t2 + t3 + t4, 1e-8 * rep.constant_C);
  EXPECT_NEAR(rep.constant_C, rep.components.sum(), 1e-12 * rep.constant_C);
  EXPECT_NEAR(rep.total(), rep.log_coeff * std::log(1e5) + rep.constant_C, 1e-9);
}

TEST(RegretBound, InfeasibleParameters) {
  EXPECT_THROW(regret_bound(kTwoBernoulli, 1, 1000, 0.5, 0.25, 0.1), InfeasibleParameters);
  EXPECT_THROW(regret_bound(kTwoBernoulli, 1, 1000, 0.01, 0.1, 0.1), InfeasibleParameters);
  EXPECT_THROW(regret_bound(kTwoBernoulli, 0, 1000, 0.5, 0.01, 0.1), InfeasibleParameters);
  EXPECT_THROW(regret_bound(kTwoBernoulli, 1, 1000, 0.5, 0.01, 0.0), InfeasibleParameters);
  const std::vector<ArmModel> top_at_one{Bernoulli{1.0}, Bernoulli{0.5}};
  EXPECT_THROW(regret_bound(top_at_one, 1, 1000, 0.5, 0.01, 0.1), InfeasibleParameters);
  try {
    regret_bound(kTwoBernoulli, 1, 1000, 0.01, 0.1, 0.1);
  } catch (const InfeasibleParameters& e) {
    EXPECT_NE(std::string(e.what()).find("xi"), std::string::npos);
  }
}

TEST(RegretBound, MultipleOptimalArms) {
  const std::vector<ArmModel> truth{Bernoulli{0.7}, Bernoulli{0.5}, TwoPoint{0.4, 1.0, 0.5}, Bernoulli{0.2}};
  const auto rep = regret_bound(truth, 3, 10'000, 0.5, 0.02, 0.2);
  EXPECT_EQ(rep.optimal_arms, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(rep.rates_at_mu_star_minus_delta.size(), 2u);
  EXPECT_EQ(rep.rates_at_mu_prime_plus_delta.size(), 4u);
  EXPECT_NEAR(rep.constant_C, rep.components.sum(), 1e-12 * rep.constant_C);
}

TEST(OptimizeBoundParams, DominatesFixedPoint) {
  const auto fixed = regret_bound(kTwoBernoulli, 1, 100'000, 0.5, 0.01, 0.1);
  const auto best = optimize_bound_params(kTwoBernoulli, 1, 100'000, 0.1);
  EXPECT_LE(best.report.total(), fixed.total());
  EXPECT_GT(best.report.xi, 0.0);
  EXPECT_GT(best.delta, 0.0);
  EXPECT_LT(best.delta, 0.2);
}

TEST(OptimizeBoundParams, SingleFeasiblePoint) {
  const BoundGrid grid{{0.5}, {0.01}};
  const auto best = optimize_bound_params(kTwoBernoulli, 1, 1000, 0.1, grid);
  EXPECT_EQ(best.epsilon, 0.5);
  EXPECT_EQ(best.delta, 0.01);
}

TEST(OptimizeBoundParams, AllInfeasible) {
  const BoundGrid grid{{0.1, 0.5}, {0.25, 0.3}};
  EXPECT_THROW(optimize_bound_params(kTwoBernoulli, 1, 1000, 0.1, grid), InfeasibleParameters);
}

}  // namespace
}  // namespace dmed
