#include <gtest/gtest.h>

#include <cmath>

#include "spherecover/coverage.hpp"
#include "spherecover/experiments.hpp"
#include "spherecover/oracles.hpp"

using namespace spherecover;

namespace {

// E[U^2] integrated by hand: the integrand is a polynomial in θ on [0, 2π/N]
// and constant on [2π/N, π].
double variance_d2_antiderivative(std::int64_t N) {
  const double n = static_cast<double>(N);
  const double a = 1.0 - 1.0 / n;
  const double b = 1.0 - 2.0 / n;
  const double second =
      (2.0 * kPi / (n + 1.0) * (std::pow(a, n + 1.0) - std::pow(b, n + 1.0)) +
       (kPi - 2.0 * kPi / n) * std::pow(b, n)) /
      kPi;
  return second - std::pow(a, 2.0 * n);
}

}  // namespace

TEST(ExactMean, Examples) {
  EXPECT_DOUBLE_EQ(exact_mean(1), 1.0);
  EXPECT_DOUBLE_EQ(exact_mean(2), 0.75);
  EXPECT_NEAR(exact_mean(100000000), 1.0 - std::exp(-1.0), 1e-8);
  EXPECT_THROW(exact_mean(0), ParameterError);
}

TEST(ExactMean, RangeAndMonotonicity) {
  double prev = 1.0;
  for (std::int64_t n = 1; n <= 1000000; n = n < 10000 ? n + 1 : n * 11 / 10) {
    const double m = exact_mean(n);
    EXPECT_GT(m, 1.0 - std::exp(-1.0));
    EXPECT_LE(m, 1.0);
    EXPECT_LE(m, prev);
    prev = m;
  }
}

TEST(ExactVarianceD2, TwoCaps) { EXPECT_NEAR(exact_variance_d2(2), 1.0 / 48.0, 1e-10); }

TEST(ExactVarianceD2, MatchesClosedFormIntegral) {
  for (std::int64_t n : {2, 3, 5, 10, 50, 100, 400, 1000, 10000, 100000}) {
    const double expected = variance_d2_antiderivative(n);
    EXPECT_NEAR(exact_variance_d2(n), expected, 1e-8 * expected + 1e-15) << "N=" << n;
  }
}

TEST(ExactVarianceD2, Properties) {
  for (std::int64_t n = 2; n <= 2000; n += 37) {
    const double v = exact_variance_d2(n);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 0.25);
  }
  const double ratio = 50.0 * exact_variance_d2(50) / (200.0 * exact_variance_d2(200));
  EXPECT_NEAR(ratio, 1.0, 0.25);
  EXPECT_THROW(exact_variance_d2(1), ParameterError);
  EXPECT_THROW(exact_variance_d2(10, 16), ParameterError);
}

TEST(ExactVarianceD2, StableUnderNodeCount) {
  for (std::int64_t n : {7, 300}) {
    EXPECT_NEAR(exact_variance_d2(n, 64), exact_variance_d2(n, 16384),
                1e-10 * exact_variance_d2(n));
  }
}

TEST(Oracles, MonteCarloMeanAndVarianceOnCircle) {
  auto plan = ExperimentPlan::defaults(2, 10, 40000, 3);
  plan.threads = 4;
  const auto r = run_replications(plan);
  const auto& e = r.distribution;
  EXPECT_NEAR(e.mean, exact_mean(10), 4.0 * e.standard_error());
  // SE of the sample variance ≈ sqrt((μ4 - σ^4) / R).
  const double se_var =
      std::sqrt((e.fourth_central_moment - e.variance * e.variance) / 40000.0);
  EXPECT_NEAR(e.variance, exact_variance_d2(10), 4.0 * se_var);
}

TEST(Oracles, MonteCarloMeanOnS2) {
  auto plan = ExperimentPlan::defaults(3, 10, 10000, 4);
  plan.threads = 4;
  const auto r = run_replications(plan);
  EXPECT_NEAR(r.distribution.mean, exact_mean(10), 4.0 * r.distribution.standard_error());
}

TEST(PN, ClosedForms) {
  EXPECT_NEAR(exact_pN(ModelParams::make(2, 10)), 0.2, 1e-15);
  EXPECT_NEAR(exact_pN(ModelParams::make(3, 100)), 4.0 / 100 - 4.0 / 10000, 1e-14);
  EXPECT_THROW(exact_pN(ModelParams::make(3, 1)), ParameterError);
}

TEST(PN, BoundHoldsAndIsStrictAboveCircle) {
  for (std::int64_t n : {2, 3, 10, 1000, 100000}) {
    EXPECT_NEAR(exact_pN(ModelParams::make(2, n)), pN_bound(ModelParams::make(2, n)), 1e-15);
    for (int d = 3; d <= 10; ++d) {
      const auto p = ModelParams::make(d, n);
      EXPECT_LT(exact_pN(p), pN_bound(p)) << "d=" << d << " N=" << n;
    }
  }
}

TEST(PN, MatchesSampledCapPairs) {
  Stream rng(21);
  for (int d : {3, 4, 6}) {
    const auto p = ModelParams::make(d, 20);
    const int trials = 200000;
    int meet = 0;
    for (int k = 0; k < trials; ++k) {
      const auto a = sample_uniform_sphere(d, rng);
      const auto b = sample_uniform_sphere(d, rng);
      meet += caps_intersect(Cap(a, p.radius), Cap(b, p.radius)) ? 1 : 0;
    }
    const double q = exact_pN(p);
    EXPECT_NEAR(static_cast<double>(meet) / trials, q, 4.0 * std::sqrt(q * (1 - q) / trials));
  }
}

TEST(ShaoZhang, Examples) {
  EXPECT_DOUBLE_EQ(shao_zhang_bound(100, 1e-3, 0.0, 0.0, 0.0), 0.0);
  const double a = shao_zhang_bound(100, 1e-3, 1e-9, 1e-12, 1e-8);
  EXPECT_NEAR(shao_zhang_bound(100, 2e-3, 1e-9, 1e-12, 1e-8), a / 2, 1e-15 * a);
  EXPECT_THROW(shao_zhang_bound(100, 0.0, 0.0, 0.0, 0.0), ParameterError);
  EXPECT_THROW(shao_zhang_bound(100, 1.0, -1.0, 0.0, 0.0), ParameterError);
}

TEST(ShaoZhang, LemmaFormIsTheSubstitutedBound) {
  for (int d : {2, 3, 5}) {
    for (std::int64_t n : {3, 30, 1000, 100000}) {
      const auto params = ModelParams::make(d, n);
      const double p = exact_pN(params);
      const double var = 1e-3 / static_cast<double>(n);
      const double direct = shao_zhang_bound(n, var, delta1_bound(p, n), delta2_bound(p, n),
                                             m4_plugin(n));
      EXPECT_NEAR(shao_zhang_lemma_form(n, var, p), direct, 1e-12 * direct);
    }
  }
}

TEST(RateBound, Example) {
  const AbsoluteConstants k{0.5, 0.75, 1.5, 0.25};
  const auto r = rate_bound(ModelParams::make(3, 10000), k);
  EXPECT_NEAR(r.fixed_dimension, 72.0 * std::exp(1.5) * 0.5 * 64.0 / 100.0, 1e-10);
  EXPECT_NEAR(r.fixed_dimension, 103.26, 0.005);
}

TEST(RateBound, ScalesAsInverseSquareRootOfN) {
  const AbsoluteConstants k;
  for (int d : {2, 4}) {
    const double a = rate_bound(ModelParams::make(d, 1000), k).fixed_dimension;
    const double b = rate_bound(ModelParams::make(d, 4000), k).fixed_dimension;
    EXPECT_NEAR(b, a / 2, 1e-12 * a);
  }
}

TEST(RateBound, RegimeExponentSign) {
  AbsoluteConstants k;
  k.alpha = 0.9 * k.alpha_limit();
  EXPECT_TRUE(k.alpha_admissible());
  EXPECT_LT(rate_bound(ModelParams::make(2, 100), k).regime_exponent, 0.0);
  k.alpha = 1.1 * k.alpha_limit();
  EXPECT_FALSE(k.alpha_admissible());
  EXPECT_GT(rate_bound(ModelParams::make(2, 100), k).regime_exponent, 0.0);
}

TEST(AdmissibleDimension, Examples) {
  EXPECT_EQ(admissible_dimension(22027, 0.5), 5);
  EXPECT_EQ(admissible_dimension(100, 0.1), 2);
  int prev = 2;
  for (std::int64_t n = 2; n < 10000000; n = n * 3 / 2 + 1) {
    const int d = admissible_dimension(n, 0.3);
    EXPECT_GE(d, prev);
    prev = d;
  }
  EXPECT_THROW(admissible_dimension(100, 0.0), ParameterError);
}

TEST(VarianceSandwich, Shape) {
  AbsoluteConstants k{0.4, 0.4, 1.5, 0.25};
  for (int d : {2, 3, 6}) {
    const auto s = variance_sandwich(ModelParams::make(d, 100), k);
    EXPECT_LT(s.lower, s.upper);
    EXPECT_NEAR(s.upper / s.lower, std::exp(k.C1 - 1.0), 1e-12);
    const auto t = variance_sandwich(ModelParams::make(d, 200), k);
    EXPECT_NEAR(t.lower, s.lower / 2, 1e-15);
    EXPECT_NEAR(t.upper, s.upper / 2, 1e-15);
  }
}

TEST(AbsoluteConstants, Validation) {
  EXPECT_NO_THROW(AbsoluteConstants{}.validate());
  EXPECT_THROW((AbsoluteConstants{0.0, 0.5, 1.5, 0.2}.validate()), ParameterError);
  EXPECT_THROW((AbsoluteConstants{0.5, 1.0, 1.5, 0.2}.validate()), ParameterError);
  EXPECT_THROW((AbsoluteConstants{0.5, 0.5, 2.5, 0.2}.validate()), ParameterError);
  EXPECT_THROW((AbsoluteConstants{0.5, 0.5, 1.5, -1.0}.validate()), ParameterError);
}

TEST(BoundReport, UsesExactVarianceOnCircle) {
  const auto r = bound_report(ModelParams::make(2, 100), AbsoluteConstants{});
  EXPECT_EQ(r.variance_source, "exact_d2");
  EXPECT_DOUBLE_EQ(r.variance, exact_variance_d2(100));
  const auto s = bound_report(ModelParams::make(4, 100), AbsoluteConstants{});
  EXPECT_EQ(s.variance_source, "sandwich_lower");
  EXPECT_DOUBLE_EQ(s.variance, s.sandwich.lower);
}
