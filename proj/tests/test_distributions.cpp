#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rode/distributions.hpp"
#include "rode/parallel.hpp"

using namespace rode;

namespace {

double sample_mean(const Distribution& d, int n, std::uint64_t seed, double* var = nullptr) {
  Rng rng(seed);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = d.sample(rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  if (var) *var = (s2 - n * mean * mean) / (n - 1);
  return mean;
}

}  // namespace

TEST(Distribution, UniformHeight) { EXPECT_DOUBLE_EQ(Distribution::uniform(1.0, 2.0).pdf(1.5), 1.0); }

TEST(Distribution, QuarticCauchyAtZero) {
  EXPECT_NEAR(Distribution::quartic_cauchy().pdf(0.0), std::sqrt(2.0) / std::numbers::pi, 1e-15);
  EXPECT_NEAR(Distribution::quartic_cauchy().pdf(0.0), 0.450158, 1e-6);
}

TEST(Distribution, NormalPeakWithBrownianIntegralVariance) {
  EXPECT_NEAR(Distribution::normal(0.0, 1.0 / 24.0).pdf(0.0), 1.954410, 1e-6);
}

TEST(Distribution, PdfMatchesReferenceImplementations) {
  for (double x : {-1.0, 0.05, 0.3, 0.5, 0.9, 1.7, 3.0}) {
    EXPECT_NEAR(Distribution::normal(0.3, 2.0).pdf(x), oracle::normal_pdf(x, 0.3, 2.0), 1e-14);
    EXPECT_NEAR(Distribution::beta(5.0, 6.0).pdf(x), oracle::beta_pdf(x, 5.0, 6.0), 1e-12);
    EXPECT_NEAR(Distribution::gamma(4.0, 9.0).pdf(x), oracle::gamma_pdf(x, 4.0, 9.0), 1e-12);
    EXPECT_NEAR(Distribution::quartic_cauchy().pdf(x), oracle::quartic_cauchy_pdf(x), 1e-15);
  }
}

TEST(Distribution, ParameterConstraints) {
  EXPECT_THROW(Distribution::normal(0.0, 0.0), ValidationError);
  EXPECT_THROW(Distribution::uniform(2.0, 1.0), ValidationError);
  EXPECT_THROW(Distribution::beta(0.0, 1.0), ValidationError);
  EXPECT_THROW(Distribution::gamma(1.0, -1.0), ValidationError);
}

TEST(Distribution, CustomMassChecked) {
  dist::Custom bad{[](double) { return 0.5; }, {0.0, 1.0}, {}, {}, "half"};
  EXPECT_THROW(Distribution::custom(bad), ValidationError);
  dist::Custom neg{[](double x) { return x < 0.5 ? -1.0 : 3.0; }, {0.0, 1.0}, {}, {}, "neg"};
  EXPECT_THROW(Distribution::custom(neg), ValidationError);
  dist::Custom tri{[](double x) { return 2.0 * x; }, {0.0, 1.0}, {}, {}, "triangle"};
  const auto d = Distribution::custom(tri);
  EXPECT_NEAR(d.mean(), 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(d.variance(), 1.0 / 18.0, 1e-10);
  Rng rng(1);
  EXPECT_THROW(d.sample(rng), UnsupportedOperation);
}

TEST(Distribution, CoefficientLawMustBeStandardized) {
  EXPECT_NO_THROW(Distribution::standard_normal().require_standardized());
  EXPECT_NO_THROW(Distribution::quartic_cauchy().require_standardized());
  EXPECT_NO_THROW(Distribution::uniform(-std::sqrt(3.0), std::sqrt(3.0)).require_standardized());
  EXPECT_THROW(Distribution::uniform(1.0, 2.0).require_standardized(), ValidationError);
  EXPECT_THROW(Distribution::normal(0.0, 2.0).require_standardized(), ValidationError);
}

TEST(Distribution, QuarticCauchyUnitVarianceByQuadrature) {
  const double v = oracle::simpson(
      [](double u) {
        // x = tan(u) maps (-pi/2, pi/2) onto the line.
        const double x = std::tan(u);
        const double c = std::cos(u);
        return x * x * oracle::quartic_cauchy_pdf(x) / (c * c);
      },
      -oracle::pi / 2 + 1e-9, oracle::pi / 2 - 1e-9, 400000);
  EXPECT_NEAR(v, 1.0, 1e-5);
  EXPECT_NEAR(Distribution::quartic_cauchy().variance(), 1.0, 1e-8);
}

TEST(Distribution, SampleMomentIdentities) {
  const int n = 100000;
  const auto u = Distribution::uniform(-std::sqrt(3.0), std::sqrt(3.0));
  EXPECT_LT(std::abs(sample_mean(u, n, 11)), 4.0 / std::sqrt(n));
  double var = 0.0;
  sample_mean(Distribution::standard_normal(), n, 12, &var);
  EXPECT_NEAR(var, 1.0, 0.05);
  // Infinite fourth moment: the sample variance is heavy-tailed, so one fixed stream is used.
  sample_mean(Distribution::quartic_cauchy(), n, 15, &var);
  EXPECT_NEAR(var, 1.0, 0.05);
  sample_mean(Distribution::beta(5.0, 6.0), n, 14, &var);
  EXPECT_NEAR(var, 30.0 / (121.0 * 12.0), 0.05 * 30.0 / (121.0 * 12.0));
  const double gm = sample_mean(Distribution::gamma(4.0, 9.0), n, 15, &var);
  EXPECT_NEAR(gm, 4.0 / 9.0, 4.0 * std::sqrt(4.0 / 81.0 / n));
}

TEST(Distribution, QuarticCauchySamplerMatchesCdf) {
  const auto d = Distribution::quartic_cauchy();
  Rng rng(5);
  const int n = 200000;
  int below = 0;
  for (int i = 0; i < n; ++i) below += d.sample(rng) < 0.7;
  const double p = d.cdf(0.7);
  EXPECT_NEAR(static_cast<double>(below) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
  EXPECT_NEAR(d.cdf(0.0), 0.5, 1e-14);
}

TEST(Distribution, SupportSign) {
  EXPECT_EQ(Distribution::uniform(1.0, 2.0).support_sign(), SupportSign::Positive);
  EXPECT_EQ(Distribution::standard_normal().support_sign(), SupportSign::Mixed);
  EXPECT_EQ(Distribution::uniform(-2.0, -1.0).support_sign(), SupportSign::Negative);
  EXPECT_EQ(Distribution::gamma(4.0, 9.0).support_sign(), SupportSign::Positive);
}

TEST(Distribution, RegularityFlags) {
  const auto u = Distribution::uniform(1.0, 2.0).regularity();
  EXPECT_FALSE(u.continuous_on_real);
  EXPECT_TRUE(u.compact_support);
  EXPECT_TRUE(Distribution::standard_normal().regularity().lipschitz_on_real);
  EXPECT_TRUE(Distribution::beta(5.0, 6.0).regularity().lipschitz_on_real);
  EXPECT_FALSE(Distribution::beta(1.5, 6.0).regularity().lipschitz_on_real);
  EXPECT_TRUE(Distribution::gamma(4.0, 9.0).regularity().lipschitz_on_real);
  EXPECT_FALSE(Distribution::gamma(1.0, 9.0).regularity().continuous_on_real);
}
