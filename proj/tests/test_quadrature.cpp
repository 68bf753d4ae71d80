#include <cmath>
#include <span>

#include <boost/math/quadrature/gauss.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rode/density.hpp"
#include "rode/examples.hpp"
#include "rode/quadrature.hpp"

using namespace rode;

TEST(GaussRules, HermiteSinglePoint) {
  const Rule r = gauss_hermite(1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r.nodes[0], 0.0, 1e-15);
  EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
}

TEST(GaussRules, LegendreTwoPoint) {
  const Rule r = gauss_legendre(2);
  EXPECT_NEAR(r.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(r.weights[1], 1.0, 1e-15);
}

TEST(GaussRules, HermiteFourthMoment) {
  const Rule r = gauss_hermite(5);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 4);
  EXPECT_NEAR(s, 3.0, 1e-12);
}

TEST(GaussRules, HermiteMomentsUpToDegree) {
  const int n = 24;
  const Rule r = gauss_hermite(n);
  double df = 1.0;  // (k-1)!!
  for (int k = 0; k <= 2 * n - 1; k += 2) {
    if (k >= 2) df *= (k - 1);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
    EXPECT_NEAR(s / df, 1.0, 1e-10) << "k=" << k;
  }
}

TEST(GaussRules, LegendreMatchesReferenceTable) {
  using ref = boost::math::quadrature::gauss<double, 20>;
  const Rule r = gauss_legendre(20);
  // Reference stores non-negative abscissae in increasing order.
  for (std::size_t k = 0; k < ref::abscissa().size(); ++k) {
    const double x = ref::abscissa()[k];
    const double w = ref::weights()[k];
    bool found = false;
    for (std::size_t i = 0; i < r.size(); ++i)
      if (std::abs(r.nodes[i] - x) < 1e-14) {
        EXPECT_NEAR(r.weights[i], w, 1e-14);
        found = true;
      }
    EXPECT_TRUE(found) << "abscissa " << x;
  }
}

TEST(GaussRules, NoRuleForUnboundedNonNormal) {
  EXPECT_THROW(gauss_rule(Distribution::quartic_cauchy(), 8), UnsupportedOperation);
  EXPECT_THROW(probability_rule(Distribution::quartic_cauchy(), 8, UnboundedPolicy::Reject), UnsupportedOperation);
}

TEST(GaussRules, MappedRuleIntegratesMass) {
  const Rule r = probability_rule(Distribution::quartic_cauchy(), 200);
  EXPECT_NEAR(r.weight_sum(), 1.0, 1e-4);
  const Rule h = probability_rule(Distribution::gamma(4.0, 9.0), 64);
  EXPECT_NEAR(h.weight_sum(), 1.0, 1e-8);
}

TEST(TensorIntegrate, ConstantIsOne) {
  const std::vector<Distribution> d{Distribution::standard_normal(), Distribution::uniform(1.0, 2.0),
                                    Distribution::beta(5.0, 6.0)};
  EXPECT_NEAR(tensor_integrate([](std::span<const double>) { return 1.0; }, d, QuadratureSpec::tensor(6)), 1.0, 1e-13);
}

TEST(TensorIntegrate, SumOfSquares) {
  const std::vector<Distribution> d{Distribution::standard_normal(), Distribution::standard_normal()};
  const double v = tensor_integrate([](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }, d,
                                    QuadratureSpec::tensor(4));
  EXPECT_NEAR(v, 2.0, 1e-12);
}

TEST(TensorIntegrate, CapExceeded) {
  std::vector<Distribution> d(8, Distribution::standard_normal());
  QuadratureSpec q = QuadratureSpec::tensor(16);
  q.cap = 1e6;
  EXPECT_THROW(tensor_integrate([](std::span<const double>) { return 1.0; }, d, q), CapExceeded);
}

TEST(TensorIntegrate, HomogeneousIntegrandAgreesWithMonteCarlo) {
  const auto ex = make_example("example1");
  const auto& a = ex.spec.a;
  const double t = 0.5, x = 1.5;
  const auto m = a.modes(2);
  const double c1 = m[0].sqrt_eigenvalue() * m[0].integral(0.0, t);
  const double c2 = m[1].sqrt_eigenvalue() * m[1].integral(0.0, t);
  auto f = [&](std::span<const double> xi) {
    const double K = c1 * xi[0] + c2 * xi[1];
    return ex.spec.x0.pdf(x * std::exp(-K)) * std::exp(-K);
  };
  const std::vector<Distribution> d{m[0].coeff, m[1].coeff};
  // The uniform f0 makes the integrand discontinuous; Hermite converges slowly, so n is large.
  const double tensor = tensor_integrate(f, d, QuadratureSpec::tensor(400));
  const McResult mc = mc_expectation(f, d, 1000000, 3);
  EXPECT_LT(std::abs(mc.estimate - tensor), 3.0 * mc.stderr_);
}

TEST(MonteCarlo, ConstantHasZeroError) {
  const McResult r = mc_expectation([](std::span<const double>) { return 2.5; }, {Distribution::standard_normal()}, 5000, 1);
  EXPECT_DOUBLE_EQ(r.estimate, 2.5);
  EXPECT_DOUBLE_EQ(r.stderr_, 0.0);
}

TEST(MonteCarlo, VarianceIdentity) {
  const McResult r =
      mc_expectation([](std::span<const double> x) { return x[0] * x[0]; }, {Distribution::standard_normal()}, 100000, 9);
  EXPECT_LT(std::abs(r.estimate - 1.0), 3.0 * r.stderr_);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResult) {
  auto f = [](std::span<const double> x) { return std::sin(x[0]) + x[1]; };
  const std::vector<Distribution> d{Distribution::standard_normal(), Distribution::beta(2.0, 3.0)};
  setenv("RODE_THREADS", "1", 1);
  const McResult a = mc_expectation(f, d, 50000, 4);
  setenv("RODE_THREADS", "3", 1);
  const McResult b = mc_expectation(f, d, 50000, 4);
  unsetenv("RODE_THREADS");
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(MonteCarlo, CompleteIntegrandAgreesWithTensor) {
  const auto ex = make_example("example5");
  const double t = 0.4;
  const std::vector<double> xs{0.3};
  const auto mc = evaluate_density(ex.spec, 2, t, xs, QuadratureSpec::monte_carlo(40000, 1), Formula::Complete);
  QuadratureSpec q = QuadratureSpec::tensor(24);
  const auto tensor = evaluate_density(ex.spec, 2, t, xs, q, Formula::Complete);
  EXPECT_LT(std::abs(mc.values[0] - tensor.values[0]), 3.0 * mc.stderr_[0]);
}

TEST(QuadratureSpecTest, ViolationsListed) {
  QuadratureSpec q = QuadratureSpec::tensor(0);
  q.inner_time_nodes = 0;
  EXPECT_GE(q.violations().size(), 2u);
  EXPECT_THROW(q.validate(), ValidationError);
}
