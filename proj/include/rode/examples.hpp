#pragma once

// Named experiment configurations ("example1".."example5").

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rode/density.hpp"
#include "rode/distributions.hpp"
#include "rode/kl.hpp"
#include "rode/quadrature.hpp"
#include "rode/solution.hpp"
#include "rode/verify.hpp"

namespace rode {

struct ExampleConfig {
  std::string name;
  std::string description;
  ProblemSpec spec;
  double t;
  std::vector<int> Ns;
  double x_lo;
  double x_hi;
  int x_points;
  QuadratureSpec quad;
  bool has_exact_oracle = false;

  std::vector<double> grid() const { return linspace(x_lo, x_hi, x_points); }
};

namespace detail {

inline Distribution uniform_unit_variance() { return Distribution::uniform(-std::sqrt(3.0), std::sqrt(3.0)); }

inline KLProcess sine_process(double mean, SineSeries s, Distribution coeff, const std::string& coef_name) {
  auto p = sine_series(MeanFunction::constant_value(mean), s, coeff, {0.0, 1.0});
  p.with_source({{"type", "explicit_series"},
                 {"interval", {0.0, 1.0}},
                 {"mean", mean},
                 {"family",
                  {{"coef", coef_name},
                   {"params", {{"amplitude", s.amplitude}, {"power", s.power}, {"shift", s.shift}}}}}});
  return p;
}

}  // namespace detail

inline std::vector<std::string> example_names() {
  return {"example1", "example2", "example3", "example4", "example5"};
}

/// Expands a named example; throws ValidationError for unknown names.
inline ExampleConfig make_example(const std::string& name) {
  using detail::sine_process;
  if (name == "example1") {
    ProblemSpec spec(brownian_motion(1.0), std::nullopt, Distribution::uniform(1.0, 2.0));
    return {name, "x0 ~ Uniform(1,2), a = Brownian motion, b = 0", spec, 0.5, {1, 2, 3}, 0.0, 4.0, 401,
            QuadratureSpec::tensor(24), true};
  }
  if (name == "example2") {
    SineSeries s;  // sqrt(2)/j sin(j pi t)
    ProblemSpec spec(sine_process(0.0, s, Distribution::quartic_cauchy(), "sqrt2_over_j_sin"), std::nullopt,
                     Distribution::uniform(1.0, 2.0));
    return {name, "x0 ~ Uniform(1,2), a = sum sqrt(2)/j sin(j pi t) xi_j, xi_j quartic-Cauchy, b = 0", spec, 0.7,
            {1, 2, 3}, 0.0, 3.0, 301, QuadratureSpec::tensor(64), false};
  }
  if (name == "example3") {
    SineSeries s;
    ProblemSpec spec(sine_process(-1.0, s, detail::uniform_unit_variance(), "sqrt2_over_j_sin"), std::nullopt,
                     Distribution::beta(5.0, 6.0));
    return {name, "x0 ~ Beta(5,6), a = -1 + sum sqrt(2)/j sin(j pi t) xi_j, xi_j ~ Uniform(-sqrt3, sqrt3), b = 0",
            spec, 0.3, {1, 2, 3, 4}, 0.0, 1.2, 241, QuadratureSpec::tensor(16), false};
  }
  if (name == "example4") {
    ProblemSpec spec(brownian_motion(1.0), brownian_bridge(1.0), Distribution::normal(0.0, 1.0));
    return {name, "x0 ~ Normal(0,1), a = Brownian motion, b = Brownian bridge", spec, 0.5, {1, 2}, -4.0, 4.0, 401,
            QuadratureSpec::tensor(16), false};
  }
  if (name == "example5") {
    SineSeries sa;
    sa.power = 3.0;
    SineSeries sb;
    sb.power = 4.0;
    sb.shift = 6.0;
    ProblemSpec spec(sine_process(0.0, sa, detail::uniform_unit_variance(), "sqrt2_over_jpow_sin"),
                     sine_process(0.0, sb, Distribution::standard_normal(), "sqrt2_over_jpow_sin"),
                     Distribution::gamma(4.0, 9.0));
    return {name,
            "x0 ~ Gamma(4, rate 9), a = sum sqrt(2)/j^3 sin(j pi t) xi_j (uniform), b = sum sqrt(2)/(j^4+6) sin(j pi t) "
            "eta_j (normal)",
            spec, 0.4, {1, 2}, -0.5, 2.0, 501, QuadratureSpec::monte_carlo(40000, 1), false};
  }
  throw ValidationError("unknown example '" + name + "' (expected example1..example5)");
}

/// Variance of K_a(t) in the limit N -> infinity for Gaussian coefficients:
/// closed forms for Brownian motion / bridge, otherwise a long partial sum.
inline double gaussian_integral_variance(const KLProcess& a, double t) {
  const auto& src = a.source();
  const double t0 = a.t0();
  if (src.is_object() && src.contains("type") && t0 == 0.0) {
    const std::string type = src["type"];
    const double T = src.value("T", 1.0);
    if (type == "brownian_motion") return t * t * t / 3.0;
    if (type == "brownian_bridge") return t * t * t / 3.0 - t * t * t * t / (4.0 * T);
  }
  const int terms = a.unbounded_rank() ? 20000 : *a.rank();
  return truncated_integral_variance(a, t, terms);
}

/// Exact f1 for homogeneous problems whose a has Normal coefficients; nullopt otherwise.
inline std::optional<Oracle> exact_oracle(const ProblemSpec& spec) {
  if (spec.b) return std::nullopt;
  const int probe = spec.a.unbounded_rank() ? 8 : *spec.a.rank();
  for (const auto& m : spec.a.modes(probe))
    if (!m.coeff.is_normal()) return std::nullopt;
  const ProblemSpec s = spec;
  return Oracle([s](double x, double t) {
    return exact_gaussian_homogeneous(s.x0, x, s.a.mean().integral(s.t0(), t), gaussian_integral_variance(s.a, t));
  });
}

}  // namespace rode
