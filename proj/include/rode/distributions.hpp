#pragma once

// Univariate distributions for the initial condition x0 and for the KL
// coefficient variables. Each distribution carries a regularity record that the
// theorem-applicability checks read; the record is declared per catalog entry,
// never inferred.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <variant>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rode/error.hpp"
#include "rode/integrate.hpp"
#include "rode/parallel.hpp"

namespace rode {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sign class of the support; realizes the domain D(x0) of the homogeneous theorems.
enum class SupportSign { Positive, Negative, Mixed };

inline const char* to_string(SupportSign s) {
  switch (s) {
    case SupportSign::Positive: return "positive";
    case SupportSign::Negative: return "negative";
    case SupportSign::Mixed: return "mixed";
  }
  return "?";
}

/// Regularity facts about a density. "sign domain" is (0,inf), (-inf,0) or R
/// according to the support sign.
struct Regularity {
  bool lipschitz_on_real = false;
  bool lipschitz_on_sign_domain = false;
  bool continuous_on_real = false;
  bool continuous_on_sign_domain = false;
  bool bounded = false;
  bool compact_support = false;
  friend bool operator==(const Regularity&, const Regularity&) = default;
};

namespace dist {
struct Normal {
  double mean = 0.0;
  double variance = 1.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
struct Beta {
  double alpha = 1.0;
  double beta = 1.0;
};
/// Shape/rate parametrization: pdf = rate^k x^(k-1) e^(-rate x) / Gamma(k).
struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};
/// Density sqrt(2) / (pi (1 + x^4)); zero mean, unit variance.
struct QuarticCauchy {};
/// User density. The pdf must integrate to one over `support`; regularity is declared by the caller.
struct Custom {
  std::function<double(double)> pdf;
  Interval support;
  std::function<double(Rng&)> sampler;  // optional
  Regularity regularity;
  std::string name = "custom";
};
}  // namespace dist

namespace detail {

inline double quartic_cauchy_cdf(double x) {
  constexpr double r2 = std::numbers::sqrt2;
  constexpr double pi = std::numbers::pi;
  const double num = x * x + r2 * x + 1.0;
  const double den = x * x - r2 * x + 1.0;
  return 0.5 + std::log(num / den) / (4.0 * pi) +
         (std::atan(r2 * x + 1.0) + std::atan(r2 * x - 1.0)) / (2.0 * pi);
}

inline double quartic_cauchy_pdf(double x) {
  return std::numbers::sqrt2 / (std::numbers::pi * (1.0 + x * x * x * x));
}

/// Inverse of the closed-form cdf by safeguarded Newton iteration.
inline double quartic_cauchy_quantile(double u) {
  if (u <= 0.0) return -kInf;
  if (u >= 1.0) return kInf;
  if (u > 0.5) return -quartic_cauchy_quantile(1.0 - u);
  // Lower tail: F(x) ~ sqrt(2) / (3 pi |x|^3).
  const double tail = std::cbrt(std::numbers::sqrt2 / (3.0 * std::numbers::pi * u));
  double lo = -2.0 * tail - 2.0;
  double hi = 0.0;
  double x = std::max(-tail, -1.0) * (u < 0.25 ? 1.0 : 0.5);
  for (int it = 0; it < 200; ++it) {
    const double f = quartic_cauchy_cdf(x) - u;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const double step = f / quartic_cauchy_pdf(x);
    double nx = x - step;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 1e-13 * (1.0 + std::abs(x))) return nx;
    x = nx;
  }
  return x;
}

}  // namespace detail

class Distribution {
 public:
  using Kind = std::variant<dist::Normal, dist::Uniform, dist::Beta, dist::Gamma,
                            dist::QuarticCauchy, dist::Custom>;

  explicit Distribution(Kind kind) : kind_(std::move(kind)) { init(); }

  static Distribution normal(double mean, double variance) { return Distribution(dist::Normal{mean, variance}); }
  static Distribution standard_normal() { return normal(0.0, 1.0); }
  static Distribution uniform(double lo, double hi) { return Distribution(dist::Uniform{lo, hi}); }
  static Distribution beta(double a, double b) { return Distribution(dist::Beta{a, b}); }
  static Distribution gamma(double shape, double rate) { return Distribution(dist::Gamma{shape, rate}); }
  static Distribution quartic_cauchy() { return Distribution(dist::QuarticCauchy{}); }
  static Distribution custom(dist::Custom c) { return Distribution(std::move(c)); }

  const Kind& kind() const { return kind_; }
  const Interval& support() const { return support_; }
  const Regularity& regularity() const { return regularity_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double stddev() const { return std::sqrt(variance_); }
  bool is_normal() const { return std::holds_alternative<dist::Normal>(kind_); }

  SupportSign support_sign() const {
    if (support_.lo >= 0.0) return SupportSign::Positive;
    if (support_.hi <= 0.0) return SupportSign::Negative;
    return SupportSign::Mixed;
  }

  std::string name() const {
    return std::visit(
        [](const auto& d) -> std::string {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, dist::Normal>)
            return detail::concat("Normal(", d.mean, ", ", d.variance, ")");
          else if constexpr (std::is_same_v<T, dist::Uniform>)
            return detail::concat("Uniform(", d.lo, ", ", d.hi, ")");
          else if constexpr (std::is_same_v<T, dist::Beta>)
            return detail::concat("Beta(", d.alpha, ", ", d.beta, ")");
          else if constexpr (std::is_same_v<T, dist::Gamma>)
            return detail::concat("Gamma(", d.shape, ", ", d.rate, ")");
          else if constexpr (std::is_same_v<T, dist::QuarticCauchy>)
            return "QuarticCauchy";
          else
            return d.name;
        },
        kind_);
  }

  /// Density value; 0 outside the support.
  double pdf(double x) const {
    return std::visit(
        [x](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, dist::Normal>) {
            const double z = x - d.mean;
            return std::exp(-0.5 * z * z / d.variance) /
                   std::sqrt(2.0 * std::numbers::pi * d.variance);
          } else if constexpr (std::is_same_v<T, dist::Uniform>) {
            return (x >= d.lo && x <= d.hi) ? 1.0 / (d.hi - d.lo) : 0.0;
          } else if constexpr (std::is_same_v<T, dist::Beta>) {
            if (x < 0.0 || x > 1.0) return 0.0;
            if (x == 0.0) return d.alpha > 1.0 ? 0.0 : (d.alpha == 1.0 ? d.beta : kInf);
            if (x == 1.0) return d.beta > 1.0 ? 0.0 : (d.beta == 1.0 ? d.alpha : kInf);
            return std::exp((d.alpha - 1.0) * std::log(x) + (d.beta - 1.0) * std::log1p(-x) -
                            log_beta(d.alpha, d.beta));
          } else if constexpr (std::is_same_v<T, dist::Gamma>) {
            if (x < 0.0) return 0.0;
            if (x == 0.0) return d.shape > 1.0 ? 0.0 : (d.shape == 1.0 ? d.rate : kInf);
            return std::exp(d.shape * std::log(d.rate) + (d.shape - 1.0) * std::log(x) -
                            d.rate * x - std::lgamma(d.shape));
          } else if constexpr (std::is_same_v<T, dist::QuarticCauchy>) {
            return detail::quartic_cauchy_pdf(x);
          } else {
            if (x < d.support.lo || x > d.support.hi) return 0.0;
            return d.pdf(x);
          }
        },
        kind_);
  }

  double cdf(double x) const {
    return std::visit(
        [x, this](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, dist::Normal>) {
            return 0.5 * std::erfc(-(x - d.mean) / std::sqrt(2.0 * d.variance));
          } else if constexpr (std::is_same_v<T, dist::Uniform>) {
            return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0);
          } else if constexpr (std::is_same_v<T, dist::Beta>) {
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return boost::math::ibeta(d.alpha, d.beta, x);
          } else if constexpr (std::is_same_v<T, dist::Gamma>) {
            return x <= 0.0 ? 0.0 : boost::math::gamma_p(d.shape, d.rate * x);
          } else if constexpr (std::is_same_v<T, dist::QuarticCauchy>) {
            return detail::quartic_cauchy_cdf(x);
          } else {
            if (x <= d.support.lo) return 0.0;
            if (x >= d.support.hi) return 1.0;
            return integrate_adaptive([this](double s) { return pdf(s); }, d.support.lo, x, 1e-10);
          }
        },
        kind_);
  }

  /// One draw; deterministic given the generator state.
  double sample(Rng& rng) const {
    return std::visit(
        [&rng, this](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, dist::Normal>) {
            return std::normal_distribution<double>(d.mean, std::sqrt(d.variance))(rng);
          } else if constexpr (std::is_same_v<T, dist::Uniform>) {
            return std::uniform_real_distribution<double>(d.lo, d.hi)(rng);
          } else if constexpr (std::is_same_v<T, dist::Beta>) {
            const double x = std::gamma_distribution<double>(d.alpha, 1.0)(rng);
            const double y = std::gamma_distribution<double>(d.beta, 1.0)(rng);
            return x / (x + y);
          } else if constexpr (std::is_same_v<T, dist::Gamma>) {
            return std::gamma_distribution<double>(d.shape, 1.0 / d.rate)(rng);
          } else if constexpr (std::is_same_v<T, dist::QuarticCauchy>) {
            double u = 0.0;
            while (u == 0.0) u = std::generate_canonical<double, 53>(rng);
            return detail::quartic_cauchy_quantile(u);
          } else {
            if (!d.sampler)
              throw UnsupportedOperation("distribution '" + name() +
                                         "' has no sampler; supply one or use tensor quadrature");
            return d.sampler(rng);
          }
        },
        kind_);
  }

  /// E|X|^p by adaptive quadrature.
  double abs_moment(double p) const {
    auto f = [this, p](double x) { return std::pow(std::abs(x), p) * pdf(x); };
    return integrate_piecewise(f, support_.lo, support_.hi, {0.0}, 1e-10);
  }

  /// Throws unless the distribution is a valid KL coefficient law (mean 0, variance 1 within tol).
  void require_standardized(double tol = 1e-8) const {
    if (std::abs(mean_) > tol || std::abs(variance_ - 1.0) > tol)
      throw ValidationError(detail::concat("KL coefficient distribution ", name(),
                                           " must have mean 0 and variance 1 (got mean ", mean_,
                                           ", variance ", variance_, ")"));
  }

 private:
  static double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  }

  void init() {
    std::visit(
        [this](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, dist::Normal>) {
            if (!(d.variance > 0.0) || !std::isfinite(d.mean))
              throw ValidationError(detail::concat("Normal requires variance > 0 (got ", d.variance, ")"));
            support_ = {-kInf, kInf};
            regularity_ = {true, true, true, true, true, false};
            mean_ = d.mean;
            variance_ = d.variance;
          } else if constexpr (std::is_same_v<T, dist::Uniform>) {
            if (!(d.lo < d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
              throw ValidationError(detail::concat("Uniform requires lo < hi (got ", d.lo, ", ", d.hi, ")"));
            support_ = {d.lo, d.hi};
            regularity_ = {false, false, false, false, true, true};
            mean_ = 0.5 * (d.lo + d.hi);
            variance_ = (d.hi - d.lo) * (d.hi - d.lo) / 12.0;
          } else if constexpr (std::is_same_v<T, dist::Beta>) {
            if (!(d.alpha > 0.0) || !(d.beta > 0.0))
              throw ValidationError(detail::concat("Beta requires alpha, beta > 0 (got ", d.alpha, ", ", d.beta, ")"));
            const double a = d.alpha, b = d.beta;
            support_ = {0.0, 1.0};
            regularity_.lipschitz_on_real = a >= 2.0 && b >= 2.0;
            regularity_.continuous_on_real = a > 1.0 && b > 1.0;
            // On (0, inf) only the jump at x = 1 and the behaviour near 0+ matter.
            regularity_.lipschitz_on_sign_domain = b >= 2.0 && (a >= 2.0 || a == 1.0);
            regularity_.continuous_on_sign_domain = b > 1.0 && a >= 1.0;
            regularity_.bounded = a >= 1.0 && b >= 1.0;
            regularity_.compact_support = true;
            mean_ = a / (a + b);
            variance_ = a * b / ((a + b) * (a + b) * (a + b + 1.0));
          } else if constexpr (std::is_same_v<T, dist::Gamma>) {
            if (!(d.shape > 0.0) || !(d.rate > 0.0))
              throw ValidationError(detail::concat("Gamma requires shape, rate > 0 (got ", d.shape, ", ", d.rate, ")"));
            const double k = d.shape;
            support_ = {0.0, kInf};
            regularity_.lipschitz_on_real = k >= 2.0;
            regularity_.continuous_on_real = k > 1.0;
            regularity_.lipschitz_on_sign_domain = k >= 2.0 || k == 1.0;
            regularity_.continuous_on_sign_domain = true;
            regularity_.bounded = k >= 1.0;
            regularity_.compact_support = false;
            mean_ = k / d.rate;
            variance_ = k / (d.rate * d.rate);
          } else if constexpr (std::is_same_v<T, dist::QuarticCauchy>) {
            support_ = {-kInf, kInf};
            regularity_ = {true, true, true, true, true, false};
            mean_ = 0.0;
            variance_ = 1.0;
          } else {
            if (!d.pdf) throw ValidationError("Custom distribution requires a pdf");
            if (!(d.support.lo < d.support.hi))
              throw ValidationError("Custom distribution requires a non-empty support");
            support_ = d.support;
            regularity_ = d.regularity;
            regularity_.compact_support = d.support.bounded();
            check_custom_density(d);
          }
        },
        kind_);
  }

  void check_custom_density(const dist::Custom& d) {
    auto f = [&d](double x) {
      const double v = d.pdf(x);
      if (!(v >= 0.0)) throw ValidationError(detail::concat("Custom pdf is negative or NaN at x = ", x));
      return v;
    };
    const double mass = integrate_piecewise(f, d.support.lo, d.support.hi, {0.0}, 1e-12);
    if (std::abs(mass - 1.0) > 1e-8)
      throw ValidationError(detail::concat("Custom pdf '", d.name, "' integrates to ", mass, ", expected 1"));
    mean_ = integrate_piecewise([&](double x) { return x * f(x); }, d.support.lo, d.support.hi, {0.0}, 1e-12);
    const double m2 =
        integrate_piecewise([&](double x) { return x * x * f(x); }, d.support.lo, d.support.hi, {0.0}, 1e-12);
    variance_ = m2 - mean_ * mean_;
  }

  Kind kind_;
  Interval support_;
  Regularity regularity_;
  double mean_ = 0.0;
  double variance_ = 1.0;
};

/// Free-function forms of the distribution operations.
inline double pdf(const Distribution& d, double x) { return d.pdf(x); }
inline double sample(const Distribution& d, Rng& rng) { return d.sample(rng); }
inline SupportSign support_sign(const Distribution& d) { return d.support_sign(); }

}  // namespace rode
