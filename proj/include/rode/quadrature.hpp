#pragma once

// Gauss rules (Golub-Welsch), probability rules per distribution, tensor
// products and Monte Carlo expectations.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rode/distributions.hpp"
#include "rode/error.hpp"
#include "rode/parallel.hpp"

namespace rode {

/// Nodes and weights. Weights may be raw (Legendre: sum = interval length) or
/// probability weights (sum = 1), depending on the producer.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double weight_sum() const { return pairwise_sum(weights.begin(), weights.end()); }
};

namespace detail {

// Gauss rule for the measure with Jacobi matrix (alpha, beta) and total mass mu0.
// Nodes from the tridiagonal eigenproblem, then one or two Newton steps on the
// orthonormal recurrence; weights from the Christoffel function 1 / sum p_k(x)^2.
inline Rule golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta, double mu0) {
  const int n = static_cast<int>(alpha.size());
  Rule r;
  if (n == 0) return r;
  Eigen::VectorXd d(n), e(std::max(n - 1, 1));
  for (int i = 0; i < n; ++i) d(i) = alpha[i];
  for (int i = 0; i + 1 < n; ++i) e(i) = beta[i + 1];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e.head(n - 1), Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigen solve failed");

  auto eval = [&](double x, double& pn, double& dpn, double& christoffel) {
    double pm1 = 0.0, p = 1.0 / std::sqrt(mu0), dpm1 = 0.0, dp = 0.0;
    christoffel = p * p;
    for (int k = 0; k < n; ++k) {
      const double bk1 = k + 1 < n ? beta[k + 1] : 1.0;
      const double bk = k > 0 ? beta[k] : 0.0;
      const double pnext = ((x - alpha[k]) * p - bk * pm1) / bk1;
      const double dnext = ((x - alpha[k]) * dp + p - bk * dpm1) / bk1;
      pm1 = p;
      p = pnext;
      dpm1 = dp;
      dp = dnext;
      if (k + 1 < n) christoffel += p * p;
    }
    pn = p;
    dpn = dp;
  };

  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    const double w_gw = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    double pn, dpn, ch;
    bool ok = true;
    for (int it = 0; it < 3; ++it) {
      eval(x, pn, dpn, ch);
      if (!std::isfinite(pn) || !std::isfinite(dpn) || dpn == 0.0) {
        ok = false;
        break;
      }
      const double step = pn / dpn;
      if (std::abs(step) > 1e-6 * (1.0 + std::abs(x))) {
        ok = false;
        break;
      }
      x -= step;
    }
    r.nodes[i] = ok ? x : es.eigenvalues()(i);
    if (ok) {
      eval(x, pn, dpn, ch);
      r.weights[i] = (std::isfinite(ch) && ch > 0.0) ? 1.0 / ch : w_gw;
    } else {
      r.weights[i] = w_gw;
    }
  }
  return r;
}

}  // namespace detail

/// Gauss-Legendre on [-1, 1]; weights sum to 2.
inline Rule gauss_legendre(int n) {
  if (n < 1) throw ValidationError(detail::concat("Gauss-Legendre needs n >= 1 (got ", n, ")"));
  std::vector<double> alpha(n, 0.0), beta(n, 0.0);
  for (int k = 1; k < n; ++k) beta[k] = k / std::sqrt(4.0 * k * k - 1.0);
  Rule r = detail::golub_welsch(alpha, beta, 2.0);
  // Enforce exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[n - 1 - i] + r.weights[i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

/// Probabilists' Gauss-Hermite: weight e^{-x^2/2}/sqrt(2 pi), weights sum to 1.
inline Rule gauss_hermite(int n) {
  if (n < 1) throw ValidationError(detail::concat("Gauss-Hermite needs n >= 1 (got ", n, ")"));
  std::vector<double> alpha(n, 0.0), beta(n, 0.0);
  for (int k = 1; k < n; ++k) beta[k] = std::sqrt(static_cast<double>(k));
  Rule r = detail::golub_welsch(alpha, beta, 1.0);
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[n - 1 - i] + r.weights[i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  const double s = r.weight_sum();
  for (double& w : r.weights) w /= s;
  return r;
}

/// Gauss-Legendre mapped to [lo, hi]; weights sum to hi - lo.
inline Rule legendre_on(double lo, double hi, int n) {
  Rule r = gauss_legendre(n);
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r.nodes[i] = c + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

/// How distributions with unbounded support and no matching classical rule are treated.
enum class UnboundedPolicy {
  Reject,  ///< UnsupportedOperation; the caller should switch to Monte Carlo
  Mapped,  ///< Legendre on a tan / rational map of the support with the pdf folded in
};

/// Raw Gauss rule for a distribution: Hermite (probability weights) for Normal,
/// Legendre on [lo, hi] (weights sum to hi - lo, pdf NOT folded) for bounded supports.
inline Rule gauss_rule(const Distribution& d, int n) {
  if (const auto* nd = std::get_if<dist::Normal>(&d.kind())) {
    Rule r = gauss_hermite(n);
    const double s = std::sqrt(nd->variance);
    for (double& x : r.nodes) x = nd->mean + s * x;
    return r;
  }
  if (d.support().bounded()) return legendre_on(d.support().lo, d.support().hi, n);
  throw UnsupportedOperation("no Gauss rule for distribution " + d.name() +
                             " with unbounded support; use Monte Carlo mode");
}

/// Probability rule restricted to `window` (the support by default): nodes and
/// weights with sum_i w_i g(x_i) ~ E[g(X) 1{X in window}].
inline Rule probability_rule(const Distribution& d, int n, UnboundedPolicy policy = UnboundedPolicy::Mapped,
                             Interval window = {}) {
  const double lo = std::max(window.lo, d.support().lo);
  const double hi = std::min(window.hi, d.support().hi);
  Rule r;
  if (!(lo < hi)) return r;
  const bool full = lo == d.support().lo && hi == d.support().hi;
  if (full && d.is_normal()) return gauss_rule(d, n);

  auto fold = [&](Rule& rule) {
    for (std::size_t i = 0; i < rule.size(); ++i) rule.weights[i] *= d.pdf(rule.nodes[i]);
  };
  if (std::isfinite(lo) && std::isfinite(hi)) {
    r = legendre_on(lo, hi, n);
    fold(r);
    return r;
  }
  if (policy == UnboundedPolicy::Reject)
    throw UnsupportedOperation("distribution " + d.name() +
                               " has unbounded support and no classical rule; use Monte Carlo mode");
  const double scale = std::isfinite(d.variance()) && d.variance() > 0 ? std::sqrt(d.variance()) : 1.0;
  const Rule g = gauss_legendre(n);
  r.nodes.resize(g.size());
  r.weights.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = g.nodes[i];
    double x, jac;
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      const double c = std::clamp(d.mean(), -1e300, 1e300);
      const double th = 0.5 * std::numbers::pi * v;
      x = c + scale * std::tan(th);
      const double sec = 1.0 / std::cos(th);
      jac = scale * 0.5 * std::numbers::pi * sec * sec;
    } else {
      const double u = 0.5 * (v + 1.0);  // (0, 1)
      const double y = scale * u / (1.0 - u);
      const double dy = 0.5 * scale / ((1.0 - u) * (1.0 - u));
      if (std::isfinite(lo)) {
        x = lo + y;
      } else {
        x = hi - y;
      }
      jac = dy;
    }
    r.nodes[i] = x;
    r.weights[i] = g.weights[i] * jac * d.pdf(x);
    if (!std::isfinite(r.weights[i])) r.weights[i] = 0.0;
  }
  return r;
}

enum class QuadMode { Tensor, MonteCarlo };

struct QuadratureSpec {
  QuadMode mode = QuadMode::Tensor;
  int nodes_per_dim = 16;
  int x0_nodes = 0;  ///< nodes for an integrated x0 dimension; 0 means nodes_per_dim
  std::int64_t n_samples = 40000;
  std::uint64_t seed = 1;
  int inner_time_nodes = 64;
  double cap = 1e7;
  UnboundedPolicy unbounded = UnboundedPolicy::Mapped;

  static QuadratureSpec tensor(int n) {
    QuadratureSpec q;
    q.nodes_per_dim = n;
    return q;
  }
  static QuadratureSpec monte_carlo(std::int64_t samples, std::uint64_t seed) {
    QuadratureSpec q;
    q.mode = QuadMode::MonteCarlo;
    q.n_samples = samples;
    q.seed = seed;
    return q;
  }

  int x0_rule_nodes() const { return x0_nodes > 0 ? x0_nodes : nodes_per_dim; }

  /// Every violated constraint, empty when valid.
  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (nodes_per_dim < 1) v.push_back(detail::concat("nodes_per_dim must be >= 1 (got ", nodes_per_dim, ")"));
    if (x0_nodes < 0) v.push_back(detail::concat("x0_nodes must be >= 0 (got ", x0_nodes, ")"));
    if (mode == QuadMode::MonteCarlo && n_samples < 100)
      v.push_back(detail::concat("n_samples must be >= 100 (got ", n_samples, ")"));
    if (inner_time_nodes < 1) v.push_back(detail::concat("inner_time_nodes must be >= 1 (got ", inner_time_nodes, ")"));
    if (!(cap >= 1.0)) v.push_back(detail::concat("cap must be >= 1 (got ", cap, ")"));
    return v;
  }

  void validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid quadrature spec:";
    for (const auto& s : v) msg += " " + s + ";";
    throw ValidationError(msg);
  }
};

/// Number of tensor points, checked against the cap.
inline std::size_t tensor_size(const std::vector<Rule>& rules, double cap) {
  double total = 1.0;
  for (const auto& r : rules) total *= static_cast<double>(r.size());
  if (total > cap)
    throw CapExceeded(detail::concat("tensor rule has ", total, " points, above the cap ", cap,
                                     "; lower nodes_per_dim or use Monte Carlo mode"));
  return static_cast<std::size_t>(total);
}

/// Decodes flat tensor index `p` into per-dimension indices (last dimension fastest).
inline void tensor_decode(std::size_t p, const std::vector<Rule>& rules, std::span<double> x, double& w) {
  w = 1.0;
  for (std::size_t d = rules.size(); d-- > 0;) {
    const std::size_t n = rules[d].size();
    const std::size_t i = p % n;
    p /= n;
    x[d] = rules[d].nodes[i];
    w *= rules[d].weights[i];
  }
}

inline constexpr std::size_t kTensorChunk = 4096;

/// E[f(X_1..X_d)] for independent X_k ~ dists[k] by a tensor product of probability rules.
template <class F>
double tensor_integrate(F&& f, const std::vector<Distribution>& dists, const QuadratureSpec& spec) {
  std::vector<Rule> rules;
  rules.reserve(dists.size());
  for (const auto& d : dists) rules.push_back(probability_rule(d, spec.nodes_per_dim, spec.unbounded));
  const std::size_t total = tensor_size(rules, spec.cap);
  const std::size_t chunks = (total + kTensorChunk - 1) / kTensorChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> x(rules.size());
    std::vector<double> terms;
    terms.reserve(kTensorChunk);
    const std::size_t end = std::min(total, (c + 1) * kTensorChunk);
    for (std::size_t p = c * kTensorChunk; p < end; ++p) {
      double w;
      tensor_decode(p, rules, x, w);
      if (w == 0.0) continue;
      terms.push_back(w * f(std::span<const double>(x)));
    }
    partial[c] = pairwise_sum(terms.begin(), terms.end());
  });
  return pairwise_sum(partial.begin(), partial.end());
}

struct McResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
  std::int64_t non_finite = 0;
};

/// Running mean / M2 accumulator (Welford), mergeable (Chan et al.).
struct MomentAccumulator {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  void merge(const MomentAccumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double nt = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / nt;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nt;
    n += o.n;
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double standard_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

inline constexpr std::int64_t kMcChunk = 1024;

/// Checks the non-finite fraction; at most 0.1% of samples may be dropped.
inline void check_non_finite(std::int64_t bad, std::int64_t total) {
  if (bad > 0 && static_cast<double>(bad) > 1e-3 * static_cast<double>(total))
    throw NumericalError(detail::concat(bad, " of ", total, " Monte Carlo samples were non-finite (limit 0.1%)"));
}

/// Monte Carlo E[f(X)]; chunk c draws from substream(seed, c), so the result
/// does not depend on the number of threads.
template <class F>
McResult mc_expectation(F&& f, const std::vector<Distribution>& dists, std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  const std::int64_t chunks = (n_samples + kMcChunk - 1) / kMcChunk;
  std::vector<MomentAccumulator> acc(static_cast<std::size_t>(chunks));
  std::vector<std::int64_t> bad(static_cast<std::size_t>(chunks), 0);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    Rng rng = substream(seed, c);
    std::vector<double> x(dists.size());
    const std::int64_t end = std::min<std::int64_t>(n_samples, (static_cast<std::int64_t>(c) + 1) * kMcChunk);
    for (std::int64_t s = static_cast<std::int64_t>(c) * kMcChunk; s < end; ++s) {
      for (std::size_t d = 0; d < dists.size(); ++d) x[d] = dists[d].sample(rng);
      const double v = f(std::span<const double>(x));
      if (std::isfinite(v))
        acc[c].add(v);
      else
        ++bad[c];
    }
  });
  MomentAccumulator total;
  std::int64_t nbad = 0;
  for (std::size_t c = 0; c < acc.size(); ++c) {
    total.merge(acc[c]);
    nbad += bad[c];
  }
  check_non_finite(nbad, n_samples);
  return {total.mean, total.standard_error(), total.n, nbad};
}

}  // namespace rode
