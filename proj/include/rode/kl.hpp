#pragma once

// Karhunen-Loeve representations of second-order processes:
//   X(t) = mu(t) + sum_j sqrt(nu_j) phi_j(t) xi_j.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "rode/distributions.hpp"
#include "rode/error.hpp"
#include "rode/quadrature.hpp"

namespace rode {

/// Composite Gauss-Legendre rule on [a, b] with about n nodes in panels of at most 16.
inline Rule composite_legendre(double a, double b, int n) {
  n = std::max(n, 1);
  const int panels = (n + 15) / 16;
  const int per = (n + panels - 1) / panels;
  const Rule g = gauss_legendre(per);
  Rule r;
  r.nodes.reserve(static_cast<std::size_t>(panels * per));
  r.weights.reserve(static_cast<std::size_t>(panels * per));
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t i = 0; i < g.size(); ++i) {
      r.nodes.push_back(lo + 0.5 * h * (g.nodes[i] + 1.0));
      r.weights.push_back(0.5 * h * g.weights[i]);
    }
  }
  return r;
}

inline constexpr int kDefaultInnerNodes = 64;

/// Deterministic mean function with an optional antiderivative.
struct MeanFunction {
  std::function<double(double)> value;
  std::function<double(double)> antiderivative;  // optional
  std::optional<double> constant;                 // set when mu is constant

  static MeanFunction zero() { return constant_value(0.0); }
  static MeanFunction constant_value(double c) {
    return {[c](double) { return c; }, [c](double t) { return c * t; }, c};
  }

  double operator()(double t) const { return value(t); }

  /// int_{t0}^{t} mu(s) ds.
  double integral(double t0, double t, int nodes = kDefaultInnerNodes) const {
    if (antiderivative) return antiderivative(t) - antiderivative(t0);
    if (t == t0) return 0.0;
    const Rule r = composite_legendre(t0, t, nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * value(r.nodes[i]);
    return s;
  }
};

/// One KL mode: eigenvalue, normalized eigenfunction, optional antiderivative, coefficient law.
struct Mode {
  double eigenvalue = 0.0;
  std::function<double(double)> phi;
  std::function<double(double)> antiderivative;  // optional; any primitive of phi
  Distribution coeff = Distribution::standard_normal();

  double sqrt_eigenvalue() const { return std::sqrt(eigenvalue); }

  /// int_{t0}^{t} phi(s) ds.
  double integral(double t0, double t, int nodes = kDefaultInnerNodes) const {
    if (antiderivative) return antiderivative(t) - antiderivative(t0);
    if (t == t0) return 0.0;
    const Rule r = composite_legendre(t0, t, nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * phi(r.nodes[i]);
    return s;
  }
};

class KLProcess {
 public:
  /// Generates mode j (1-based) of an unbounded-rank process.
  using Generator = std::function<Mode(int)>;

  KLProcess(MeanFunction mean, std::vector<Mode> modes, Interval interval,
            Generator generator = {}, std::optional<int> rank = std::nullopt)
      : mean_(std::move(mean)),
        modes_(std::make_shared<const std::vector<Mode>>(std::move(modes))),
        interval_(interval),
        generator_(std::move(generator)),
        rank_(rank) {
    if (!(interval_.lo < interval_.hi) || !interval_.bounded())
      throw ValidationError(detail::concat("process interval must be bounded with t0 < T (got [", interval_.lo,
                                           ", ", interval_.hi, "])"));
    if (!mean_.value) throw ValidationError("process mean function is empty");
    if (!generator_ && !rank_) rank_ = static_cast<int>(modes_->size());
    for (std::size_t j = 0; j < modes_->size(); ++j) check_mode((*modes_)[j], static_cast<int>(j + 1));
  }

  const MeanFunction& mean() const { return mean_; }
  const Interval& interval() const { return interval_; }
  double t0() const { return interval_.lo; }
  double T() const { return interval_.hi; }

  /// Finite rank J, or nullopt for an unbounded expansion with a generator.
  std::optional<int> rank() const { return rank_; }
  bool unbounded_rank() const { return !rank_.has_value(); }
  int materialized() const { return static_cast<int>(modes_->size()); }

  /// Number of modes available at truncation order N (min(N, J)).
  int effective_order(int N) const {
    if (N < 0) throw ValidationError(detail::concat("truncation order must be >= 0 (got ", N, ")"));
    return rank_ ? std::min(N, *rank_) : N;
  }

  /// Mode j, 1-based.
  Mode mode(int j) const {
    if (j < 1 || (rank_ && j > *rank_))
      throw DomainError(detail::concat("mode index ", j, " out of range (rank ", rank_.value_or(-1), ")"));
    if (j <= materialized()) return (*modes_)[static_cast<std::size_t>(j - 1)];
    Mode m = generator_(j);
    check_mode(m, j);
    return m;
  }

  std::vector<Mode> modes(int N) const {
    const int n = effective_order(N);
    std::vector<Mode> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) out.push_back(mode(j));
    return out;
  }

  /// Serialized description, when the process came from a declarative source.
  const nlohmann::json& source() const { return source_; }
  KLProcess& with_source(nlohmann::json s) {
    source_ = std::move(s);
    return *this;
  }

  void check_time(double t) const {
    const double tol = 1e-12 * (interval_.hi - interval_.lo);
    if (!(t >= interval_.lo - tol && t <= interval_.hi + tol))
      throw DomainError(detail::concat("t = ", t, " outside the process interval [", interval_.lo, ", ",
                                       interval_.hi, "]"));
  }

 private:
  static void check_mode(const Mode& m, int j) {
    if (!(m.eigenvalue >= 0.0) || !std::isfinite(m.eigenvalue))
      throw ValidationError(detail::concat("mode ", j, " has invalid eigenvalue ", m.eigenvalue));
    if (!m.phi) throw ValidationError(detail::concat("mode ", j, " has no eigenfunction"));
    try {
      m.coeff.require_standardized();
    } catch (const ValidationError& e) {
      throw ValidationError(detail::concat("mode ", j, ": ", e.what()));
    }
  }

  MeanFunction mean_;
  std::shared_ptr<const std::vector<Mode>> modes_;
  Interval interval_;
  Generator generator_;
  std::optional<int> rank_;
  nlohmann::json source_;
};

/// Parameters of the sine family
///   sqrt(nu_j) phi_j(t) = amplitude / d_j * sin(w_j (t - t0)),  w_j = (j - offset) pi / L,
///   d_j = (j - offset)^power * (pi_in_denominator ? pi : 1) + shift.
struct SineSeries {
  double amplitude = std::numbers::sqrt2;
  double power = 1.0;
  double shift = 0.0;
  double offset = 0.0;
  bool pi_in_denominator = false;
};

namespace detail {

inline Mode sine_mode(const SineSeries& s, int j, Interval iv, const Distribution& coeff) {
  const double L = iv.hi - iv.lo;
  const double t0 = iv.lo;
  const double k = j - s.offset;
  const double w = k * std::numbers::pi / L;
  const double d = std::pow(k, s.power) * (s.pi_in_denominator ? std::numbers::pi : 1.0) + s.shift;
  if (!(d != 0.0) || !(k > 0.0))
    throw ValidationError(detail::concat("sine series term ", j, " is singular"));
  const double c = std::sqrt(2.0 / L);
  Mode m;
  m.eigenvalue = s.amplitude * s.amplitude * L / (2.0 * d * d);
  m.phi = [c, w, t0](double t) { return c * std::sin(w * (t - t0)); };
  m.antiderivative = [c, w, t0](double t) { return -c * std::cos(w * (t - t0)) / w; };
  m.coeff = coeff;
  return m;
}

}  // namespace detail

/// Process whose modes follow a sine family; unbounded rank unless `terms` is given.
inline KLProcess sine_series(MeanFunction mean, SineSeries s, Distribution coeff, Interval iv,
                             std::optional<int> terms = std::nullopt) {
  coeff.require_standardized();
  auto gen = [s, iv, coeff](int j) { return detail::sine_mode(s, j, iv, coeff); };
  std::vector<Mode> first;
  const int n0 = terms ? *terms : 4;
  for (int j = 1; j <= n0; ++j) first.push_back(gen(j));
  if (terms) return KLProcess(std::move(mean), std::move(first), iv);
  return KLProcess(std::move(mean), std::move(first), iv, gen, std::nullopt);
}

/// Brownian motion on [0, Tp]: nu_j = Tp^2 / ((j - 1/2)^2 pi^2), phi_j(t) = sqrt(2/Tp) sin((j - 1/2) pi t / Tp).
inline KLProcess brownian_motion(double Tp = 1.0) {
  if (!(Tp > 0.0)) throw ValidationError(detail::concat("Brownian motion needs T' > 0 (got ", Tp, ")"));
  SineSeries s;
  s.offset = 0.5;
  s.pi_in_denominator = true;
  s.amplitude = std::sqrt(2.0 * Tp);
  auto p = sine_series(MeanFunction::zero(), s, Distribution::standard_normal(), {0.0, Tp});
  p.with_source({{"type", "brownian_motion"}, {"T", Tp}});
  return p;
}

/// Brownian bridge on [0, Tp]: nu_j = Tp^2 / (j^2 pi^2), phi_j(t) = sqrt(2/Tp) sin(j pi t / Tp).
inline KLProcess brownian_bridge(double Tp = 1.0) {
  if (!(Tp > 0.0)) throw ValidationError(detail::concat("Brownian bridge needs T' > 0 (got ", Tp, ")"));
  SineSeries s;
  s.pi_in_denominator = true;
  s.amplitude = std::sqrt(2.0 * Tp);
  auto p = sine_series(MeanFunction::zero(), s, Distribution::standard_normal(), {0.0, Tp});
  p.with_source({{"type", "brownian_bridge"}, {"T", Tp}});
  return p;
}

/// A term sqrt(nu_j) phi_j(t) given directly.
struct SeriesTerm {
  std::function<double(double)> coef;
  std::function<double(double)> antiderivative;  // optional primitive of coef
  Distribution dist = Distribution::standard_normal();
};

/// Orthonormality defect max_{j,k} |int phi_j phi_k - delta_jk| on a 256-node composite rule.
inline double orthonormality_defect(const std::vector<Mode>& modes, Interval iv, int nodes = 256) {
  const Rule r = composite_legendre(iv.lo, iv.hi, nodes);
  std::vector<std::vector<double>> v(modes.size(), std::vector<double>(r.size()));
  for (std::size_t j = 0; j < modes.size(); ++j)
    for (std::size_t i = 0; i < r.size(); ++i) v[j][i] = modes[j].phi(r.nodes[i]);
  double worst = 0.0;
  for (std::size_t j = 0; j < modes.size(); ++j)
    for (std::size_t k = j; k < modes.size(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * v[j][i] * v[k][i];
      worst = std::max(worst, std::abs(s - (j == k ? 1.0 : 0.0)));
    }
  return worst;
}

/// Finite explicit series; nu_j = ||coef_j||^2 and phi_j = coef_j / sqrt(nu_j).
inline KLProcess explicit_series(MeanFunction mean, const std::vector<SeriesTerm>& terms, Interval iv) {
  const Rule r = composite_legendre(iv.lo, iv.hi, 256);
  std::vector<Mode> modes;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto& term = terms[j];
    if (!term.coef) throw ValidationError(detail::concat("series term ", j + 1, " has no coefficient function"));
    double nu = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double c = term.coef(r.nodes[i]);
      nu += r.weights[i] * c * c;
    }
    if (!(nu > 0.0)) throw ValidationError(detail::concat("series term ", j + 1, " is identically zero"));
    const double inv = 1.0 / std::sqrt(nu);
    Mode m;
    m.eigenvalue = nu;
    m.phi = [f = term.coef, inv](double t) { return inv * f(t); };
    if (term.antiderivative) m.antiderivative = [F = term.antiderivative, inv](double t) { return inv * F(t); };
    m.coeff = term.dist;
    modes.push_back(std::move(m));
  }
  const double defect = orthonormality_defect(modes, iv);
  if (defect > 1e-6)
    throw ValidationError(detail::concat("explicit series eigenfunctions are not orthonormal (defect ", defect,
                                         " > 1e-6)"));
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& a, const Mode& b) { return a.eigenvalue > b.eigenvalue; });
  return KLProcess(std::move(mean), std::move(modes), iv);
}

/// Deterministic process with no random modes.
inline KLProcess deterministic(MeanFunction mean, Interval iv) { return KLProcess(std::move(mean), {}, iv); }

/// Symmetric covariance kernel on an interval.
struct CovKernel {
  std::function<double(double, double)> k;
  Interval interval{0.0, 1.0};

  static CovKernel brownian_motion(double T = 1.0) {
    return {[](double s, double t) { return std::min(s, t); }, {0.0, T}};
  }
  static CovKernel brownian_bridge(double T = 1.0) {
    return {[T](double s, double t) { return std::min(s, t) - s * t / T; }, {0.0, T}};
  }
};

struct NystromOptions {
  /// Extrapolate eigenvalues from the n and n/2 grids, (4 l_n - l_{n/2}) / 3.
  bool richardson = true;
  MeanFunction mean = MeanFunction::zero();
  Distribution coeff = Distribution::standard_normal();
};

/// Diagnostics of the last Nystrom discretization.
struct NystromInfo {
  std::vector<double> raw_eigenvalues;  ///< n-grid eigenvalues, descending
  double min_eigenvalue = 0.0;
  int dropped = 0;
};

namespace detail {

inline Eigen::VectorXd nystrom_eigenvalues(const CovKernel& kernel, int n, Eigen::MatrixXd* vectors, Rule* rule) {
  const Rule r = legendre_on(kernel.interval.lo, kernel.interval.hi, n);
  Eigen::VectorXd sw(n);
  for (int i = 0; i < n; ++i) sw(i) = std::sqrt(r.weights[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double kij = kernel.k(r.nodes[static_cast<std::size_t>(i)], r.nodes[static_cast<std::size_t>(j)]);
      A(i, j) = A(j, i) = sw(i) * kij * sw(j);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Nystrom eigen solve failed");
  if (vectors) *vectors = es.eigenvectors().rowwise().reverse();
  if (rule) *rule = r;
  return es.eigenvalues().reverse();
}

}  // namespace detail

/// Gauss-Legendre Nystrom discretization of (C f)(t) = int k(t, s) f(s) ds.
/// Returns the top n_modes eigenpairs (descending), eigenfunctions extended off-grid
/// by phi(t) proportional to sum_i w_i k(t, s_i) phi(s_i), scaled to unit L2 norm.
inline KLProcess nystrom_solve(const CovKernel& kernel, int n_nodes, int n_modes, const NystromOptions& opt = {},
                               NystromInfo* info = nullptr) {
  if (!kernel.k) throw ValidationError("kernel function is empty");
  if (n_nodes < 1) throw ValidationError(detail::concat("n_nodes must be >= 1 (got ", n_nodes, ")"));
  if (n_modes < 0 || n_modes > n_nodes)
    throw ValidationError(detail::concat("n_modes must be in [0, n_nodes] (got ", n_modes, ")"));
  const Interval iv = kernel.interval;
  {
    // Symmetry on sampled pairs.
    Rng rng(12345);
    std::uniform_real_distribution<double> u(iv.lo, iv.hi);
    for (int i = 0; i < 64; ++i) {
      const double s = u(rng), t = u(rng);
      const double a = kernel.k(s, t), b = kernel.k(t, s);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        throw ValidationError(detail::concat("kernel is not symmetric: k(", s, ", ", t, ") = ", a, " but k(", t,
                                             ", ", s, ") = ", b));
    }
  }
  Eigen::MatrixXd V;
  Rule rule;
  const Eigen::VectorXd lam = detail::nystrom_eigenvalues(kernel, n_nodes, &V, &rule);
  const double lmin = lam.minCoeff();
  if (lmin < -1e-8)
    throw ValidationError(detail::concat("kernel is not positive semidefinite on the Nystrom grid (eigenvalue ",
                                         lmin, ")"));
  Eigen::VectorXd lam_half;
  const bool extrapolate = opt.richardson && n_nodes >= 40;
  if (extrapolate) lam_half = detail::nystrom_eigenvalues(kernel, n_nodes / 2, nullptr, nullptr);

  auto nodes = std::make_shared<const std::vector<double>>(rule.nodes);
  auto weights = std::make_shared<const std::vector<double>>(rule.weights);
  auto kfun = std::make_shared<const std::function<double(double, double)>>(kernel.k);

  const double l1 = std::max(lam(0), 0.0);
  std::vector<Mode> modes;
  int dropped = 0;
  for (int m = 0; m < n_modes; ++m) {
    double l = lam(m);
    if (l < 0.0 && l >= -1e-10) l = 0.0;
    if (!(l > 1e-12 * l1) || l <= 0.0) {
      ++dropped;
      continue;
    }
    double lam_out = l;
    if (extrapolate && m < n_nodes / 8 && lam_half(m) > 0.0) {
      const double rl = (4.0 * l - lam_half(m)) / 3.0;
      if (rl > 0.0) lam_out = rl;
    }
    auto vals = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n_nodes));
    double vmax = 0.0;
    for (int i = 0; i < n_nodes; ++i) {
      (*vals)[static_cast<std::size_t>(i)] = V(i, m) / std::sqrt(rule.weights[static_cast<std::size_t>(i)]);
      vmax = std::max(vmax, std::abs((*vals)[static_cast<std::size_t>(i)]));
    }
    for (double v : *vals)
      if (std::abs(v) > 1e-3 * vmax) {
        if (v < 0.0)
          for (double& w : *vals) w = -w;
        break;
      }
    Mode mode;
    mode.eigenvalue = lam_out;
    mode.coeff = opt.coeff;
    std::shared_ptr<const std::vector<double>> cvals = vals;
    auto extend = [nodes, weights, kfun, cvals](double t) {
      double s = 0.0;
      for (std::size_t i = 0; i < nodes->size(); ++i) s += (*weights)[i] * (*kfun)(t, (*nodes)[i]) * (*cvals)[i];
      return s;
    };
    // Unit norm in L2 of the interval, not only on the grid.
    const Rule fine = composite_legendre(iv.lo, iv.hi, 16 * n_nodes);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) norm2 += fine.weights[i] * std::pow(extend(fine.nodes[i]), 2);
    const double scale = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0 / l;
    mode.phi = [extend, scale](double t) { return scale * extend(t); };
    modes.push_back(std::move(mode));
  }
  if (info) {
    info->raw_eigenvalues.assign(lam.data(), lam.data() + lam.size());
    info->min_eigenvalue = lmin;
    info->dropped = dropped;
  }
  KLProcess p(opt.mean, std::move(modes), iv);
  p.with_source({{"type", "nystrom"}, {"n_nodes", n_nodes}, {"n_modes", n_modes}});
  return p;
}

/// First N modes (N capped at the rank), same mean and interval.
inline KLProcess truncate(const KLProcess& proc, int N) {
  auto p = KLProcess(proc.mean(), proc.modes(N), proc.interval());
  p.with_source(proc.source());
  return p;
}

/// Reorders the first order.size() modes; order holds 1-based mode indices (a permutation).
inline KLProcess reorder(const KLProcess& proc, const std::vector<int>& order) {
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i + 1))
      throw ValidationError("reorder expects a permutation of 1..n");
  std::vector<Mode> modes;
  for (int j : order) modes.push_back(proc.mode(j));
  return KLProcess(proc.mean(), std::move(modes), proc.interval());
}

/// Moves mode j to the front, keeping the relative order of the first max(j, N) modes.
inline KLProcess pivot(const KLProcess& proc, int j, int N) {
  const int n = std::max(j, N);
  std::vector<int> order{j};
  for (int k = 1; k <= n; ++k)
    if (k != j) order.push_back(k);
  return reorder(proc, order);
}

/// mu(t) + sum_j sqrt(nu_j) phi_j(t) coeffs_j.
inline double eval_truncated(const KLProcess& proc, double t, const std::vector<double>& coeffs) {
  proc.check_time(t);
  if (proc.rank() && static_cast<int>(coeffs.size()) > *proc.rank())
    throw ValidationError(detail::concat("got ", coeffs.size(), " coefficients for a rank-", *proc.rank(), " process"));
  double v = proc.mean()(t);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const Mode m = proc.mode(static_cast<int>(j + 1));
    v += m.sqrt_eigenvalue() * m.phi(t) * coeffs[j];
  }
  return v;
}

/// sum_{j <= N} nu_j.
inline double trace(const KLProcess& proc, int N) {
  double s = 0.0;
  for (const auto& m : proc.modes(N)) s += m.eigenvalue;
  return s;
}

/// sum_{j <= N} (int_{t0}^{t} phi_j)^2; tends to t - t0 from below.
inline double parseval_partial(const KLProcess& proc, double t, int N) {
  proc.check_time(t);
  double s = 0.0;
  for (const auto& m : proc.modes(N)) {
    const double I = m.integral(proc.t0(), t);
    s += I * I;
  }
  return s;
}

/// sum_{j <= N} nu_j phi_j(s) phi_j(t).
inline double reconstruct_kernel(const std::vector<Mode>& modes, double s, double t) {
  double v = 0.0;
  for (const auto& m : modes) v += m.eigenvalue * m.phi(s) * m.phi(t);
  return v;
}

struct RemarkBound {
  double value = 0.0;  ///< sup_t sum_j sqrt(nu_j) |int_{t0}^t phi_j|
  double bound = 0.0;  ///< sqrt(sum_j nu_j) sqrt(T - t0)
};

/// Series diagnostic for the truncated process on a uniform time grid.
inline RemarkBound remark_bound(const KLProcess& proc, int N, int grid_points = 201) {
  const auto modes = proc.modes(N);
  RemarkBound rb;
  double tr = 0.0;
  for (const auto& m : modes) tr += m.eigenvalue;
  rb.bound = std::sqrt(tr) * std::sqrt(proc.T() - proc.t0());
  for (int g = 0; g < grid_points; ++g) {
    const double t = proc.t0() + (proc.T() - proc.t0()) * g / std::max(1, grid_points - 1);
    double s = 0.0;
    for (const auto& m : modes) s += m.sqrt_eigenvalue() * std::abs(m.integral(proc.t0(), t));
    rb.value = std::max(rb.value, s);
  }
  if (rb.value > rb.bound * (1.0 + 1e-10) + 1e-14)
    throw NumericalError(detail::concat("series value ", rb.value, " exceeds the analytic bound ", rb.bound));
  return rb;
}

/// True when f > 0 at `points` interior points of the open interval.
inline bool positive_on_grid(const std::function<double(double)>& f, Interval iv, int points = 1000) {
  for (int i = 1; i <= points; ++i) {
    const double t = iv.lo + (iv.hi - iv.lo) * i / (points + 1.0);
    if (!(f(t) > 0.0)) return false;
  }
  return true;
}

/// True when int_{t0}^{t} phi is nonzero (above threshold) at `points` grid times in (t0, T].
inline bool integral_nonzero_on_grid(const Mode& m, Interval iv, int points = 1000, double threshold = 1e-12) {
  for (int i = 1; i <= points; ++i) {
    const double t = iv.lo + (iv.hi - iv.lo) * i / static_cast<double>(points);
    if (!(std::abs(m.integral(iv.lo, t)) > threshold)) return false;
  }
  return true;
}

}  // namespace rode
