#pragma once

// Building blocks of the truncated solution
//   x_{N,M}(t) = e^{K_a(t)} (x0 + int_{t0}^t S_b(s) e^{-K_a(s)} ds).

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rode/distributions.hpp"
#include "rode/error.hpp"
#include "rode/kl.hpp"
#include "rode/parallel.hpp"
#include "rode/quadrature.hpp"

namespace rode {

inline constexpr double kExpLimit = 700.0;

/// x'(t) = a(t) x(t) + b(t), x(t0) = x0 on [t0, T].
struct ProblemSpec {
  KLProcess a;
  std::optional<KLProcess> b;  ///< nullopt: homogeneous (b = 0)
  Distribution x0;
  Interval interval;

  ProblemSpec(KLProcess a_, std::optional<KLProcess> b_, Distribution x0_)
      : a(std::move(a_)), b(std::move(b_)), x0(std::move(x0_)), interval(a.interval()) {
    validate();
  }

  bool homogeneous() const { return !b.has_value(); }
  double t0() const { return interval.lo; }
  double T() const { return interval.hi; }

  void validate() const {
    auto same = [](Interval u, Interval v) {
      const double tol = 1e-12 * std::max(1.0, std::abs(u.hi - u.lo));
      return std::abs(u.lo - v.lo) <= tol && std::abs(u.hi - v.hi) <= tol;
    };
    if (!same(a.interval(), interval))
      throw ValidationError("process a must live on the problem interval");
    if (b && !same(b->interval(), interval))
      throw ValidationError(detail::concat("process b interval [", b->interval().lo, ", ", b->interval().hi,
                                           "] differs from process a interval [", interval.lo, ", ", interval.hi,
                                           "]"));
  }

  void check_time(double t) const { a.check_time(t); }
};

/// K_a(t, xi) = int_{t0}^t mu_a + sum_j sqrt(nu_j) (int_{t0}^t phi_j) xi_j.
inline double K_a(const KLProcess& a, double t, const std::vector<double>& xi, int inner_nodes = kDefaultInnerNodes) {
  a.check_time(t);
  double k = a.mean().integral(a.t0(), t, inner_nodes);
  for (std::size_t j = 0; j < xi.size(); ++j) {
    const Mode m = a.mode(static_cast<int>(j + 1));
    k += m.sqrt_eigenvalue() * m.integral(a.t0(), t, inner_nodes) * xi[j];
  }
  return k;
}

/// S_b(s, eta) = mu_b(s) + sum_i sqrt(gamma_i) psi_i(s) eta_i.
inline double S_b(const KLProcess& b, double s, const std::vector<double>& eta) {
  return eval_truncated(b, s, eta);
}

/// Time-slice data shared by every quadrature point at a fixed t: the integrated
/// modes c_j(.) = sqrt(nu_j) int_{t0}^. phi_j at t and at the inner nodes s_k, and the
/// b-mode values at s_k.
struct TimeSlice {
  double t = 0.0;
  double t0 = 0.0;
  int Na = 0;
  int Nb = 0;
  double mean_int_t = 0.0;
  std::vector<double> c_t;      // Na
  std::vector<double> s, w;     // inner rule on [t0, t]
  std::vector<double> mean_int_s;
  Eigen::MatrixXd c_s;          // Na x K
  std::vector<double> mu_b_s;   // K
  Eigen::MatrixXd g_s;          // Nb x K: sqrt(gamma_i) psi_i(s_k)

  std::size_t inner() const { return s.size(); }

  double K_t(const double* xi) const {
    double k = mean_int_t;
    for (int j = 0; j < Na; ++j) k += c_t[static_cast<std::size_t>(j)] * xi[j];
    return k;
  }
  double K_s(std::size_t k, const double* xi) const {
    double v = mean_int_s[k];
    for (int j = 0; j < Na; ++j) v += c_s(j, static_cast<Eigen::Index>(k)) * xi[j];
    return v;
  }
};

/// Builds the time slice for truncation orders (Na, Nb). The inner rule is only
/// built when `with_inner` is set (needed whenever b is present).
inline TimeSlice make_time_slice(const ProblemSpec& spec, int Na, int Nb, double t, int inner_nodes, bool with_inner) {
  spec.check_time(t);
  TimeSlice ts;
  ts.t = t;
  ts.t0 = spec.t0();
  const auto am = spec.a.modes(Na);
  ts.Na = static_cast<int>(am.size());
  ts.mean_int_t = spec.a.mean().integral(ts.t0, t, inner_nodes);
  for (const auto& m : am) ts.c_t.push_back(m.sqrt_eigenvalue() * m.integral(ts.t0, t, inner_nodes));
  if (!with_inner) return ts;
  std::vector<Mode> bm;
  if (spec.b) bm = spec.b->modes(Nb);
  ts.Nb = static_cast<int>(bm.size());
  if (t > ts.t0) {
    const Rule r = composite_legendre(ts.t0, t, inner_nodes);
    ts.s = r.nodes;
    ts.w = r.weights;
  }
  const std::size_t K = ts.s.size();
  ts.mean_int_s.resize(K);
  ts.c_s.resize(ts.Na, static_cast<Eigen::Index>(K));
  ts.mu_b_s.assign(K, 0.0);
  ts.g_s.resize(ts.Nb, static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    const double sk = ts.s[k];
    ts.mean_int_s[k] = spec.a.mean().integral(ts.t0, sk, inner_nodes);
    for (int j = 0; j < ts.Na; ++j)
      ts.c_s(j, static_cast<Eigen::Index>(k)) =
          am[static_cast<std::size_t>(j)].sqrt_eigenvalue() * am[static_cast<std::size_t>(j)].integral(ts.t0, sk, inner_nodes);
    if (spec.b) {
      ts.mu_b_s[k] = spec.b->mean()(sk);
      for (int i = 0; i < ts.Nb; ++i)
        ts.g_s(i, static_cast<Eigen::Index>(k)) =
            bm[static_cast<std::size_t>(i)].sqrt_eigenvalue() * bm[static_cast<std::size_t>(i)].phi(sk);
    }
  }
  return ts;
}

/// x_{N,M}(t) for realized (x0, xi, eta); N = len(xi), M = len(eta).
inline double x_trunc(const ProblemSpec& spec, double t, double x0, const std::vector<double>& xi,
                      const std::vector<double>& eta, int inner_nodes = kDefaultInnerNodes) {
  const int N = static_cast<int>(xi.size());
  const int M = static_cast<int>(eta.size());
  if (spec.a.rank() && N > *spec.a.rank())
    throw ValidationError(detail::concat("got ", N, " xi coefficients for a rank-", *spec.a.rank(), " process"));
  if (M > 0 && !spec.b) throw ValidationError("eta coefficients given for a homogeneous problem");
  if (spec.b && spec.b->rank() && M > *spec.b->rank())
    throw ValidationError(detail::concat("got ", M, " eta coefficients for a rank-", *spec.b->rank(), " process"));
  const TimeSlice ts = make_time_slice(spec, N, M, t, inner_nodes, spec.b.has_value());
  const double Kt = ts.K_t(xi.data());
  if (std::abs(Kt) > kExpLimit)
    throw located(NumericalError(detail::concat("exponential overflow: K_a(t) = ", Kt)), {std::nullopt, t, N});
  double z = 0.0;
  for (std::size_t k = 0; k < ts.inner(); ++k) {
    const double Ks = ts.K_s(k, xi.data());
    if (std::abs(Ks) > kExpLimit)
      throw located(NumericalError(detail::concat("exponential overflow: K_a(s) = ", Ks, " at s = ", ts.s[k])),
                    {std::nullopt, t, N});
    double sb = ts.mu_b_s[k];
    for (int i = 0; i < ts.Nb; ++i) sb += ts.g_s(i, static_cast<Eigen::Index>(k)) * eta[static_cast<std::size_t>(i)];
    z += ts.w[k] * sb * std::exp(-Ks);
  }
  return std::exp(Kt) * (x0 + z);
}

struct PathSample {
  std::vector<double> ts;
  std::vector<double> x_vals;
  std::vector<double> coeffs_xi;
  std::vector<double> coeffs_eta;
  double x0_draw = 0.0;
  int N = 0;
  int M = 0;
};

/// Draws (x0, xi, eta) for each path from independent substreams derived from
/// (seed, path index) and evaluates x_trunc along the grid.
inline std::vector<PathSample> sample_paths(const ProblemSpec& spec, int N, int M, std::size_t n_paths,
                                            const std::vector<double>& time_grid, std::uint64_t seed,
                                            int inner_nodes = kDefaultInnerNodes) {
  for (double t : time_grid) spec.check_time(t);
  const auto am = spec.a.modes(N);
  std::vector<Mode> bm;
  if (spec.b) bm = spec.b->modes(M);
  std::vector<PathSample> out(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    PathSample& ps = out[p];
    Rng r_x0 = substream(seed, p, 0);
    Rng r_xi = substream(seed, p, 1);
    Rng r_eta = substream(seed, p, 2);
    ps.x0_draw = spec.x0.sample(r_x0);
    for (const auto& m : am) ps.coeffs_xi.push_back(m.coeff.sample(r_xi));
    for (const auto& m : bm) ps.coeffs_eta.push_back(m.coeff.sample(r_eta));
    ps.N = static_cast<int>(am.size());
    ps.M = static_cast<int>(bm.size());
    ps.ts = time_grid;
    ps.x_vals.reserve(time_grid.size());
    for (double t : time_grid)
      ps.x_vals.push_back(t == spec.t0() ? ps.x0_draw
                                         : x_trunc(spec, t, ps.x0_draw, ps.coeffs_xi, ps.coeffs_eta, inner_nodes));
  });
  return out;
}

/// Max over interior grid points of |centered difference of x - (a_N x + b_M)|.
inline double residual_check(const PathSample& path, const ProblemSpec& spec) {
  if (path.ts.size() < 3) throw ValidationError("residual check needs at least 3 grid points");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < path.ts.size(); ++i) {
    const double t = path.ts[i];
    const double dx = (path.x_vals[i + 1] - path.x_vals[i - 1]) / (path.ts[i + 1] - path.ts[i - 1]);
    const double a = eval_truncated(spec.a, t, path.coeffs_xi);
    const double b = spec.b ? eval_truncated(*spec.b, t, path.coeffs_eta) : 0.0;
    worst = std::max(worst, std::abs(dx - (a * path.x_vals[i] + b)));
  }
  return worst;
}

/// CSV with columns t,x,path_id.
inline void write_paths_csv(std::ostream& os, const std::vector<PathSample>& paths) {
  const auto old = os.precision(17);
  os << "t,x,path_id\n";
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t i = 0; i < paths[p].ts.size(); ++i) os << paths[p].ts[i] << ',' << paths[p].x_vals[i] << ',' << p << '\n';
  os.precision(old);
}

}  // namespace rode
