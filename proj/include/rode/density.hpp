#pragma once

// First probability density f1^N(x, t) of the truncated solution by random
// variable transformation, in four integral forms plus the plain expectation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rode/distributions.hpp"
#include "rode/error.hpp"
#include "rode/integrate.hpp"
#include "rode/kl.hpp"
#include "rode/parallel.hpp"
#include "rode/quadrature.hpp"
#include "rode/solution.hpp"

namespace rode {

enum class Formula {
  Auto,
  Complete,     ///< E_{xi,eta}[f0(x Y - Z) Y]
  Homogeneous,  ///< E_xi[f0(x Y) Y]
  Eta1,         ///< eta_1 integrated out analytically
  Xi1,          ///< xi_1 integrated out analytically (homogeneous, x != 0)
};

inline const char* to_string(Formula f) {
  switch (f) {
    case Formula::Auto: return "auto";
    case Formula::Complete: return "f1n";
    case Formula::Homogeneous: return "f1homo";
    case Formula::Eta1: return "eta1";
    case Formula::Xi1: return "xi1";
  }
  return "?";
}

inline Formula parse_formula(const std::string& s) {
  if (s == "auto") return Formula::Auto;
  if (s == "f1n" || s == "complete") return Formula::Complete;
  if (s == "f1homo" || s == "homogeneous") return Formula::Homogeneous;
  if (s == "eta1") return Formula::Eta1;
  if (s == "xi1") return Formula::Xi1;
  throw ValidationError("unknown formula '" + s + "' (expected auto|f1n|f1homo|eta1|xi1)");
}

namespace detail {

/// One integration variable: its law, the window its tensor rule covers, and the node count.
struct Var {
  const Distribution* dist;
  Interval window;
  int nodes;
};

/// Per-point quantities a form needs to evaluate its integrand at any x.
struct PointState {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
};

struct EngineResult {
  std::vector<double> mean;
  std::vector<double> stderr_;  // empty for tensor runs
  std::int64_t skipped = 0;     // points dropped for exponential overflow
  std::int64_t points = 0;
};

/// sum over tensor points (or MC samples) of weight * eval(prep(point), x) for every x.
/// prep returns false when the point overflows; such points contribute 0.
template <class Prep, class Eval>
EngineResult run_engine(const std::vector<Var>& vars, const QuadratureSpec& q, std::span<const double> xs,
                        std::uint64_t stream, Prep&& prep, Eval&& eval) {
  const std::size_t nx = xs.size();
  EngineResult res;
  res.mean.assign(nx, 0.0);
  if (nx == 0) return res;
  const std::size_t dim = vars.size();

  if (q.mode == QuadMode::Tensor) {
    std::vector<Rule> rules;
    for (const auto& v : vars) rules.push_back(probability_rule(*v.dist, v.nodes, q.unbounded, v.window));
    const std::size_t total = tensor_size(rules, q.cap);
    const std::size_t chunks = (total + kTensorChunk - 1) / kTensorChunk;
    std::vector<double> acc(chunks * nx, 0.0);
    std::vector<std::int64_t> skipped(chunks, 0);
    parallel_for(chunks, [&](std::size_t c) {
      std::vector<double> v(dim);
      double* out = acc.data() + c * nx;
      const std::size_t end = std::min(total, (c + 1) * kTensorChunk);
      PointState st;
      for (std::size_t p = c * kTensorChunk; p < end; ++p) {
        double w;
        tensor_decode(p, rules, v, w);
        if (w == 0.0) continue;
        if (!prep(v.data(), st)) {
          ++skipped[c];
          continue;
        }
        for (std::size_t i = 0; i < nx; ++i) out[i] += w * eval(st, xs[i]);
      }
    });
    std::vector<double> col(chunks);
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t c = 0; c < chunks; ++c) col[c] = acc[c * nx + i];
      res.mean[i] = pairwise_sum(col.begin(), col.end());
    }
    for (auto s : skipped) res.skipped += s;
    res.points = static_cast<std::int64_t>(total);
    return res;
  }

  const std::int64_t n = q.n_samples;
  const std::int64_t chunks = (n + kMcChunk - 1) / kMcChunk;
  std::vector<MomentAccumulator> acc(static_cast<std::size_t>(chunks) * nx);
  std::vector<std::int64_t> skipped(static_cast<std::size_t>(chunks), 0);
  std::vector<std::int64_t> bad(static_cast<std::size_t>(chunks), 0);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    Rng rng = substream(q.seed, stream, c);
    std::vector<double> v(dim);
    MomentAccumulator* out = acc.data() + c * nx;
    const std::int64_t end = std::min<std::int64_t>(n, (static_cast<std::int64_t>(c) + 1) * kMcChunk);
    PointState st;
    for (std::int64_t s = static_cast<std::int64_t>(c) * kMcChunk; s < end; ++s) {
      for (std::size_t d = 0; d < dim; ++d) v[d] = vars[d].dist->sample(rng);
      const bool ok = prep(v.data(), st);
      if (!ok) ++skipped[c];
      for (std::size_t i = 0; i < nx; ++i) {
        const double val = ok ? eval(st, xs[i]) : 0.0;
        if (std::isfinite(val))
          out[i].add(val);
        else
          ++bad[c];
      }
    }
  });
  res.stderr_.assign(nx, 0.0);
  std::int64_t nbad = 0;
  for (auto b : bad) nbad += b;
  check_non_finite(nbad, n * static_cast<std::int64_t>(nx));
  for (std::size_t i = 0; i < nx; ++i) {
    MomentAccumulator tot;
    for (std::int64_t c = 0; c < chunks; ++c) tot.merge(acc[static_cast<std::size_t>(c) * nx + i]);
    res.mean[i] = tot.mean;
    res.stderr_[i] = tot.standard_error();
  }
  for (auto s : skipped) res.skipped += s;
  res.points = n;
  return res;
}

inline Interval sign_window(double x) { return x > 0.0 ? Interval{0.0, kInf} : Interval{-kInf, 0.0}; }

}  // namespace detail

/// Values of one form at a fixed t over an x-vector.
struct FormResult {
  std::vector<double> values;  ///< raw (unclamped)
  std::vector<double> stderr_; ///< empty unless Monte Carlo
  Formula formula = Formula::Auto;
  std::int64_t skipped = 0;
  std::int64_t points = 0;
};

namespace detail {

inline void require_b(const ProblemSpec& spec, const char* what) {
  if (!spec.b)
    throw UnsupportedOperation(std::string(what) +
                               " needs a forcing process b; use the homogeneous formula (f1homo) for b = 0");
}

/// psi_1 > 0 on (t0, T), by a 1000-point grid check.
inline bool psi1_positive(const ProblemSpec& spec) {
  if (!spec.b || spec.b->effective_order(1) < 1) return false;
  const Mode m = spec.b->mode(1);
  return positive_on_grid(m.phi, spec.interval, 1000);
}

/// int_{t0}^t phi_1 != 0 for t in (t0, T], by a 1000-point grid check.
inline bool phi1_integral_nonzero(const ProblemSpec& spec) {
  if (spec.a.effective_order(1) < 1) return false;
  return integral_nonzero_on_grid(spec.a.mode(1), spec.interval, 1000);
}

inline FormResult eval_complete(const ProblemSpec& spec, int N, double t, std::span<const double> xs,
                                const QuadratureSpec& q, std::uint64_t stream, bool homogeneous) {
  const bool with_b = !homogeneous && spec.b.has_value();
  const TimeSlice ts = make_time_slice(spec, N, N, t, q.inner_time_nodes, with_b);
  const auto am = spec.a.modes(N);
  std::vector<Mode> bm;
  if (with_b) bm = spec.b->modes(N);
  std::vector<Var> vars;
  for (const auto& m : am) vars.push_back({&m.coeff, {}, q.nodes_per_dim});
  for (const auto& m : bm) vars.push_back({&m.coeff, {}, q.nodes_per_dim});
  const int Na = ts.Na, Nb = ts.Nb;
  const std::size_t K = ts.inner();
  const Distribution& f0 = spec.x0;

  auto prep = [&](const double* v, PointState& st) {
    const double Kt = ts.K_t(v);
    if (std::abs(Kt) > kExpLimit) return false;
    double z = 0.0;
    if (with_b) {
      const double* eta = v + Na;
      for (std::size_t k = 0; k < K; ++k) {
        const double Ks = ts.K_s(k, v);
        if (std::abs(Ks) > kExpLimit) return false;
        double sb = ts.mu_b_s[k];
        for (int i = 0; i < Nb; ++i) sb += ts.g_s(i, static_cast<Eigen::Index>(k)) * eta[i];
        z += ts.w[k] * sb * std::exp(-Ks);
      }
    }
    st.a = std::exp(-Kt);
    st.b = z;
    return true;
  };
  auto eval = [&f0](const PointState& st, double x) { return f0.pdf(x * st.a - st.b) * st.a; };
  EngineResult r = run_engine(vars, q, xs, stream, prep, eval);
  FormResult fr;
  fr.values = std::move(r.mean);
  fr.stderr_ = std::move(r.stderr_);
  fr.formula = with_b ? Formula::Complete : Formula::Homogeneous;
  fr.skipped = r.skipped;
  fr.points = r.points;
  return fr;
}

inline FormResult eval_eta1(const ProblemSpec& spec, int N, double t, std::span<const double> xs,
                            const QuadratureSpec& q, std::uint64_t stream) {
  require_b(spec, "the eta1 form");
  if (spec.b->effective_order(N) < 1)
    throw HypothesisError("the eta1 form needs at least one b mode (N >= 1)");
  if (!(t > spec.t0()))
    throw DomainError(detail::concat("the eta1 form is singular at t = t0 = ", spec.t0(), "; it needs t > t0"));
  if (!psi1_positive(spec)) throw HypothesisError("the eta1 form needs psi_1 > 0 on (t0, T)");
  const TimeSlice ts = make_time_slice(spec, N, N, t, q.inner_time_nodes, true);
  const auto am = spec.a.modes(N);
  const auto bm = spec.b->modes(N);
  std::vector<Var> vars;
  vars.push_back({&spec.x0, {}, q.x0_rule_nodes()});
  for (const auto& m : am) vars.push_back({&m.coeff, {}, q.nodes_per_dim});
  for (std::size_t i = 1; i < bm.size(); ++i) vars.push_back({&bm[i].coeff, {}, q.nodes_per_dim});
  const int Na = ts.Na, Nb = ts.Nb;
  const std::size_t K = ts.inner();
  const Distribution& f_eta1 = bm[0].coeff;

  auto prep = [&](const double* v, PointState& st) {
    const double x0 = v[0];
    const double* xi = v + 1;
    const double* eta = v + 1 + Na;  // eta_2..eta_N
    const double Kt = ts.K_t(xi);
    if (std::abs(Kt) > kExpLimit) return false;
    double D = 0.0, R = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double Ks = ts.K_s(k, xi);
      if (std::abs(Ks) > kExpLimit) return false;
      const double e = ts.w[k] * std::exp(-Ks);
      double sb = ts.mu_b_s[k];
      for (int i = 1; i < Nb; ++i) sb += ts.g_s(i, static_cast<Eigen::Index>(k)) * eta[i - 1];
      R += sb * e;
      D += ts.g_s(0, static_cast<Eigen::Index>(k)) * e;
    }
    if (!(D > 0.0)) return false;
    st.a = std::exp(-Kt);
    st.b = x0 + R;
    st.c = D;
    return true;
  };
  auto eval = [&f_eta1](const PointState& st, double x) {
    return f_eta1.pdf((x * st.a - st.b) / st.c) * st.a / st.c;
  };
  EngineResult r = run_engine(vars, q, xs, stream, prep, eval);
  FormResult fr;
  fr.values = std::move(r.mean);
  fr.stderr_ = std::move(r.stderr_);
  fr.formula = Formula::Eta1;
  fr.skipped = r.skipped;
  fr.points = r.points;
  return fr;
}

inline FormResult eval_xi1(const ProblemSpec& spec, int N, double t, std::span<const double> xs,
                           const QuadratureSpec& q, std::uint64_t stream) {
  if (spec.b) throw UnsupportedOperation("the xi1 form applies to homogeneous problems (b = 0) only");
  if (spec.a.effective_order(N) < 1) throw HypothesisError("the xi1 form needs at least one a mode (N >= 1)");
  for (double x : xs)
    if (x == 0.0)
      throw located(DomainError("the xi1 form is not defined at x = 0"), {0.0, t, N});
  if (!phi1_integral_nonzero(spec))
    throw HypothesisError("the xi1 form needs int_{t0}^t phi_1 != 0 on (t0, T]");
  const TimeSlice ts = make_time_slice(spec, N, N, t, q.inner_time_nodes, false);
  const double c1 = ts.c_t[0];
  if (!(std::abs(c1) > 1e-12))
    throw HypothesisError(detail::concat("the xi1 form needs sqrt(nu_1) int phi_1 != 0 at t = ", t, " (got ", c1, ")"));
  const auto am = spec.a.modes(N);
  const Distribution& f_xi1 = am[0].coeff;
  const int Na = ts.Na;
  const double inv_abs_c1 = 1.0 / std::abs(c1);

  FormResult fr;
  fr.values.assign(xs.size(), 0.0);
  if (q.mode == QuadMode::MonteCarlo) fr.stderr_.assign(xs.size(), 0.0);
  fr.formula = Formula::Xi1;
  // Positive and negative x use different x0 windows (the sign domain of x).
  for (int sgn : {1, -1}) {
    std::vector<double> sub;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if ((xs[i] > 0.0) == (sgn > 0)) {
        sub.push_back(xs[i]);
        idx.push_back(i);
      }
    if (sub.empty()) continue;
    const Interval win = detail::sign_window(sgn);
    const double pmass = sgn > 0 ? 1.0 - spec.x0.cdf(0.0) : spec.x0.cdf(0.0);
    if (pmass <= 0.0 && q.mode == QuadMode::Tensor) continue;
    std::vector<Var> vars;
    vars.push_back({&spec.x0, win, q.x0_rule_nodes()});
    for (std::size_t j = 1; j < am.size(); ++j) vars.push_back({&am[j].coeff, {}, q.nodes_per_dim});
    auto prep = [&](const double* v, PointState& st) {
      const double x0 = v[0];
      if (x0 == 0.0 || (x0 > 0.0) != (sgn > 0)) {
        st.b = 0.0;
        return true;
      }
      double L = std::log(std::abs(x0)) + ts.mean_int_t;
      for (int j = 1; j < Na; ++j) L += ts.c_t[static_cast<std::size_t>(j)] * v[j];
      st.a = L;
      st.b = 1.0;
      return true;
    };
    auto eval = [&](const PointState& st, double x) {
      if (st.b == 0.0) return 0.0;
      const double ax = std::abs(x);
      return f_xi1.pdf((std::log(ax) - st.a) / c1) * inv_abs_c1 / ax;
    };
    EngineResult r = run_engine(vars, q, sub, stream + (sgn > 0 ? 0 : 0x9e37ULL), prep, eval);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      fr.values[idx[k]] = r.mean[k];
      if (!r.stderr_.empty()) fr.stderr_[idx[k]] = r.stderr_[k];
    }
    fr.skipped += r.skipped;
    fr.points += r.points;
  }
  return fr;
}

/// Formula actually used by Auto at time t.
inline Formula resolve_auto(const ProblemSpec& spec, int N, double t, const QuadratureSpec& q) {
  if (q.mode == QuadMode::MonteCarlo) return spec.b ? Formula::Complete : Formula::Homogeneous;
  const bool f0_cont = spec.x0.regularity().continuous_on_real;
  if (spec.b) {
    if (f0_cont) return Formula::Complete;
    if (t > spec.t0() && spec.b->effective_order(N) >= 1 &&
        spec.b->mode(1).coeff.regularity().continuous_on_real && psi1_positive(spec))
      return Formula::Eta1;
    return Formula::Complete;
  }
  if (f0_cont) return Formula::Homogeneous;
  if (!(t > spec.t0() && spec.a.effective_order(N) >= 1 && spec.a.mode(1).coeff.regularity().continuous_on_real &&
        phi1_integral_nonzero(spec)))
    return Formula::Homogeneous;
  // The xi1 kernel has width ~|c1| in log x0; below the x0 node spacing the homogeneous form is used.
  const Interval sup = spec.x0.support();
  if (sup.bounded() && (sup.lo > 0.0 || sup.hi < 0.0)) {
    const Mode m = spec.a.mode(1);
    const double c1 = std::abs(m.sqrt_eigenvalue() * m.integral(spec.t0(), t, q.inner_time_nodes));
    const double span = std::abs(std::log(sup.hi / sup.lo));
    if (c1 < std::numbers::pi * span / (2.0 * q.x0_rule_nodes())) return Formula::Homogeneous;
  }
  return Formula::Xi1;
}

}  // namespace detail

/// Evaluates f1^N(., t) on xs with the given formula (Auto resolves per t).
/// For Xi1 chosen by Auto, x = 0 falls back to the homogeneous form.
inline FormResult evaluate_density(const ProblemSpec& spec, int N, double t, std::span<const double> xs,
                                   const QuadratureSpec& q, Formula formula = Formula::Auto,
                                   std::uint64_t stream = 0) {
  q.validate();
  spec.check_time(t);
  if (N < 0) throw ValidationError(detail::concat("N must be >= 0 (got ", N, ")"));
  const bool automatic = formula == Formula::Auto;
  const Formula f = automatic ? detail::resolve_auto(spec, N, t, q) : formula;
  switch (f) {
    case Formula::Complete:
      detail::require_b(spec, "the complete form (f1n)");
      return detail::eval_complete(spec, N, t, xs, q, stream, false);
    case Formula::Homogeneous:
      if (spec.b) throw UnsupportedOperation("the homogeneous form needs b = 0; use the complete form (f1n)");
      return detail::eval_complete(spec, N, t, xs, q, stream, true);
    case Formula::Eta1:
      return detail::eval_eta1(spec, N, t, xs, q, stream);
    case Formula::Xi1: {
      if (!automatic) return detail::eval_xi1(spec, N, t, xs, q, stream);
      std::vector<double> nz;
      std::vector<double> zeros;
      for (double x : xs) (x == 0.0 ? zeros : nz).push_back(x);
      FormResult a = detail::eval_xi1(spec, N, t, nz, q, stream);
      if (zeros.empty()) return a;
      FormResult b = detail::eval_complete(spec, N, t, zeros, q, stream + 0x51ULL, true);
      FormResult out;
      out.formula = Formula::Xi1;
      out.skipped = a.skipped + b.skipped;
      out.points = a.points + b.points;
      std::size_t ia = 0;
      for (double x : xs) {
        out.values.push_back(x == 0.0 ? b.values[0] : a.values[ia]);
        if (!a.stderr_.empty()) out.stderr_.push_back(x == 0.0 ? b.stderr_[0] : a.stderr_[ia]);
        if (x != 0.0) ++ia;
      }
      return out;
    }
    case Formula::Auto: break;
  }
  throw ValidationError("unresolved formula");
}

/// f1^N(x, t) from E_{xi,eta}[f0(x e^{-K_a(t)} - int S_b e^{-K_a(s)} ds) e^{-K_a(t)}].
inline double f1_complete(const ProblemSpec& spec, int N, double x, double t, const QuadratureSpec& q) {
  const double xs[1] = {x};
  return evaluate_density(spec, N, t, xs, q, Formula::Complete).values[0];
}

/// f1^N(x, t) = E_xi[f0(x e^{-K_a(t)}) e^{-K_a(t)}] for b = 0.
inline double f1_homogeneous(const ProblemSpec& spec, int N, double x, double t, const QuadratureSpec& q) {
  const double xs[1] = {x};
  return evaluate_density(spec, N, t, xs, q, Formula::Homogeneous).values[0];
}

/// The eta_1-isolated form: needs b with psi_1 > 0 and t > t0.
inline double f1_eta1_form(const ProblemSpec& spec, int N, double x, double t, const QuadratureSpec& q) {
  const double xs[1] = {x};
  return evaluate_density(spec, N, t, xs, q, Formula::Eta1).values[0];
}

/// The xi_1-isolated form: b = 0, x != 0, int phi_1 != 0.
inline double f1_xi1_form(const ProblemSpec& spec, int N, double x, double t, const QuadratureSpec& q) {
  const double xs[1] = {x};
  return evaluate_density(spec, N, t, xs, q, Formula::Xi1).values[0];
}

/// Monte Carlo estimate of E[f0(x Y_N - Z_N) Y_N] with its standard error.
inline McResult f1_mc(const ProblemSpec& spec, int N, double x, double t, std::int64_t n_samples, std::uint64_t seed,
                      int inner_time_nodes = kDefaultInnerNodes) {
  QuadratureSpec q = QuadratureSpec::monte_carlo(n_samples, seed);
  q.inner_time_nodes = inner_time_nodes;
  const double xs[1] = {x};
  FormResult r = evaluate_density(spec, N, t, xs, q, spec.b ? Formula::Complete : Formula::Homogeneous);
  McResult m;
  m.estimate = r.values[0];
  m.stderr_ = r.stderr_[0];
  m.n = n_samples;
  return m;
}

/// Density of x0 e^{Y}, Y ~ Normal(mean_int, variance): the exact f1 of the homogeneous
/// problem with a Gaussian coefficient process, int f0(x e^{-y}) N(y) e^{-y} dy.
inline double exact_gaussian_homogeneous(const Distribution& x0, double x, double mean_int, double variance) {
  if (!(variance >= 0.0)) throw ValidationError("variance must be >= 0");
  if (variance == 0.0) return x0.pdf(x * std::exp(-mean_int)) * std::exp(-mean_int);
  const double sd = std::sqrt(variance);
  const double lo = mean_int - 12.0 * sd, hi = mean_int + 12.0 * sd;
  const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
  auto f = [&](double y) {
    const double z = (y - mean_int) / sd;
    return x0.pdf(x * std::exp(-y)) * norm * std::exp(-0.5 * z * z - y);
  };
  std::vector<double> breaks{mean_int};
  for (double e : {x0.support().lo, x0.support().hi})
    if (std::isfinite(e) && e != 0.0 && x / e > 0.0) breaks.push_back(std::log(x / e));
  return integrate_piecewise(f, lo, hi, breaks, 1e-10);
}

/// Convenience overload with the variance given as a function of t.
template <class VarFn>
double exact_gaussian_homogeneous(const Distribution& x0, double t, double x, double mean_int, VarFn&& var_fn) {
  return exact_gaussian_homogeneous(x0, x, mean_int, var_fn(t));
}

/// Variance of int_0^t W(s) ds for standard Brownian motion: t^3 / 3.
inline double brownian_integral_variance(double t) { return t * t * t / 3.0; }

/// Sum_{j <= N} nu_j (int_{t0}^t phi_j)^2, the variance of K_a(t) for Gaussian coefficients.
inline double truncated_integral_variance(const KLProcess& a, double t, int N) {
  double s = 0.0;
  for (const auto& m : a.modes(N)) {
    const double c = m.sqrt_eigenvalue() * m.integral(a.t0(), t);
    s += c * c;
  }
  return s;
}

struct DensityGrid {
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<std::vector<double>> values;   ///< [t][x], clamped at 0
  std::vector<std::vector<double>> raw;      ///< [t][x], before clamping
  std::vector<std::vector<double>> stderr_;  ///< [t][x], Monte Carlo only
  int N = 0;
  QuadratureSpec quad;
  std::vector<std::string> formula;  ///< per t
  std::int64_t skipped_points = 0;

  bool has_stderr() const { return !stderr_.empty(); }
  double min_raw() const {
    double m = kInf;
    for (const auto& row : raw)
      for (double v : row) m = std::min(m, v);
    return m;
  }
  double max_value() const {
    double m = 0.0;
    for (const auto& row : values)
      for (double v : row) m = std::max(m, v);
    return m;
  }
};

/// Pointwise evaluation over xs x ts. Errors carry the failing (t, N) (and x when known).
inline DensityGrid density_grid(const ProblemSpec& spec, int N, const std::vector<double>& xs,
                                const std::vector<double>& ts, const QuadratureSpec& q,
                                Formula formula = Formula::Auto) {
  DensityGrid g;
  g.xs = xs;
  g.ts = ts;
  g.N = N;
  g.quad = q;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    FormResult r;
    try {
      r = evaluate_density(spec, N, ts[k], xs, q, formula, k);
    } catch (Error& e) {
      ErrorLocation loc = e.location();
      loc.t = ts[k];
      loc.N = N;
      e.at(loc);
      throw;
    }
    std::vector<double> clamped = r.values;
    for (double& v : clamped) v = std::max(v, 0.0);
    g.raw.push_back(std::move(r.values));
    g.values.push_back(std::move(clamped));
    if (q.mode == QuadMode::MonteCarlo) g.stderr_.push_back(std::move(r.stderr_));
    g.formula.push_back(to_string(r.formula));
    g.skipped_points += r.skipped;
  }
  return g;
}

/// CSV with columns t,x,value[,stderr].
inline void write_grid_csv(std::ostream& os, const DensityGrid& g) {
  const auto old = os.precision(17);
  os << "t,x,value" << (g.has_stderr() ? ",stderr" : "") << '\n';
  for (std::size_t k = 0; k < g.ts.size(); ++k)
    for (std::size_t i = 0; i < g.xs.size(); ++i) {
      os << g.ts[k] << ',' << g.xs[i] << ',' << g.values[k][i];
      if (g.has_stderr()) os << ',' << g.stderr_[k][i];
      os << '\n';
    }
  os.precision(old);
}

/// Uniform grid of n points on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n <= 0) return v;
  if (n == 1) return {lo};
  v.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v.push_back(i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1));
  return v;
}

}  // namespace rode
