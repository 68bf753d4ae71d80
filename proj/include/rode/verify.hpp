#pragma once

// Error metrics, convergence tables, normalization audits and theorem-hypothesis checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rode/density.hpp"
#include "rode/distributions.hpp"
#include "rode/error.hpp"
#include "rode/kl.hpp"
#include "rode/quadrature.hpp"
#include "rode/solution.hpp"

namespace rode {

/// max_i |f_i - g_i| over a shared grid.
inline double linf_error(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.size() != g.size())
    throw ValidationError(detail::concat("grid mismatch: ", f.size(), " vs ", g.size(), " values"));
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
  return m;
}

enum class ErrorKind { VsOracle, VsNextN };

inline const char* to_string(ErrorKind k) { return k == ErrorKind::VsOracle ? "vs_oracle" : "vs_next_n"; }

struct ConvergenceRow {
  int N = 0;
  double error = 0.0;
  ErrorKind kind = ErrorKind::VsOracle;
  friend bool operator==(const ConvergenceRow&, const ConvergenceRow&) = default;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<double> grid;
  double t = 0.0;
  friend bool operator==(const ConvergenceReport&, const ConvergenceReport&) = default;

  /// Two-column table in the layout "N  Error".
  std::string to_text() const {
    std::ostringstream os;
    const bool oracle = !rows.empty() && rows.front().kind == ErrorKind::VsOracle;
    os << (oracle ? "Error with respect to the exact density" : "Error between two consecutive orders") << " (t = "
       << t << ")\n";
    os << std::left << std::setw(6) << "N" << "Error\n";
    os.precision(6);
    for (const auto& r : rows) os << std::left << std::setw(6) << r.N << r.error << '\n';
    return os.str();
  }
};

using Oracle = std::function<double(double x, double t)>;

/// Densities f1^N on `grid` at time t for each N, then errors against the oracle
/// (one row per N) or between consecutive entries of Ns (row labelled by the smaller N).
inline ConvergenceReport convergence_table(const ProblemSpec& spec, const std::vector<int>& Ns, double t,
                                           const std::vector<double>& grid, const QuadratureSpec& q,
                                           const std::optional<Oracle>& oracle = std::nullopt,
                                           Formula formula = Formula::Auto) {
  if (Ns.empty()) throw ValidationError("convergence table needs at least one N");
  if (!std::is_sorted(Ns.begin(), Ns.end())) throw ValidationError("Ns must be sorted ascending");
  ConvergenceReport rep;
  rep.grid = grid;
  rep.t = t;
  std::vector<std::vector<double>> dens;
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    const DensityGrid g = density_grid(spec, Ns[k], grid, {t}, q, formula);
    dens.push_back(g.values[0]);
  }
  if (oracle) {
    std::vector<double> ref;
    ref.reserve(grid.size());
    for (double x : grid) ref.push_back((*oracle)(x, t));
    for (std::size_t k = 0; k < Ns.size(); ++k)
      rep.rows.push_back({Ns[k], linf_error(dens[k], ref), ErrorKind::VsOracle});
  } else {
    for (std::size_t k = 0; k + 1 < Ns.size(); ++k)
      rep.rows.push_back({Ns[k], linf_error(dens[k], dens[k + 1]), ErrorKind::VsNextN});
  }
  return rep;
}

/// Trapezoid integral of y over x.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

struct NormalizationEntry {
  double t = 0.0;
  double integral = 0.0;
  bool covers_support = true;  ///< boundary values below 1e-4 * peak
  std::string warning;
};

/// Per-t trapezoid integrals of a density grid.
inline std::vector<NormalizationEntry> normalization_audit(const DensityGrid& g) {
  std::vector<NormalizationEntry> out;
  for (std::size_t k = 0; k < g.ts.size(); ++k) {
    NormalizationEntry e;
    e.t = g.ts[k];
    const auto& v = g.values[k];
    if (g.xs.size() < 2 || g.xs.front() == g.xs.back()) {
      e.integral = 0.0;
      e.covers_support = false;
      e.warning = "grid has zero width";
    } else {
      e.integral = trapezoid(g.xs, v);
      const double peak = *std::max_element(v.begin(), v.end());
      if (std::max(v.front(), v.back()) >= 1e-4 * peak) {
        e.covers_support = false;
        e.warning = "grid boundary values exceed 1e-4 of the peak; support may be truncated";
      }
    }
    out.push_back(e);
  }
  return out;
}

struct H4Estimate {
  std::vector<double> ts;
  std::vector<double> mc;          ///< E[e^{-qK}]^{1/q} per t
  std::vector<double> mc_stderr;   ///< delta-method standard errors
  std::vector<double> closed_form; ///< per t; empty unless all coefficients are Normal
  double mc_max = 0.0;
  double t_at_max = 0.0;
  std::optional<double> closed_form_max;
};

/// ||e^{-K_a(t, xi_N)}||_{L^q} over a time grid by Monte Carlo, plus the
/// Gaussian closed form e^{-int mu_a + q sigma_N^2(t) / 2} when it applies.
inline H4Estimate h4_norm_estimate(const KLProcess& a, double q, int N, const std::vector<double>& t_grid,
                                   std::int64_t n_samples, std::uint64_t seed) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw ValidationError(detail::concat("q must be in [1, inf) (got ", q, ")"));
  const auto modes = a.modes(N);
  std::vector<Distribution> dists;
  bool gaussian = true;
  for (const auto& m : modes) {
    dists.push_back(m.coeff);
    gaussian = gaussian && m.coeff.is_normal();
  }
  H4Estimate est;
  est.ts = t_grid;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    a.check_time(t);
    const double mi = a.mean().integral(a.t0(), t);
    std::vector<double> c;
    double var = 0.0;
    for (const auto& m : modes) {
      c.push_back(m.sqrt_eigenvalue() * m.integral(a.t0(), t));
      var += c.back() * c.back();
    }
    double norm, se;
    if (modes.empty()) {
      norm = std::exp(-mi);
      se = 0.0;
    } else {
      auto f = [&](std::span<const double> xi) {
        double K = mi;
        for (std::size_t j = 0; j < xi.size(); ++j) K += c[j] * xi[j];
        return std::exp(-q * K);
      };
      const McResult r = mc_expectation(f, dists, n_samples, mix64(seed) ^ k);
      norm = std::pow(r.estimate, 1.0 / q);
      se = r.estimate > 0.0 ? norm / (q * r.estimate) * r.stderr_ : 0.0;
    }
    est.mc.push_back(norm);
    est.mc_stderr.push_back(se);
    if (norm > est.mc_max) {
      est.mc_max = norm;
      est.t_at_max = t;
    }
    if (gaussian) est.closed_form.push_back(std::exp(-mi + 0.5 * q * var));
  }
  if (gaussian && !est.closed_form.empty())
    est.closed_form_max = *std::max_element(est.closed_form.begin(), est.closed_form.end());
  return est;
}

enum class Theorem { T1 = 1, T2, T3, T4, T5, T6, T7, T8, T9 };

inline const char* theorem_label(Theorem th) {
  switch (th) {
    case Theorem::T1: return "T1 (complete, Lipschitz f0)";
    case Theorem::T2: return "T2 (homogeneous, Lipschitz f0 on D(x0))";
    case Theorem::T3: return "T3 (complete, Lipschitz f_eta1)";
    case Theorem::T4: return "T4 (homogeneous, Lipschitz f_xi1)";
    case Theorem::T5: return "T5 (complete, continuous bounded f0)";
    case Theorem::T6: return "T6 (homogeneous, continuous bounded f0 on D(x0))";
    case Theorem::T7: return "T7 (homogeneous, f0 <= C/|x|)";
    case Theorem::T8: return "T8 (complete, continuous bounded f_eta1)";
    case Theorem::T9: return "T9 (homogeneous, continuous bounded f_xi1, signed x0)";
  }
  return "?";
}

enum class CheckStatus { Pass, PassNumeric, Fail, Unverifiable };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::PassNumeric: return "pass (numeric evidence)";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Unverifiable: return "unverifiable";
  }
  return "?";
}

struct HypothesisCheck {
  std::string name;
  CheckStatus status = CheckStatus::Unverifiable;
  std::string detail;
};

enum class Verdict { Applicable, NotApplicable, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Applicable: return "applicable";
    case Verdict::NotApplicable: return "not applicable";
    case Verdict::Undetermined: return "undetermined";
  }
  return "?";
}

struct HypothesisReport {
  Theorem theorem = Theorem::T1;
  std::vector<HypothesisCheck> checks;
  Verdict verdict = Verdict::Undetermined;

  const HypothesisCheck* find(const std::string& prefix) const {
    for (const auto& c : checks)
      if (c.name.rfind(prefix, 0) == 0) return &c;
    return nullptr;
  }
};

struct HypothesisOptions {
  int N = 8;                      ///< truncation order for numeric norm checks
  double h4_threshold = 1e6;      ///< norms above this fail the numeric bound
  std::int64_t n_samples = 20000; ///< MC samples for non-Gaussian norms
  std::uint64_t seed = 7;
  int t_points = 11;
  double p = 3.0;                 ///< Theorem 1 exponent pair, 1/p + 2/q = 1/2
  double q = 12.0;
  int series_terms = 256;         ///< terms examined in the b-series check
};

namespace detail {

inline HypothesisCheck regularity_check(const std::string& name, bool ok, const std::string& what) {
  return {name, ok ? CheckStatus::Pass : CheckStatus::Fail, what + (ok ? " holds" : " does not hold") + " (declared)"};
}

inline HypothesisCheck l2_process_check(const std::string& name, const KLProcess& p) {
  if (!p.unbounded_rank()) return {name, CheckStatus::Pass, detail::concat("finite rank ", *p.rank())};
  const double s1 = trace(p, 500), s2 = trace(p, 1000);
  const bool ok = s2 - s1 <= 1e-2 * s2;
  return {name, ok ? CheckStatus::PassNumeric : CheckStatus::Unverifiable,
          detail::concat("trace partial sums ", s1, " (500 modes), ", s2, " (1000 modes)")};
}

inline HypothesisCheck h4_check(const std::string& name, const ProblemSpec& spec, double q,
                                const HypothesisOptions& o) {
  const auto ts = linspace(spec.t0(), spec.T(), o.t_points);
  const int N = spec.a.effective_order(o.N);
  const auto modes = spec.a.modes(N);
  bool gaussian = !modes.empty();
  for (const auto& m : modes) gaussian = gaussian && m.coeff.is_normal();
  double value;
  std::string how;
  if (gaussian || modes.empty()) {
    // Closed form only; avoids the unbounded MC variance of lognormal moments.
    value = 0.0;
    for (double t : ts) {
      const double mi = spec.a.mean().integral(spec.t0(), t);
      value = std::max(value, std::exp(-mi + 0.5 * q * truncated_integral_variance(spec.a, t, N)));
    }
    how = "Gaussian closed form";
  } else {
    const H4Estimate e = h4_norm_estimate(spec.a, q, N, ts, o.n_samples, o.seed);
    value = e.mc_max;
    how = detail::concat("Monte Carlo, ", o.n_samples, " samples");
  }
  const bool ok = std::isfinite(value) && value <= o.h4_threshold;
  return {name, ok ? CheckStatus::PassNumeric : CheckStatus::Fail,
          detail::concat("max_t ||e^{-K_a}||_{L^", q, "} = ", value, " at N = ", N, " (", how, ", threshold ",
                         o.h4_threshold, ")")};
}

/// sum_j sqrt(gamma_j) ||psi_j||_{L^p(t0,T)} ||eta_j||_{L^p} + ||mu_b||_{L^p}.
inline HypothesisCheck b_series_check(const std::string& name, const ProblemSpec& spec, const HypothesisOptions& o) {
  if (!spec.b) return {name, CheckStatus::Pass, "b = 0"};
  const KLProcess& b = *spec.b;
  const double p = o.p;
  auto lp_norm = [&](const std::function<double(double)>& f, int nodes) {
    const Rule r = composite_legendre(b.t0(), b.T(), nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(std::abs(f(r.nodes[i])), p);
    return std::pow(s, 1.0 / p);
  };
  const double mu_norm = lp_norm(b.mean().value, 256);
  const int J = b.unbounded_rank() ? o.series_terms : *b.rank();
  std::vector<double> terms;
  for (int j = 1; j <= J; ++j) {
    const Mode m = b.mode(j);
    const double eta_norm = std::pow(m.coeff.abs_moment(p), 1.0 / p);
    terms.push_back(m.sqrt_eigenvalue() * lp_norm(m.phi, 64 + 16 * j) * eta_norm);
  }
  double sum = mu_norm;
  for (double v : terms) sum += v;
  if (!b.unbounded_rank())
    return {name, std::isfinite(sum) ? CheckStatus::Pass : CheckStatus::Fail,
            detail::concat("finite sum ", sum, " at p = ", p)};
  // Decay exponent of the terms over the last octave.
  const std::size_t hi = terms.size() - 1, lo = terms.size() / 2 - 1;
  const double s = std::log(terms[lo] / terms[hi]) / std::log(static_cast<double>(hi + 1) / (lo + 1));
  const std::string d = detail::concat("partial sum ", sum, " over ", J, " terms at p = ", p,
                                       "; terms decay like j^-", s);
  if (s > 1.05) return {name, CheckStatus::PassNumeric, d};
  if (s <= 1.0 + 1e-2) return {name, CheckStatus::Fail, d + " (series diverges)"};
  return {name, CheckStatus::Unverifiable, d};
}

inline HypothesisCheck homogeneous_check(const ProblemSpec& spec) {
  return {"b = 0", spec.b ? CheckStatus::Fail : CheckStatus::Pass,
          spec.b ? "problem has a forcing process b" : "homogeneous problem"};
}

inline HypothesisCheck compact_xi_check(const ProblemSpec& spec, const HypothesisOptions& o) {
  const int n = spec.a.unbounded_rank() ? std::max(o.N, 8) : *spec.a.rank();
  bool ok = true;
  for (const auto& m : spec.a.modes(n)) ok = ok && m.coeff.support().bounded();
  std::string d = ok ? "all xi_j have bounded support" : "some xi_j has unbounded support";
  if (spec.a.unbounded_rank()) d += detail::concat(" (checked first ", n, " modes of the generator)");
  return {"H4: xi compactly supported", ok ? (spec.a.unbounded_rank() ? CheckStatus::PassNumeric : CheckStatus::Pass)
                                           : CheckStatus::Fail,
          d};
}

inline HypothesisCheck psi1_check(const ProblemSpec& spec) {
  if (!spec.b || spec.b->effective_order(1) < 1) return {"H4: psi_1 > 0", CheckStatus::Fail, "no b modes"};
  const bool ok = psi1_positive(spec);
  return {"H4: psi_1 > 0", ok ? CheckStatus::PassNumeric : CheckStatus::Fail,
          ok ? "positive at 1000 interior grid points" : "non-positive value on the 1000-point grid"};
}

inline HypothesisCheck phi1_check(const ProblemSpec& spec) {
  if (spec.a.effective_order(1) < 1) return {"H4: int phi_1 != 0", CheckStatus::Fail, "no a modes"};
  const bool ok = phi1_integral_nonzero(spec);
  return {"H4: int phi_1 != 0", ok ? CheckStatus::PassNumeric : CheckStatus::Fail,
          ok ? "nonzero at 1000 grid times in (t0, T]" : "vanishes (below 1e-12) on the 1000-point grid"};
}

inline HypothesisCheck growth_check(const ProblemSpec& spec) {
  // sup |x| f0(x) over a log-spaced grid of the sign domain.
  double worst = 0.0;
  const SupportSign s = spec.x0.support_sign();
  for (int i = -300; i <= 300; ++i) {
    const double r = std::pow(10.0, i / 50.0);
    for (double x : {r, -r}) {
      if ((s == SupportSign::Positive && x < 0) || (s == SupportSign::Negative && x > 0)) continue;
      worst = std::max(worst, std::abs(x) * spec.x0.pdf(x));
    }
  }
  const bool ok = std::isfinite(worst);
  return {"H3: f0(x) <= C/|x|", ok ? CheckStatus::PassNumeric : CheckStatus::Fail,
          detail::concat("sup |x| f0(x) = ", worst, " on a log-spaced grid 1e-6..1e6")};
}

}  // namespace detail

/// Checks the hypotheses of one theorem; the verdict is advisory.
inline HypothesisReport hypothesis_report(const ProblemSpec& spec, Theorem th, const HypothesisOptions& o = {}) {
  using namespace detail;
  HypothesisReport rep;
  rep.theorem = th;
  auto& c = rep.checks;
  const Regularity& r0 = spec.x0.regularity();
  const bool complete_family = th == Theorem::T1 || th == Theorem::T3 || th == Theorem::T5 || th == Theorem::T8;

  c.push_back(l2_process_check("H1: a in L2", spec.a));
  if (complete_family && spec.b) c.push_back(l2_process_check("H1: b in L2", *spec.b));
  if (th == Theorem::T3 || th == Theorem::T8)
    c.push_back({"H1: x0 in L2", std::isfinite(spec.x0.variance()) ? CheckStatus::Pass : CheckStatus::Fail,
                 detail::concat("Var x0 = ", spec.x0.variance())});
  c.push_back({"H2: absolutely continuous and independent", CheckStatus::Pass,
               "all variables have densities and are drawn from independent streams"});
  if (!complete_family) c.push_back(homogeneous_check(spec));
  if (th == Theorem::T4 || th == Theorem::T9) {
    const bool ok = spec.a.unbounded_rank() || *spec.a.rank() >= 2;
    c.push_back({"H2: N >= 2", ok ? CheckStatus::Pass : CheckStatus::Fail,
                 ok ? "at least two a modes" : "a has fewer than two modes"});
  }

  std::optional<Distribution> f_eta1, f_xi1;
  if (spec.b && spec.b->effective_order(1) >= 1) f_eta1 = spec.b->mode(1).coeff;
  if (spec.a.effective_order(1) >= 1) f_xi1 = spec.a.mode(1).coeff;

  switch (th) {
    case Theorem::T1:
      c.push_back(regularity_check("H3: f0 Lipschitz on R", r0.lipschitz_on_real, "Lipschitz continuity of f0 on R"));
      c.push_back(b_series_check("H4: b-series in L^p", spec, o));
      c.push_back(h4_check("H4: e^{-K_a} bounded in L^q", spec, o.q, o));
      break;
    case Theorem::T2:
      c.push_back(regularity_check("H3: f0 Lipschitz on D(x0)", r0.lipschitz_on_sign_domain,
                                   "Lipschitz continuity of f0 on D(x0)"));
      c.push_back(h4_check("H4: e^{-K_a} bounded in L^4", spec, 4.0, o));
      break;
    case Theorem::T3:
      if (f_eta1)
        c.push_back(regularity_check("H3: f_eta1 Lipschitz on R", f_eta1->regularity().lipschitz_on_real,
                                     "Lipschitz continuity of f_eta1 on R"));
      else
        c.push_back({"H3: f_eta1 Lipschitz on R", CheckStatus::Fail, "no eta_1"});
      c.push_back(compact_xi_check(spec, o));
      c.push_back(psi1_check(spec));
      break;
    case Theorem::T4:
      if (f_xi1)
        c.push_back(regularity_check("H3: f_xi1 Lipschitz on R", f_xi1->regularity().lipschitz_on_real,
                                     "Lipschitz continuity of f_xi1 on R"));
      else
        c.push_back({"H3: f_xi1 Lipschitz on R", CheckStatus::Fail, "no xi_1"});
      c.push_back(phi1_check(spec));
      break;
    case Theorem::T5:
      c.push_back(regularity_check("H3: f0 continuous and bounded on R", r0.continuous_on_real && r0.bounded,
                                   "continuity and boundedness of f0 on R"));
      c.push_back(h4_check("H4: e^{-K_a} bounded in L^2", spec, 2.0, o));
      break;
    case Theorem::T6:
      c.push_back(regularity_check("H3: f0 continuous and bounded on D(x0)", r0.continuous_on_sign_domain && r0.bounded,
                                   "continuity and boundedness of f0 on D(x0)"));
      c.push_back(h4_check("H4: e^{-K_a} bounded in L^2", spec, 2.0, o));
      break;
    case Theorem::T7:
      c.push_back(regularity_check("H3: f0 continuous on D(x0)", r0.continuous_on_sign_domain,
                                   "continuity of f0 on D(x0)"));
      c.push_back(growth_check(spec));
      break;
    case Theorem::T8:
      if (f_eta1)
        c.push_back(regularity_check("H3: f_eta1 continuous and bounded on R",
                                     f_eta1->regularity().continuous_on_real && f_eta1->regularity().bounded,
                                     "continuity and boundedness of f_eta1"));
      else
        c.push_back({"H3: f_eta1 continuous and bounded on R", CheckStatus::Fail, "no eta_1"});
      c.push_back(compact_xi_check(spec, o));
      c.push_back(psi1_check(spec));
      break;
    case Theorem::T9:
      if (f_xi1)
        c.push_back(regularity_check("H3: f_xi1 continuous and bounded on R",
                                     f_xi1->regularity().continuous_on_real && f_xi1->regularity().bounded,
                                     "continuity and boundedness of f_xi1"));
      else
        c.push_back({"H3: f_xi1 continuous and bounded on R", CheckStatus::Fail, "no xi_1"});
      c.push_back(phi1_check(spec));
      {
        const SupportSign s = spec.x0.support_sign();
        c.push_back({"H5: x0 has a definite sign", s == SupportSign::Mixed ? CheckStatus::Fail : CheckStatus::Pass,
                     std::string("support sign ") + to_string(s)});
      }
      break;
  }

  bool any_fail = false, any_unknown = false;
  for (const auto& ch : c) {
    any_fail = any_fail || ch.status == CheckStatus::Fail;
    any_unknown = any_unknown || ch.status == CheckStatus::Unverifiable;
  }
  rep.verdict = any_fail ? Verdict::NotApplicable : (any_unknown ? Verdict::Undetermined : Verdict::Applicable);
  return rep;
}

}  // namespace rode
