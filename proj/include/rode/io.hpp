#pragma once

// JSON forms of distributions, processes, problems, quadrature specs and results.

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rode/density.hpp"
#include "rode/distributions.hpp"
#include "rode/error.hpp"
#include "rode/examples.hpp"
#include "rode/kl.hpp"
#include "rode/quadrature.hpp"
#include "rode/solution.hpp"
#include "rode/verify.hpp"

namespace rode {

using json = nlohmann::json;

namespace detail {

inline double num(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) throw ValidationError(ctx + ": missing field '" + key + "'");
  if (!j[key].is_number()) throw ValidationError(ctx + ": field '" + key + "' must be a number");
  return j[key].get<double>();
}

inline double num_or(const json& j, const char* key, double def, const std::string& ctx) {
  if (!j.contains(key) || j[key].is_null()) return def;
  return num(j, key, ctx);
}

}  // namespace detail

inline json to_json(const Distribution& d) {
  return std::visit(
      [&d](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, dist::Normal>)
          return {{"kind", "normal"}, {"params", {{"mean", k.mean}, {"variance", k.variance}}}};
        else if constexpr (std::is_same_v<T, dist::Uniform>)
          return {{"kind", "uniform"}, {"params", {{"lo", k.lo}, {"hi", k.hi}}}};
        else if constexpr (std::is_same_v<T, dist::Beta>)
          return {{"kind", "beta"}, {"params", {{"alpha", k.alpha}, {"beta", k.beta}}}};
        else if constexpr (std::is_same_v<T, dist::Gamma>)
          return {{"kind", "gamma"}, {"params", {{"shape", k.shape}, {"rate", k.rate}}}};
        else if constexpr (std::is_same_v<T, dist::QuarticCauchy>)
          return {{"kind", "quartic_cauchy"}, {"params", json::object()}};
        else
          return {{"kind", "custom"}, {"params", {{"name", d.name()}}}};
      },
      d.kind());
}

inline Distribution distribution_from_json(const json& j) {
  const std::string ctx = "distribution";
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ValidationError(ctx + ": expected an object with a string 'kind'");
  const std::string kind = j["kind"];
  const json p = j.value("params", json::object());
  if (kind == "normal") return Distribution::normal(detail::num_or(p, "mean", 0.0, ctx), detail::num_or(p, "variance", 1.0, ctx));
  if (kind == "uniform") return Distribution::uniform(detail::num(p, "lo", ctx), detail::num(p, "hi", ctx));
  if (kind == "beta") return Distribution::beta(detail::num(p, "alpha", ctx), detail::num(p, "beta", ctx));
  if (kind == "gamma") return Distribution::gamma(detail::num(p, "shape", ctx), detail::num(p, "rate", ctx));
  if (kind == "quartic_cauchy") return Distribution::quartic_cauchy();
  if (kind == "uniform_unit_variance") return Distribution::uniform(-std::sqrt(3.0), std::sqrt(3.0));
  throw ValidationError("distribution: unknown kind '" + kind +
                        "' (expected normal|uniform|beta|gamma|quartic_cauchy|uniform_unit_variance)");
}

/// Sine family parameters for a registry name.
inline SineSeries sine_family(const std::string& coef, const json& params) {
  const std::string ctx = "series family '" + coef + "'";
  SineSeries s;
  if (coef == "sqrt2_over_j_sin") {
  } else if (coef == "sqrt2_over_jpow_sin") {
    s.power = detail::num_or(params, "power", 1.0, ctx);
    s.shift = detail::num_or(params, "shift", 0.0, ctx);
  } else if (coef == "sqrt2_over_halfj_pi_sin") {
    s.offset = 0.5;
    s.pi_in_denominator = true;
  } else if (coef == "sqrt2_over_j_pi_sin") {
    s.pi_in_denominator = true;
  } else {
    throw ValidationError("unknown series coefficient '" + coef +
                          "' (expected sqrt2_over_j_sin|sqrt2_over_jpow_sin|sqrt2_over_halfj_pi_sin|sqrt2_over_j_pi_sin)");
  }
  s.amplitude = detail::num_or(params, "amplitude", s.amplitude, ctx);
  return s;
}

inline MeanFunction mean_from_json(const json& j) {
  if (j.is_null()) return MeanFunction::zero();
  if (j.is_number()) return MeanFunction::constant_value(j.get<double>());
  if (j.is_object() && j.contains("constant")) return MeanFunction::constant_value(detail::num(j, "constant", "mean"));
  throw ValidationError("mean: expected a number or {\"constant\": c}");
}

inline KLProcess process_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ValidationError("process: expected an object with a string 'type'");
  const std::string type = j["type"];
  const std::string ctx = "process '" + type + "'";
  if (type == "brownian_motion") return brownian_motion(detail::num_or(j, "T", 1.0, ctx));
  if (type == "brownian_bridge") return brownian_bridge(detail::num_or(j, "T", 1.0, ctx));
  Interval iv{0.0, 1.0};
  if (j.contains("interval")) {
    const auto& a = j["interval"];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      throw ValidationError(ctx + ": 'interval' must be [t0, T]");
    iv = {a[0].get<double>(), a[1].get<double>()};
  }
  if (type == "explicit_series") {
    const MeanFunction mean = mean_from_json(j.value("mean", json()));
    if (j.contains("family")) {
      const auto& f = j["family"];
      if (!f.contains("coef") || !f["coef"].is_string()) throw ValidationError(ctx + ": family needs a 'coef' name");
      const SineSeries s = sine_family(f["coef"], f.value("params", json::object()));
      const Distribution coeff = j.contains("coeff") ? distribution_from_json(j["coeff"]) : Distribution::standard_normal();
      std::optional<int> terms;
      if (j.contains("terms") && j["terms"].is_number_integer()) terms = j["terms"].get<int>();
      auto p = sine_series(mean, s, coeff, iv, terms);
      p.with_source(j);
      return p;
    }
    std::vector<SeriesTerm> terms;
    for (const auto& t : j.value("terms", json::array())) {
      const std::string coef = t.value("coef", "");
      const json params = t.value("params", json::object());
      SeriesTerm st;
      st.dist = t.contains("coeff") ? distribution_from_json(t["coeff"]) : Distribution::standard_normal();
      if (coef == "sin") {
        const double A = detail::num_or(params, "amplitude", 1.0, ctx);
        const double w = detail::num_or(params, "frequency", 1.0, ctx) * std::numbers::pi;
        const double t0 = iv.lo;
        st.coef = [A, w, t0](double s) { return A * std::sin(w * (s - t0)); };
        st.antiderivative = [A, w, t0](double s) { return -A * std::cos(w * (s - t0)) / w; };
      } else if (coef == "const") {
        const double A = detail::num_or(params, "amplitude", 1.0, ctx);
        st.coef = [A](double) { return A; };
        st.antiderivative = [A](double s) { return A * s; };
      } else {
        throw ValidationError(ctx + ": unknown term coef '" + coef + "' (expected sin|const)");
      }
      terms.push_back(std::move(st));
    }
    auto p = explicit_series(mean, terms, iv);
    p.with_source(j);
    return p;
  }
  if (type == "nystrom") {
    const std::string kname = j.value("kernel", "brownian_motion");
    CovKernel k;
    if (kname == "brownian_motion" || kname == "min")
      k = CovKernel::brownian_motion(iv.hi);
    else if (kname == "brownian_bridge")
      k = CovKernel::brownian_bridge(iv.hi);
    else
      throw ValidationError(ctx + ": unknown kernel '" + kname + "' (expected brownian_motion|brownian_bridge)");
    k.interval = iv;
    NystromOptions opt;
    opt.mean = mean_from_json(j.value("mean", json()));
    auto p = nystrom_solve(k, j.value("n_nodes", 200), j.value("n_modes", 10), opt);
    p.with_source(j);
    return p;
  }
  throw ValidationError("process: unknown type '" + type +
                        "' (expected brownian_motion|brownian_bridge|explicit_series|nystrom)");
}

inline json to_json(const KLProcess& p) {
  if (!p.source().is_null()) return p.source();
  return {{"type", "custom"}, {"interval", {p.t0(), p.T()}}, {"rank", p.rank() ? json(*p.rank()) : json()}};
}

inline ProblemSpec problem_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("problem: expected an object");
  std::vector<std::string> errs;
  if (!j.contains("a")) errs.push_back("problem: missing process 'a'");
  if (!j.contains("x0")) errs.push_back("problem: missing distribution 'x0'");
  if (!errs.empty()) {
    std::string m;
    for (const auto& e : errs) m += e + "; ";
    throw ValidationError(m);
  }
  std::optional<KLProcess> b;
  if (j.contains("b") && !j["b"].is_null()) b = process_from_json(j["b"]);
  return ProblemSpec(process_from_json(j["a"]), b, distribution_from_json(j["x0"]));
}

inline json to_json(const ProblemSpec& s) {
  return {{"a", to_json(s.a)}, {"b", s.b ? to_json(*s.b) : json()}, {"x0", to_json(s.x0)}};
}

inline json to_json(const QuadratureSpec& q) {
  json j;
  if (q.mode == QuadMode::Tensor) {
    j = {{"mode", "tensor"}, {"nodes_per_dim", q.nodes_per_dim}, {"cap", q.cap}};
    if (q.x0_nodes > 0) j["x0_nodes"] = q.x0_nodes;
    j["unbounded"] = q.unbounded == UnboundedPolicy::Mapped ? "mapped" : "reject";
  } else {
    j = {{"mode", "mc"}, {"n_samples", q.n_samples}, {"seed", q.seed}};
  }
  j["inner_time_nodes"] = q.inner_time_nodes;
  return j;
}

inline QuadratureSpec quadrature_from_json(const json& j) {
  if (!j.is_object() || !j.contains("mode")) throw ValidationError("quad: expected an object with 'mode'");
  const std::string mode = j["mode"];
  QuadratureSpec q;
  if (mode == "tensor") {
    q.mode = QuadMode::Tensor;
    q.nodes_per_dim = j.value("nodes_per_dim", q.nodes_per_dim);
    q.x0_nodes = j.value("x0_nodes", 0);
    q.cap = j.value("cap", q.cap);
    const std::string u = j.value("unbounded", "mapped");
    if (u != "mapped" && u != "reject") throw ValidationError("quad: 'unbounded' must be mapped|reject");
    q.unbounded = u == "mapped" ? UnboundedPolicy::Mapped : UnboundedPolicy::Reject;
  } else if (mode == "mc") {
    q.mode = QuadMode::MonteCarlo;
    q.n_samples = j.value("n_samples", q.n_samples);
    q.seed = j.value("seed", q.seed);
  } else {
    throw ValidationError("quad: mode must be tensor|mc (got '" + mode + "')");
  }
  q.inner_time_nodes = j.value("inner_time_nodes", q.inner_time_nodes);
  q.validate();
  return q;
}

/// Parses "tensor:<n>" or "mc:<samples>:<seed>".
inline QuadratureSpec parse_quad(const std::string& s) {
  auto fail = [&] { return ValidationError("--quad must be tensor:<n> or mc:<samples>:<seed> (got '" + s + "')"); };
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto p = s.find(':', start);
    parts.push_back(s.substr(start, p == std::string::npos ? std::string::npos : p - start));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  try {
    if (parts.size() == 2 && parts[0] == "tensor") return QuadratureSpec::tensor(std::stoi(parts[1]));
    if (parts.size() == 3 && parts[0] == "mc")
      return QuadratureSpec::monte_carlo(std::stoll(parts[1]), std::stoull(parts[2]));
  } catch (const std::logic_error&) {
    throw fail();
  }
  throw fail();
}

inline json to_json(const DensityGrid& g) {
  json j;
  j["N"] = g.N;
  j["ts"] = g.ts;
  j["xs"] = g.xs;
  j["values"] = g.values;
  j["raw_min"] = g.raw.empty() ? json() : json(g.min_raw());
  if (g.has_stderr()) j["stderr"] = g.stderr_;
  j["method"] = to_json(g.quad);
  j["formula"] = g.formula;
  j["skipped_points"] = g.skipped_points;
  return j;
}

inline json to_json(const ConvergenceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back({{"N", row.N}, {"error", row.error}, {"kind", to_string(row.kind)}});
  return {{"t", r.t}, {"grid", r.grid}, {"rows", rows}};
}

inline ConvergenceReport convergence_report_from_json(const json& j) {
  ConvergenceReport r;
  r.t = j.at("t").get<double>();
  r.grid = j.at("grid").get<std::vector<double>>();
  for (const auto& row : j.at("rows")) {
    const std::string kind = row.at("kind");
    r.rows.push_back({row.at("N").get<int>(), row.at("error").get<double>(),
                      kind == "vs_oracle" ? ErrorKind::VsOracle : ErrorKind::VsNextN});
  }
  return r;
}

inline json to_json(const HypothesisReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}});
  return {{"theorem", theorem_label(r.theorem)}, {"verdict", to_string(r.verdict)}, {"checks", checks}};
}

inline json to_json(const std::vector<NormalizationEntry>& audit) {
  json a = json::array();
  for (const auto& e : audit)
    a.push_back({{"t", e.t}, {"integral", e.integral}, {"covers_support", e.covers_support}, {"warning", e.warning}});
  return a;
}

/// Error payload printed by the CLI on failure.
inline json error_json(const Error& e) {
  json j{{"error", e.code()}, {"message", e.what()}};
  json loc = json::object();
  if (e.location().x) loc["x"] = *e.location().x;
  if (e.location().t) loc["t"] = *e.location().t;
  if (e.location().N) loc["N"] = *e.location().N;
  if (!loc.empty()) j["location"] = loc;
  return j;
}

}  // namespace rode
