#pragma once

// Declarative experiment runner behind the rode-density tool.

#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rode/density.hpp"
#include "rode/error.hpp"
#include "rode/examples.hpp"
#include "rode/io.hpp"
#include "rode/solution.hpp"
#include "rode/verify.hpp"

namespace rode {

enum class Command { Density, Table, Verify, Paths };
enum class Format { Csv, Json, Text };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Density: return "density";
    case Command::Table: return "table";
    case Command::Verify: return "verify";
    case Command::Paths: return "paths";
  }
  return "?";
}

/// Validation failure carrying every violation found.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> v) : ValidationError(join(v)), violations_(std::move(v)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration: ";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + v[i];
    return s;
  }
  std::vector<std::string> violations_;
};

struct RunConfig {
  Command command = Command::Density;
  std::optional<std::string> example;
  std::optional<ProblemSpec> problem;
  std::vector<int> Ns;
  std::vector<double> ts;
  double x_lo = 0.0;
  double x_hi = 1.0;
  int x_points = 0;
  QuadratureSpec quad;
  bool oracle_exact = false;
  Formula formula = Formula::Auto;
  std::string out = "-";
  Format format = Format::Csv;
  std::uint64_t seed = 1;
  std::size_t n_paths = 10;
  int tgrid_points = 101;
  std::vector<Theorem> theorems;

  std::vector<double> xs() const { return linspace(x_lo, x_hi, x_points); }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

template <class T>
std::optional<std::vector<T>> number_list(const json& j) {
  std::vector<T> v;
  if (j.is_number()) return std::vector<T>{j.get<T>()};
  if (j.is_string()) {
    try {
      for (const auto& p : split(j.get<std::string>(), ',')) {
        if constexpr (std::is_integral_v<T>) {
          std::size_t pos = 0;
          v.push_back(static_cast<T>(std::stoll(p, &pos)));
          if (pos != p.size()) return std::nullopt;
        } else {
          std::size_t pos = 0;
          v.push_back(std::stod(p, &pos));
          if (pos != p.size()) return std::nullopt;
        }
      }
    } catch (const std::logic_error&) {
      return std::nullopt;
    }
    return v.empty() ? std::nullopt : std::optional(v);
  }
  if (j.is_array()) {
    for (const auto& e : j) {
      if (!e.is_number()) return std::nullopt;
      if constexpr (std::is_integral_v<T>)
        if (!e.is_number_integer()) return std::nullopt;
      v.push_back(e.get<T>());
    }
    return v.empty() ? std::nullopt : std::optional(v);
  }
  return std::nullopt;
}

}  // namespace detail

/// Parses and validates a run config; every violation is reported at once.
inline RunConfig parse_run_config(const json& j) {
  std::vector<std::string> bad;
  RunConfig c;
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});

  if (!j.contains("command")) {
    bad.push_back("command: required (density|table|verify|paths)");
  } else {
    const std::string cmd = j["command"].is_string() ? j["command"].get<std::string>() : "";
    if (cmd == "density") c.command = Command::Density;
    else if (cmd == "table") c.command = Command::Table;
    else if (cmd == "verify") c.command = Command::Verify;
    else if (cmd == "paths") c.command = Command::Paths;
    else bad.push_back("command: must be density|table|verify|paths");
  }

  std::optional<ExampleConfig> ex;
  if (j.contains("example")) {
    try {
      ex = make_example(j["example"].get<std::string>());
      c.example = ex->name;
    } catch (const std::exception& e) {
      bad.push_back(std::string("example: ") + e.what());
    }
  }
  if (j.contains("problem")) {
    try {
      c.problem = problem_from_json(j["problem"]);
    } catch (const std::exception& e) {
      bad.push_back(std::string("problem: ") + e.what());
    }
  } else if (ex) {
    c.problem = ex->spec;
  } else if (!j.contains("example")) {
    bad.push_back("problem: required (give 'problem' or 'example')");
  }

  if (j.contains("N") || j.contains("Ns")) {
    const json& v = j.contains("Ns") ? j["Ns"] : j["N"];
    auto l = detail::number_list<int>(v);
    if (!l) bad.push_back("N/Ns: expected a positive integer or a list of them");
    else {
      for (int n : *l)
        if (n < 1) bad.push_back(detail::concat("N/Ns: order must be >= 1 (got ", n, ")"));
      c.Ns = *l;
    }
  } else if (ex) {
    c.Ns = c.command == Command::Density || c.command == Command::Paths ? std::vector<int>{ex->Ns.back()} : ex->Ns;
  } else {
    bad.push_back("N/Ns: required");
  }

  if (j.contains("t") || j.contains("ts")) {
    const json& v = j.contains("ts") ? j["ts"] : j["t"];
    auto l = detail::number_list<double>(v);
    if (!l) bad.push_back("t/ts: expected a number or a list of numbers");
    else c.ts = *l;
  } else if (ex) {
    c.ts = {ex->t};
  } else if (c.command != Command::Paths) {
    bad.push_back("t/ts: required");
  }

  if (j.contains("xs")) {
    const json& v = j["xs"];
    bool ok = false;
    if (v.is_string()) {
      const auto p = detail::split(v.get<std::string>(), ':');
      if (p.size() == 3) {
        try {
          c.x_lo = std::stod(p[0]);
          c.x_hi = std::stod(p[1]);
          c.x_points = std::stoi(p[2]);
          ok = true;
        } catch (const std::logic_error&) {
        }
      }
    } else if (v.is_object() && v.contains("lo") && v.contains("hi") && v.contains("n")) {
      c.x_lo = v["lo"].get<double>();
      c.x_hi = v["hi"].get<double>();
      c.x_points = v["n"].get<int>();
      ok = true;
    }
    if (!ok) bad.push_back("xs: expected 'lo:hi:n' or {\"lo\",\"hi\",\"n\"}");
    else if (c.x_points < 1 || !(c.x_hi >= c.x_lo)) bad.push_back("xs: need n >= 1 and hi >= lo");
  } else if (ex) {
    c.x_lo = ex->x_lo;
    c.x_hi = ex->x_hi;
    c.x_points = ex->x_points;
  } else if (c.command == Command::Density || c.command == Command::Table || c.command == Command::Verify) {
    bad.push_back("xs: required");
  }

  if (j.contains("quad")) {
    try {
      c.quad = j["quad"].is_string() ? parse_quad(j["quad"]) : quadrature_from_json(j["quad"]);
    } catch (const std::exception& e) {
      bad.push_back(std::string("quad: ") + e.what());
    }
  } else if (ex) {
    c.quad = ex->quad;
  }
  for (const auto& v : c.quad.violations()) bad.push_back("quad: " + v);

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) bad.push_back("seed: expected a non-negative integer");
    else c.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("formula")) {
    try {
      c.formula = parse_formula(j["formula"].get<std::string>());
    } catch (const std::exception& e) {
      bad.push_back(std::string("formula: ") + e.what());
    }
  }

  if (j.contains("oracle")) {
    const std::string o = j["oracle"].is_string() ? j["oracle"].get<std::string>() : "";
    if (o == "exact") c.oracle_exact = true;
    else if (o != "none") bad.push_back("oracle: must be exact|none");
  }

  const json out = j.value("output", json::object());
  c.out = out.value("path", j.value("out", std::string("-")));
  const std::string fmt = out.value("format", j.value("format", std::string("csv")));
  if (fmt == "csv") c.format = Format::Csv;
  else if (fmt == "json") c.format = Format::Json;
  else if (fmt == "text") c.format = Format::Text;
  else bad.push_back("format: must be csv|json|text");

  if (j.contains("n_paths")) {
    if (!j["n_paths"].is_number_integer() || j["n_paths"].get<long long>() < 1) bad.push_back("n_paths: expected a positive integer");
    else c.n_paths = j["n_paths"].get<std::size_t>();
  }
  if (j.contains("tgrid")) {
    if (!j["tgrid"].is_number_integer() || j["tgrid"].get<int>() < 3) bad.push_back("tgrid: expected an integer >= 3");
    else c.tgrid_points = j["tgrid"].get<int>();
  }
  if (j.contains("theorems")) {
    auto l = detail::number_list<int>(j["theorems"]);
    if (!l) bad.push_back("theorems: expected a list of theorem numbers 1..9");
    else
      for (int k : *l) {
        if (k < 1 || k > 9) bad.push_back(detail::concat("theorems: ", k, " is not in 1..9"));
        else c.theorems.push_back(static_cast<Theorem>(k));
      }
  }

  // Cross-field checks.
  if (c.command == Command::Density && c.Ns.size() > 1) bad.push_back("N: density takes a single order");
  if (c.command == Command::Table) {
    if (c.ts.size() > 1) bad.push_back("t: table takes a single time");
    if (!c.oracle_exact && c.Ns.size() < 2) bad.push_back("Ns: table without an oracle needs at least two orders");
    if (!std::is_sorted(c.Ns.begin(), c.Ns.end())) bad.push_back("Ns: must be ascending");
  } else if (c.format == Format::Text) {
    bad.push_back("format: text is only available for table");
  }
  if (c.command == Command::Paths && c.Ns.size() > 1) bad.push_back("N: paths takes a single order");
  if (c.problem) {
    for (double t : c.ts) {
      try {
        c.problem->check_time(t);
      } catch (const std::exception& e) {
        bad.push_back(std::string("t: ") + e.what());
      }
    }
    if (c.oracle_exact && !exact_oracle(*c.problem))
      bad.push_back("oracle: no exact density is available for this problem");
  }
  if (!bad.empty()) throw ConfigError(std::move(bad));
  return c;
}

namespace detail {

inline json hypothesis_json(const ProblemSpec& spec, const std::vector<Theorem>& ths) {
  json reps = json::array();
  for (Theorem th : ths) reps.push_back(to_json(hypothesis_report(spec, th)));
  return reps;
}

}  // namespace detail

/// Executes a validated config, writing the artifact to `artifact`. Returns the one-line summary.
inline std::string run(const RunConfig& c, std::ostream& artifact) {
  const ProblemSpec& spec = *c.problem;
  artifact.precision(17);
  std::string summary = detail::concat(to_string(c.command), ": N=");
  for (std::size_t i = 0; i < c.Ns.size(); ++i) summary += (i ? "," : "") + std::to_string(c.Ns[i]);
  if (!c.ts.empty()) {
    summary += " t=";
    for (std::size_t i = 0; i < c.ts.size(); ++i) {
        std::ostringstream os;
        os << c.ts[i];
        summary += (i ? "," : "") + os.str();
      }
  }

  switch (c.command) {
    case Command::Density: {
      const DensityGrid g = density_grid(spec, c.Ns.front(), c.xs(), c.ts, c.quad, c.formula);
      if (c.format == Format::Json) {
        json j = to_json(g);
        j["normalization"] = to_json(normalization_audit(g));
        artifact << j.dump(2) << '\n';
      } else {
        write_grid_csv(artifact, g);
      }
      summary += " formula=" + g.formula.front();
      break;
    }
    case Command::Table: {
      const auto oracle = c.oracle_exact ? exact_oracle(spec) : std::nullopt;
      const ConvergenceReport r = convergence_table(spec, c.Ns, c.ts.front(), c.xs(), c.quad, oracle, c.formula);
      if (c.format == Format::Json) {
        artifact << to_json(r).dump(2) << '\n';
      } else if (c.format == Format::Text) {
        artifact << r.to_text();
      } else {
        artifact << "N,error,kind\n";
        for (const auto& row : r.rows) artifact << row.N << ',' << row.error << ',' << to_string(row.kind) << '\n';
      }
      break;
    }
    case Command::Verify: {
      std::vector<Theorem> ths = c.theorems;
      if (ths.empty())
        for (int k = 1; k <= 9; ++k) ths.push_back(static_cast<Theorem>(k));
      const json reps = detail::hypothesis_json(spec, ths);
      const DensityGrid g = density_grid(spec, c.Ns.back(), c.xs(), c.ts, c.quad, c.formula);
      const auto audit = normalization_audit(g);
      if (c.format == Format::Json) {
        artifact << json{{"hypotheses", reps}, {"normalization", to_json(audit)}, {"min_raw", g.min_raw()}}.dump(2)
                 << '\n';
      } else {
        artifact << "theorem,check,status,detail\n";
        for (const auto& r : reps)
          for (const auto& ch : r["checks"]) {
            std::string d = ch["detail"];
            for (char& ch2 : d)
              if (ch2 == ',' || ch2 == '\n') ch2 = ';';
            artifact << r["theorem"].get<std::string>() << ',' << ch["name"].get<std::string>() << ','
                     << ch["status"].get<std::string>() << ',' << d << '\n';
          }
        for (const auto& e : audit)
          artifact << "normalization,t=" << e.t << ',' << (e.covers_support ? "ok" : "warning") << ',' << e.integral
                   << '\n';
      }
      break;
    }
    case Command::Paths: {
      const auto tg = linspace(spec.t0(), spec.T(), c.tgrid_points);
      const auto paths = sample_paths(spec, c.Ns.front(), c.Ns.front(), c.n_paths, tg, c.seed, c.quad.inner_time_nodes);
      if (c.format == Format::Json) {
        json arr = json::array();
        for (std::size_t p = 0; p < paths.size(); ++p)
          arr.push_back({{"path_id", p}, {"x0", paths[p].x0_draw}, {"xi", paths[p].coeffs_xi},
                         {"eta", paths[p].coeffs_eta}, {"ts", paths[p].ts}, {"x", paths[p].x_vals}});
        artifact << json{{"N", c.Ns.front()}, {"seed", c.seed}, {"paths", arr}}.dump(2) << '\n';
      } else {
        write_paths_csv(artifact, paths);
      }
      summary += detail::concat(" paths=", c.n_paths);
      break;
    }
  }
  summary += " out=" + (c.out == "-" ? std::string("stdout") : c.out);
  return summary;
}

/// Runs and writes to c.out ("-" for stdout). I/O failures name the path.
inline std::string run_to_file(const RunConfig& c) {
  if (c.out == "-") return run(c, std::cout);
  std::ostringstream buf;
  const std::string summary = run(c, buf);
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error("io", "cannot open output file '" + c.out + "'");
  f << buf.str();
  f.close();
  if (!f) throw Error("io", "failed writing output file '" + c.out + "'");
  return summary;
}

}  // namespace rode
