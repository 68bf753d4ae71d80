#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rode/rode.hpp"

namespace {

struct Flags {
  std::string example, config, N, Ns, t, ts, xs, quad, oracle, formula, out, format;
  std::optional<long long> seed, n_paths, tgrid;
  std::string theorems;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--example", f.example, "Named example (example1..example5)");
  app->add_option("--config", f.config, "JSON config file; flags override its fields");
  app->add_option("--N", f.N, "Truncation order");
  app->add_option("--Ns", f.Ns, "Comma-separated truncation orders");
  app->add_option("--t", f.t, "Time");
  app->add_option("--ts", f.ts, "Comma-separated times");
  app->add_option("--xs", f.xs, "x grid as lo:hi:n");
  app->add_option("--quad", f.quad, "tensor:<n> or mc:<samples>:<seed>");
  app->add_option("--oracle", f.oracle, "exact|none");
  app->add_option("--formula", f.formula, "auto|f1n|f1homo|eta1|xi1");
  app->add_option("--out", f.out, "Output path ('-' for stdout)");
  app->add_option("--format", f.format, "csv|json|text");
  app->add_option("--seed", f.seed, "Seed for path sampling and MC");
  app->add_option("--n-paths", f.n_paths, "Number of sample paths");
  app->add_option("--tgrid", f.tgrid, "Time grid points for paths");
  app->add_option("--theorems", f.theorems, "Comma-separated theorem numbers for verify");
}

nlohmann::json merge(const std::string& command, const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw rode::Error("io", "cannot open config file '" + f.config + "'");
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw rode::ValidationError("config '" + f.config + "' is not valid JSON: " + e.what());
    }
  }
  j["command"] = command;
  auto set = [&j](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  set("example", f.example);
  if (!f.N.empty()) {
    j.erase("Ns");
    j["N"] = f.N;
  }
  if (!f.Ns.empty()) {
    j.erase("N");
    j["Ns"] = f.Ns;
  }
  if (!f.t.empty()) {
    j.erase("ts");
    j["t"] = f.t;
  }
  if (!f.ts.empty()) {
    j.erase("t");
    j["ts"] = f.ts;
  }
  set("xs", f.xs);
  set("quad", f.quad);
  set("oracle", f.oracle);
  set("formula", f.formula);
  set("theorems", f.theorems);
  if (!f.out.empty() || !f.format.empty()) {
    nlohmann::json out = j.value("output", nlohmann::json::object());
    if (!f.out.empty()) out["path"] = f.out;
    if (!f.format.empty()) out["format"] = f.format;
    j["output"] = out;
  }
  if (f.seed) j["seed"] = *f.seed;
  if (f.n_paths) j["n_paths"] = *f.n_paths;
  if (f.tgrid) j["tgrid"] = *f.tgrid;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density of random linear ODE solutions via Karhunen-Loeve truncation"};
  app.require_subcommand(1);
  Flags flags;
  std::string command;
  for (const char* name : {"density", "table", "verify", "paths"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " run");
    add_flags(sub, flags);
    sub->callback([&command, name] { command = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const rode::RunConfig cfg = rode::parse_run_config(merge(command, flags));
    const std::string summary = rode::run_to_file(cfg);
    (cfg.out == "-" ? std::cerr : std::cout) << summary << '\n';
  } catch (const rode::ConfigError& e) {
    nlohmann::json j = rode::error_json(e);
    j["violations"] = e.violations();
    std::cerr << j.dump() << '\n';
    return 2;
  } catch (const rode::Error& e) {
    std::cerr << rode::error_json(e).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
