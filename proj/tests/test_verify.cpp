#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rode/examples.hpp"
#include "rode/io.hpp"
#include "rode/run.hpp"
#include "rode/verify.hpp"

using namespace rode;

TEST(Linf, Cases) {
  EXPECT_EQ(linf_error({1.0, 2.0}, {1.0, 2.0}), 0.0);
  EXPECT_EQ(linf_error({1.0, 2.0}, {1.5, 1.0}), 1.0);
  EXPECT_THROW(linf_error({1.0}, {1.0, 2.0}), ValidationError);
}

TEST(Convergence, SingleOrderAgainstItself) {
  const auto ex = make_example("example3");
  const auto grid = linspace(0.0, 1.2, 25);
  const QuadratureSpec q = QuadratureSpec::tensor(8);
  const auto g = density_grid(ex.spec, 1, grid, {0.3}, q);
  auto values = g.values[0];
  Oracle self = [&](double x, double) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i] == x) return values[i];
    return 0.0;
  };
  const auto rep = convergence_table(ex.spec, {1}, 0.3, grid, q, self);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].error, 0.0);
}

TEST(Convergence, ExampleThreeFirstRow) {
  const auto ex = make_example("example3");
  const auto rep = convergence_table(ex.spec, {1, 2}, 0.3, ex.grid(), QuadratureSpec::tensor(16));
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].kind, ErrorKind::VsNextN);
  EXPECT_NEAR(rep.rows[0].error / 0.225333, 1.0, 0.05);
}

TEST(Convergence, TextLayout) {
  ConvergenceReport r;
  r.t = 0.5;
  r.rows = {{1, 0.0687343, ErrorKind::VsOracle}, {2, 0.00743475, ErrorKind::VsOracle}};
  const std::string s = r.to_text();
  EXPECT_NE(s.find("Error with respect to the exact density"), std::string::npos);
  EXPECT_NE(s.find("0.0687343"), std::string::npos);
}

TEST(Convergence, JsonRoundTrip) {
  ConvergenceReport r;
  r.t = 0.7;
  r.grid = {0.0, 0.1, 1.0 / 3.0};
  r.rows = {{1, 0.010764123456789012, ErrorKind::VsNextN}, {2, 1.77e-4, ErrorKind::VsNextN}};
  const auto back = convergence_report_from_json(json::parse(to_json(r).dump()));
  EXPECT_EQ(back.t, r.t);
  EXPECT_EQ(back.grid, r.grid);
  EXPECT_EQ(back.rows, r.rows);
}

TEST(Normalization, ExactOracleGrid) {
  const auto ex = make_example("example1");
  const auto oracle = *exact_oracle(ex.spec);
  DensityGrid g;
  g.xs = ex.grid();
  g.ts = {0.5};
  g.values.resize(1);
  for (double x : g.xs) g.values[0].push_back(oracle(x, 0.5));
  const auto audit = normalization_audit(g);
  EXPECT_NEAR(audit[0].integral, 1.0, 1e-3);
}

TEST(Normalization, ExampleThreeSecondOrder) {
  const auto ex = make_example("example3");
  const auto g = density_grid(ex.spec, 2, ex.grid(), {0.3}, QuadratureSpec::tensor(16));
  const double m = normalization_audit(g)[0].integral;
  EXPECT_GE(m, 0.98);
  EXPECT_LE(m, 1.02);
}

TEST(Normalization, ZeroWidthGrid) {
  DensityGrid g;
  g.xs = {1.0};
  g.ts = {0.5};
  g.values = {{0.7}};
  const auto a = normalization_audit(g);
  EXPECT_EQ(a[0].integral, 0.0);
  EXPECT_FALSE(a[0].warning.empty());
}

TEST(H4Norm, DeterministicProcess) {
  const auto a = deterministic(MeanFunction::constant_value(-0.5), {0.0, 1.0});
  const auto e = h4_norm_estimate(a, 4.0, 2, {0.3, 1.0}, 1000, 1);
  EXPECT_NEAR(e.mc_max, std::exp(0.5), 1e-12);
  EXPECT_DOUBLE_EQ(e.t_at_max, 1.0);
}

TEST(H4Norm, BrownianClosedFormLimit) {
  const auto bm = brownian_motion();
  const auto e = h4_norm_estimate(bm, 2.0, 400, {1.0}, 2000, 1);
  ASSERT_TRUE(e.closed_form_max.has_value());
  EXPECT_NEAR(*e.closed_form_max, std::exp(1.0 / 3.0), 2e-4);
  EXPECT_NEAR(std::exp(1.0 / 3.0), 1.395612, 1e-6);
}

TEST(H4Norm, MonteCarloMatchesClosedForm) {
  const auto bm = brownian_motion();
  const auto e = h4_norm_estimate(bm, 2.0, 3, {1.0}, 200000, 3);
  ASSERT_EQ(e.closed_form.size(), 1u);
  EXPECT_LT(std::abs(e.mc[0] - e.closed_form[0]), 3.0 * e.mc_stderr[0]);
}

TEST(Hypotheses, ExampleOneTheoremFour) {
  const auto r = hypothesis_report(make_example("example1").spec, Theorem::T4);
  EXPECT_EQ(r.verdict, Verdict::Applicable) << to_json(r).dump(2);
}

TEST(Hypotheses, ExampleThreeTheoremTwo) {
  const auto r = hypothesis_report(make_example("example3").spec, Theorem::T2);
  EXPECT_EQ(r.verdict, Verdict::Applicable) << to_json(r).dump(2);
}

TEST(Hypotheses, UniformInitialConditionFailsTheoremOne) {
  ProblemSpec spec(brownian_motion(), brownian_bridge(), Distribution::uniform(1.0, 2.0));
  const auto r = hypothesis_report(spec, Theorem::T1);
  const auto* c = r.find("H3");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, CheckStatus::Fail);
  EXPECT_EQ(r.verdict, Verdict::NotApplicable);
}

TEST(Hypotheses, ForcedTheoremsNeedForcing) {
  const auto r = hypothesis_report(make_example("example1").spec, Theorem::T1);
  EXPECT_NE(r.verdict, Verdict::Applicable);
}

TEST(Io, DistributionRoundTrip) {
  for (const auto& d : {Distribution::normal(0.5, 2.0), Distribution::uniform(1.0, 2.0), Distribution::beta(5.0, 6.0),
                        Distribution::gamma(4.0, 9.0), Distribution::quartic_cauchy()}) {
    const auto back = distribution_from_json(json::parse(to_json(d).dump()));
    for (double x : {-0.3, 0.2, 0.6, 1.4}) EXPECT_EQ(back.pdf(x), d.pdf(x)) << d.name();
  }
  EXPECT_THROW(distribution_from_json(json::parse(R"({"kind":"cauchy"})")), ValidationError);
  EXPECT_THROW(distribution_from_json(json::parse(R"({"kind":"beta","params":{"alpha":2}})")), ValidationError);
}

TEST(Io, ProblemRoundTrip) {
  for (const auto& name : example_names()) {
    const auto ex = make_example(name);
    const auto back = problem_from_json(json::parse(to_json(ex.spec).dump()));
    EXPECT_EQ(back.homogeneous(), ex.spec.homogeneous());
    for (int j = 1; j <= 3; ++j) EXPECT_EQ(back.a.mode(j).eigenvalue, ex.spec.a.mode(j).eigenvalue) << name;
    EXPECT_EQ(back.a.mean()(0.3), ex.spec.a.mean()(0.3));
  }
}

TEST(Io, QuadratureSpecForms) {
  const auto t = parse_quad("tensor:12");
  EXPECT_EQ(t.mode, QuadMode::Tensor);
  EXPECT_EQ(t.nodes_per_dim, 12);
  const auto m = parse_quad("mc:40000:1");
  EXPECT_EQ(m.mode, QuadMode::MonteCarlo);
  EXPECT_EQ(m.n_samples, 40000);
  EXPECT_EQ(m.seed, 1u);
  EXPECT_THROW(parse_quad("mc:10"), ValidationError);
  EXPECT_THROW(parse_quad("tensor:x"), ValidationError);
  const auto j = quadrature_from_json(json::parse(R"({"mode":"tensor","nodes_per_dim":12})"));
  EXPECT_EQ(j.nodes_per_dim, 12);
  EXPECT_EQ(quadrature_from_json(to_json(m)).n_samples, 40000);
}

TEST(RunConfig, EmptyConfigListsRequiredFields) {
  try {
    parse_run_config(json::object());
    FAIL();
  } catch (const ConfigError& e) {
    const auto& v = e.violations();
    auto has = [&](const std::string& key) {
      return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.rfind(key, 0) == 0; });
    };
    EXPECT_TRUE(has("command"));
    EXPECT_TRUE(has("problem"));
    EXPECT_TRUE(has("N/Ns"));
    EXPECT_TRUE(has("t/ts"));
  }
}

TEST(RunConfig, ExampleExpandsToSpec) {
  const auto c = parse_run_config(json::parse(R"({"command":"table","example":"example1","oracle":"exact"})"));
  EXPECT_EQ(c.Ns, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(c.ts, std::vector<double>{0.5});
  EXPECT_EQ(c.x_points, 401);
  EXPECT_EQ(c.quad.nodes_per_dim, 24);
  EXPECT_THROW(parse_run_config(json::parse(R"({"command":"table","example":"example2","oracle":"exact"})")), ConfigError);
}

TEST(RunConfig, ConvergenceCsvHasOneRowPerOrder) {
  const auto c = parse_run_config(
      json::parse(R"({"command":"table","example":"example1","Ns":"1,2","t":"0.5","oracle":"exact"})"));
  std::ostringstream os;
  run(c, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "N,error,kind");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(RunConfig, OutputIsReproducibleAcrossThreads) {
  const auto c = parse_run_config(
      json::parse(R"({"command":"density","example":"example5","N":2,"t":0.4,"xs":"0:1:11","quad":"mc:20000:3"})"));
  std::ostringstream a, b;
  setenv("RODE_THREADS", "1", 1);
  run(c, a);
  setenv("RODE_THREADS", "3", 1);
  run(c, b);
  unsetenv("RODE_THREADS");
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("t,x,value,stderr"), std::string::npos);
}

TEST(RunConfig, DensityGridJson) {
  const auto c = parse_run_config(
      json::parse(R"({"command":"density","example":"example3","N":1,"xs":"0:1.2:7","format":"json"})"));
  std::ostringstream os;
  run(c, os);
  const auto j = json::parse(os.str());
  EXPECT_EQ(j["values"][0].size(), 7u);
  EXPECT_EQ(j["method"]["mode"], "tensor");
}
