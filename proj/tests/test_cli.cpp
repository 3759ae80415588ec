#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/heat_kernel.hpp"
#include "lmfg/io.hpp"
#include "lmfg/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

using namespace lmfg;
using namespace lmfg::cli;
namespace fs = std::filesystem;

namespace {

const char* kBenchmark = R"(
problem:
  spec:
    variant: sum
    components:
      - {variant: stable, sigma: 1.5, axis: 0}
      - {variant: cgmy, C: 1, G: 3, M: 5, Y: 1.25, axis: 1}
  grid: {dim: 2, half_extent: [6, 4], points: [32, 16]}
  horizon: 0.75
  hamiltonian: {preset: stiff, parameter: 2}
  coupling: {type: local, weight: 0.5, exponent: 2}
  terminal: {type: nonlocal, kernel_width: 0.4, weight: 0.3}
  m0: {preset: two-bumps, centers: [[-1, 0], [1, 0.5]], width: 0.35}
solver:
  n_t: 40
  tol_d0: 2.5e-5
  scheme: fictitious-play
  metric: exact-lp
  epsilon_schedule: [0.3, 0.15]
  clip: true
diagnostics: {checks: [mass, positivity]}
sde: {paths: 1234, small_jump_eps: 0.1, wrap: false}
output: bench
seed: 42
)";

bool mentions(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.errors().begin(), e.errors().end(), [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lmfg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config fills every default") {
  const RunConfig c = parse_config("problem: {horizon: 2}\n");
  CHECK(c.problem.horizon == 2.0);
  CHECK(c.problem.spec.measure.variant == "stable");
  CHECK(c.problem.spec.measure.sigma == 1.5);
  CHECK(c.problem.grid.points == std::vector<int>{256});
  CHECK(c.solver.n_t == 64);
  CHECK(c.sde.paths == 10000);
  CHECK(c.seed == 1);
  CHECK(parse_config("").solver.tol_d0 == 1e-4);
}

TEST_CASE("range errors name the offending field") {
  try {
    parse_config("problem:\n  spec: {variant: stable, sigma: 2.5}\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "problem.spec.sigma"));
    CHECK(mentions(e, "2.5"));
  }
}

TEST_CASE("all violations are collected, including unknown keys") {
  try {
    parse_config("problem:\n  spec: {variant: cgmy, C: -1, Y: 3}\n  colour: red\nsolver: {n_t: 0, damping: 2}\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.errors().size() >= 5);
    CHECK(mentions(e, "problem.colour"));
    CHECK(mentions(e, "problem.spec.C"));
    CHECK(mentions(e, "problem.spec.Y"));
    CHECK(mentions(e, "solver.n_t"));
    CHECK(mentions(e, "solver.damping"));
  }
  CHECK_THROWS_AS(parse_config("problem: [1, 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("problem:\n  spec: {variant: stable, cutoff: 1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("diagnostics: {checks: [mass, nonsense]}\n"), ConfigError);
}

TEST_CASE("echo round-trips a full config exactly") {
  const RunConfig c = parse_config(kBenchmark);
  CHECK(c.problem.spec.is_sum);
  CHECK(c.problem.spec.components.size() == 2);
  CHECK(c.problem.m0.centers[1] == std::vector<double>{1.0, 0.5});
  CHECK(c.solver.tol_d0 == 2.5e-5);
  const std::string once = echo(c);
  const RunConfig back = parse_config(once);
  CHECK(echo(back) == once);
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("solve-hjb with zero Hamiltonian reproduces the propagator") {
  const RunConfig c = parse_config(R"(
problem:
  spec: {variant: stable, sigma: 1.4}
  grid: {half_extent: [8], points: [128]}
  horizon: 0.6
  hamiltonian: {preset: zero}
  terminal: {type: nonlocal, kernel_width: 0.5}
  m0: {preset: gaussian-bump, center: [0.5], width: 0.3}
solver: {n_t: 12}
)");
  CommandOptions opt;
  opt.out = scratch("hjb").string();
  const RunReport rep = dispatch("solve-hjb", c, opt);
  CHECK(rep.exit_code() == 0);
  const Field u0 = io::read_grid_file(fs::path(*opt.out) / "u" / "u_0000.lmfg").as_field();
  const Field uT = io::read_grid_file(fs::path(*opt.out) / "u" / "u_0012.lmfg").as_field();
  const LevyMeasureSpec spec = build_spec(c.problem.spec);
  const Field expect = apply_propagator(build_propagator(build_symbol(spec, uT.grid), 0.6), uT);
  CHECK((u0.values - expect.values).abs().maxCoeff() < 1e-12);
  CHECK(fs::exists(fs::path(*opt.out) / "report.json"));
}

TEST_CASE("unknown command is a usage error") {
  CHECK_THROWS_AS(dispatch("solve-everything", RunConfig{}), UsageError);
}

TEST_CASE("pipeline failures carry module, operation and config path") {
  RunConfig c;
  CommandOptions opt;
  opt.config_path = "case.yaml";
  opt.measure_a = "/nonexistent/a.csv";
  opt.measure_b = "/nonexistent/b.csv";
  opt.write_artifacts = false;
  try {
    dispatch("metric-d0", c, opt);
    FAIL("expected RunError");
  } catch (const RunError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("metric-d0: io/load_measure(a)") != std::string::npos);
    CHECK(msg.find("case.yaml") != std::string::npos);
  }
}

TEST_CASE("metric-d0 on point lists with different supports") {
  const fs::path dir = scratch("metric");
  std::ofstream(dir / "a.csv") << "# x,weight\n0,1\n1,1\n";
  std::ofstream(dir / "b.csv") << "0.5,3\n";
  CommandOptions opt;
  opt.measure_a = (dir / "a.csv").string();
  opt.measure_b = (dir / "b.csv").string();
  opt.write_artifacts = false;
  const RunReport rep = dispatch("metric-d0", RunConfig{}, opt);
  REQUIRE(rep.checks.size() == 1);
  // both halves move 0.5 to the midpoint
  CHECK(rep.checks[0].measured["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.data["input_mass"]["a"].get<double>() == 2.0);
  CHECK(rep.exit_code() == 0);
}

TEST_CASE("a failed hard check gives exit code 1") {
  RunConfig c;
  c.problem.grid.half_extent = {4.0};
  c.problem.grid.points = {64};
  c.diagnostics.checks = {"decay"};
  CommandOptions opt;
  opt.write_artifacts = false;
  const RunReport rep = dispatch("kernel-probe", c, opt);
  CHECK(rep.hard_failure());
  CHECK(rep.exit_code() == 1);
  CHECK(rep.to_json()["status"] == "fail");
}
