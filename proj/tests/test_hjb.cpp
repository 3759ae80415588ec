#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/hjb.hpp"
#include "lmfg/spectral.hpp"

using namespace lmfg;

namespace {

const Grid kCircle = Grid::cube(1, M_PI, 32);

/// Manufactured backward problem with exact solution e^{-t} cos x.
HJBInput manufactured(int n_t, double sigma = 1.5, double T = 1.0) {
  HJBInput in{quadratic_hamiltonian(), {}, {}, build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), kCircle), T, n_t, {}};
  for (int k = 0; k <= n_t; ++k) {
    const double t = k * T / n_t;
    in.source.push_back(Field::sample(kCircle, [t](const std::vector<double>& x) {
      const double s = std::sin(x[0]);
      return 2.0 * std::exp(-t) * std::cos(x[0]) + 0.5 * std::exp(-2.0 * t) * s * s;
    }));
  }
  in.terminal = Field::sample(kCircle, [T](const std::vector<double>& x) { return std::exp(-T) * std::cos(x[0]); });
  return in;
}

double sup_error(const HJBSolution& sol) {
  double e = 0.0;
  for (int k = 0; k <= sol.n_t; ++k) {
    const double t = k * sol.time_step();
    const Field want = Field::sample(sol.grid, [t](const std::vector<double>& x) { return std::exp(-t) * std::cos(x[0]); });
    e = std::max(e, (sol.u[k].values - want.values).abs().maxCoeff());
  }
  return e;
}

}  // namespace

TEST_CASE("hamiltonian presets are self-consistent") {
  for (const char* name : {"quadratic", "eikonal", "zero", "stiff", "discounted"}) {
    const auto c = check_hamiltonian(hamiltonian_preset(name, 2.0), 2);
    CHECK_MESSAGE(c.ok, name);
  }
  CHECK_THROWS_AS(hamiltonian_preset("cubic"), ContractViolation);
  // a gamma that is too optimistic is caught
  Hamiltonian h = discounted_quadratic_hamiltonian(0.5);
  h.gamma = 2.0;
  CHECK(check_hamiltonian(h, 1).monotonicity_defect > 0.0);
}

TEST_CASE("zero Hamiltonian reduces to linear heat evolution") {
  const Grid g = Grid::cube(1, 10.0, 128);
  const Symbol sym = build_symbol(LevyMeasureSpec(TemperedCGMY{1.0, 2.0, 4.0, 1.5}), g);
  const Field G = Field::sample(g, [](const std::vector<double>& x) { return std::exp(-x[0] * x[0]); });
  HJBInput in{zero_hamiltonian(), {}, G, sym, 1.0, 16, {}};
  const HJBSolution sol = solve_hjb_backward(in);
  for (int k = 0; k <= 16; ++k) {
    const RealArray want = apply_propagator(build_propagator(sym, 1.0 - k / 16.0), G.values);
    CHECK((sol.u[k].values - want).abs().maxCoeff() < 1e-8);
  }
  for (const auto& w : sol.windows) {
    CHECK(w.sweeps == 1);
    CHECK(w.ratio == 0.0);
  }
}

TEST_CASE("manufactured solution converges at first order or better") {
  std::vector<double> errs;
  for (int n : {32, 64, 128}) errs.push_back(sup_error(solve_hjb_backward(manufactured(n))));
  MESSAGE("errors " << errs[0] << " " << errs[1] << " " << errs[2]);
  CHECK(std::log2(errs[0] / errs[1]) >= 0.95);
  CHECK(std::log2(errs[1] / errs[2]) >= 0.95);
  CHECK(errs[2] < 1e-3);
}

TEST_CASE("strong-form residual decreases under refinement") {
  const auto a = manufactured(32), b = manufactured(64);
  const double ra = strong_form_residual(solve_hjb_backward(a), a);
  const double rb = strong_form_residual(solve_hjb_backward(b), b);
  CHECK(rb < 0.6 * ra);
}

TEST_CASE("picard windows contract and discrete Duhamel relation holds") {
  auto in = manufactured(64);
  in.picard.window = 0.125;
  const HJBSolution sol = solve_hjb_backward(in);
  for (const auto& w : sol.windows) CHECK(w.ratio < 0.5);
  CHECK(sol.bisections == 0);
  CHECK(duhamel_residual(sol, in) < 1e-9);
  const auto w = picard_window(in, in.terminal.values, 0, 8);
  CHECK(w.v.size() == 9);
  CHECK_THROWS_AS(picard_window(in, in.terminal.values, 0, 16), ContractViolation);
}

TEST_CASE("stiff Hamiltonian exercises window bisection") {
  const Grid g = Grid::cube(1, M_PI, 32);
  const Field G = Field::sample(g, [](const std::vector<double>& x) { return 0.3 * std::sin(x[0]); });
  HJBInput in{quadratic_hamiltonian(20.0), {}, G, build_symbol(LevyMeasureSpec(IsotropicStable{1.5}), g), 1.0, 64, {}};
  in.picard.window = 1.0;
  const HJBSolution sol = solve_hjb_backward(in);
  CHECK(sol.bisections > 0);
  CHECK(sol.u[0].all_finite());
  // a linear term whose Picard map cannot contract even over one step
  HJBInput bad = in;
  bad.hamiltonian = discounted_quadratic_hamiltonian(2000.0);
  CHECK_THROWS_AS(solve_hjb_backward(bad), SolverDivergence);
}

TEST_CASE("a-priori sup and Lipschitz bounds") {
  for (double T : {0.5, 1.0, 2.0}) {
    auto in = manufactured(64, 1.5, T);
    const HJBSolution sol = solve_hjb_backward(in);
    const auto sup = sup_bound_check(sol, in);
    const auto lip = lipschitz_diagnostic(sol, in);
    CHECK(sup.satisfied);
    CHECK(lip.satisfied);
    CHECK(lip.measured == doctest::Approx(1.0).epsilon(1e-2));  // |D u| = e^{-t} at t = 0
  }
  // f = 0, constant G, H(p) with H(0) = 0: u stays constant
  const Grid g = Grid::cube(1, 5.0, 64);
  HJBInput flat{eikonal_hamiltonian(), {}, Field::constant(g, 0.7), build_symbol(LevyMeasureSpec(IsotropicStable{1.3}), g), 1.0,
                8, {}};
  const HJBSolution s = solve_hjb_backward(flat);
  CHECK(lipschitz_diagnostic(s, flat).measured < 1e-12);
}

TEST_CASE("comparison principle with ordered terminal data") {
  auto in = manufactured(32);
  const HJBSolution lo = solve_hjb_backward(in);
  SUBCASE("equal data") { CHECK(comparison_diagnostic(lo, lo).min_difference == 0.0); }
  SUBCASE("shifted by one") {
    auto up = in;
    up.terminal.values += 1.0;
    const HJBSolution hi = solve_hjb_backward(up);
    for (int k = 0; k <= 32; ++k) CHECK((hi.u[k].values - lo.u[k].values - 1.0).abs().maxCoeff() < 1e-8);
  }
  SUBCASE("bump") {
    auto up = in;
    up.terminal.values += Field::sample(kCircle, [](const std::vector<double>& x) { return std::exp(-4 * x[0] * x[0]); }).values;
    CHECK(comparison_diagnostic(lo, solve_hjb_backward(up)).satisfied);
  }
}
