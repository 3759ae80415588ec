#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/fp.hpp"
#include "lmfg/spectral.hpp"

#include <random>

using namespace lmfg;

namespace {

ProbabilityField bump(const Grid& g, double width, double centre = 0.0) {
  return ProbabilityField::normalized(Field::sample(g, [&](const std::vector<double>& x) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const double c = a == 0 ? centre : 0.0;
      r2 += (x[a] - c) * (x[a] - c);
    }
    return std::exp(-r2 / (2 * width * width));
  }));
}

Symbol stable_adjoint(const Grid& g, double sigma) {
  return adjoint_symbol(build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g));
}

FPInput make_input(const Grid& g, double sigma, double T, int n_t, double width = 0.5) {
  return FPInput{{}, bump(g, width), stable_adjoint(g, sigma), T, n_t, {}};
}

/// Smooth periodic drift field at every time node.
std::vector<VectorField> smooth_drift(const Grid& g, int n_t, double T, double amp, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coef(4 * g.dim());
  for (auto& c : coef) c = u(rng);
  const auto x = g.coordinates();
  std::vector<VectorField> out;
  for (int k = 0; k <= n_t; ++k) {
    const double t = k * T / n_t;
    VectorField b;
    for (int a = 0; a < g.dim(); ++a) {
      const double w = M_PI / g.half_extent(a);
      RealArray comp = RealArray::Constant(g.size(), coef[4 * a] * amp);
      for (int e = 0; e < g.dim(); ++e)
        comp += amp * coef[4 * a + 1 + (e % 3)] * (w * x[e] + t).sin() * std::cos(t);
      b.push_back(comp);
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("zero drift reproduces the adjoint heat flow") {
  const Grid g = Grid::cube(1, 8.0, 256);
  const FPInput in = make_input(g, 1.5, 1.0, 20);
  const FPSolution sol = solve_fp_forward(in);
  const RealArray exact = apply_propagator(build_propagator(in.adjoint, 1.0), in.m0.values());
  CHECK((sol.m.back().values - exact).abs().maxCoeff() <= 1e-10);
  CHECK(sol.m.back().time.value() == doctest::Approx(1.0));
}

TEST_CASE("constant drift translates the heat flow, error at least first order") {
  const Grid g = Grid::cube(1, 8.0, 256);
  const double c = 0.7, T = 1.0;
  std::vector<double> err;
  for (int n_t : {8, 16, 32}) {
    FPInput in = make_input(g, 1.5, T, n_t);
    in.drift.assign(n_t + 1, VectorField{RealArray::Constant(g.size(), c)});
    const FPSolution sol = solve_fp_forward(in);
    // exact: K*(T) m0 shifted by cT, as a multiplier e^{-i xi c T}
    ComplexArray shift = (frequency_component(g, 0) * (-c * T)).cast<Complex>() * Complex(0, 1);
    shift = shift.exp();
    const RealArray heat = apply_propagator(build_propagator(in.adjoint, T), in.m0.values());
    const RealArray exact = apply_multiplier(g, heat, shift);
    err.push_back((sol.m.back().values - exact).abs().maxCoeff());
  }
  MESSAGE("constant-drift errors " << err[0] << " " << err[1] << " " << err[2]);
  CHECK(std::log2(err[0] / err[1]) >= 0.95);
  CHECK(std::log2(err[1] / err[2]) >= 0.95);
}

TEST_CASE("mass is conserved and positivity is monitored") {
  SUBCASE("1D, random smooth drift, 100 steps") {
    const Grid g = Grid::cube(1, 8.0, 256);
    FPInput in = make_input(g, 1.3, 1.0, 100);
    in.drift = smooth_drift(g, 100, 1.0, 0.8, 7);
    const FPSolution sol = solve_fp_forward(in);
    const auto rep = positivity_comparison_check(sol);
    CHECK(rep.mass_defect <= 1e-8);
    CHECK(rep.satisfied);
  }
  SUBCASE("2D rotational drift") {
    const Grid g = Grid::cube(2, 6.0, 64);
    FPInput in = make_input(g, 1.5, 1.0, 100, 0.6);
    in.m0 = bump(g, 0.6, 1.0);
    const auto x = g.coordinates();
    in.drift.assign(101, VectorField{-0.5 * x[1], 0.5 * x[0]});
    const FPSolution sol = solve_fp_forward(in);
    const auto rep = positivity_comparison_check(sol);
    CHECK(rep.mass_defect <= 1e-8);
    CHECK(rep.min_relative >= -1e-6);
  }
  SUBCASE("huge steps trip the hard limit; clipping is reported") {
    const Grid g = Grid::cube(1, 8.0, 256);
    FPInput in = make_input(g, 1.5, 1.0, 2, 0.1);
    in.drift.assign(3, VectorField{RealArray::Constant(g.size(), 40.0) * frequency_component(g, 0).sign()});
    in.drift.assign(3, VectorField{40.0 * (M_PI * g.coordinates()[0] / 8.0).sin()});
    CHECK_THROWS_AS(solve_fp_forward(in), SolverDivergence);
    in.options.positivity_hard_limit = 10.0;
    in.options.clip = true;
    const FPSolution sol = solve_fp_forward(in);
    CHECK(sol.clipped_mass > 0.0);
    CHECK(std::abs(sol.m.back().integral() - 1.0) <= 1e-12);
    CHECK(sol.m.back().values.minCoeff() >= 0.0);
  }
}

TEST_CASE("very weak identity") {
  const Grid g = Grid::cube(1, M_PI, 64);
  SUBCASE("constant test function gives the mass defect") {
    FPInput in = make_input(g, 1.5, 1.0, 20);
    in.drift = smooth_drift(g, 20, 1.0, 0.5, 3);
    const FPSolution sol = solve_fp_forward(in);
    CHECK(very_weak_residual(sol, in, [](double, const std::vector<double>&) { return 1.0; }) <= 1e-8);
  }
  SUBCASE("cosine mode without drift, first order or better") {
    std::vector<double> r;
    for (int n_t : {8, 16, 32}) {
      const FPInput in = make_input(g, 1.5, 1.0, n_t);
      const FPSolution sol = solve_fp_forward(in);
      r.push_back(very_weak_residual(sol, in, [](double t, const std::vector<double>& x) { return std::cos(x[0]) * (1 + t); }));
    }
    MESSAGE("cosine residuals " << r[0] << " " << r[1] << " " << r[2]);
    CHECK(std::log2(r[0] / r[1]) >= 0.9);
    CHECK(std::log2(r[1] / r[2]) >= 0.9);
  }
  SUBCASE("random test function, smooth drift, residual shrinks with dt") {
    std::vector<double> r;
    for (int n_t : {8, 16, 32, 64}) {
      FPInput in = make_input(g, 1.5, 1.0, n_t);
      in.drift = smooth_drift(g, n_t, 1.0, 0.8, 5);
      const FPSolution sol = solve_fp_forward(in);
      double worst = 0.0;
      for (double phase : {0.3, 1.1, 2.0, 2.9})
        worst = std::max(worst, very_weak_residual(sol, in, [phase](double t, const std::vector<double>& x) {
          return std::sin(x[0] + phase) * std::exp(-t) + 0.5 * std::cos(2 * x[0] - phase) * t;
        }));
      r.push_back(worst);
    }
    MESSAGE("drift residuals " << r[0] << " " << r[1] << " " << r[2] << " " << r[3]);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] < 0.6 * r[i - 1]);
  }
}

TEST_CASE("d0 time continuity exponent from a narrow bump") {
  const Grid g = Grid::cube(1, 5.0, 4096);
  FPInput in{{}, bump(g, 0.01), stable_adjoint(g, 1.5), 0.1, 10, {}};
  const FPSolution sol = solve_fp_forward(in);
  const auto rep = d0_equicontinuity_probe(sol, in, 0.01, 0.1);
  MESSAGE("fitted exponent " << rep.exponent << " (theory " << rep.theory_exponent << "), c = " << rep.constant);
  CHECK(std::abs(rep.exponent - 1.0 / 1.5) <= 0.1);
  for (std::size_t i = 0; i < rep.lag.size(); ++i)
    CHECK(rep.distance[i] <= rep.constant * std::pow(rep.lag[i], 1.0 / 1.5) * (1 + 1e-12));
}

TEST_CASE("Lyapunov tail inequality and torus health") {
  const Grid g = Grid::cube(1, 128.0, 4096);
  for (double c : {0.0, 1.0}) {
    FPInput in = make_input(g, 1.5, 2.0, 40);
    if (c > 0) in.drift.assign(41, VectorField{RealArray::Constant(g.size(), c)});
    const FPSolution sol = solve_fp_forward(in);
    const auto rep = lyapunov_tail_check(sol, in, log_tail_function());
    CHECK(rep.satisfied);
    CHECK(rep.lhs.front() <= rep.rhs.front());
    CHECK(rep.torus_healthy);
    if (c > 0) CHECK(rep.rhs.back() - rep.rhs.front() >= rep.lhs.back() - rep.lhs.front());
  }
  // psi(r) = r^2 is not integrable against a stable tail
  FPInput in = make_input(g, 1.5, 0.1, 2);
  const FPSolution sol = solve_fp_forward(in);
  TailFunction bad{[](double r) { return r * r; }, 1.0, 1.0, "r^2"};
  CHECK_THROWS_AS(lyapunov_tail_check(sol, in, bad), ContractViolation);
}

TEST_CASE("L-infinity bound") {
  const Grid g = Grid::cube(1, 8.0, 256);
  FPInput in = make_input(g, 1.5, 1.0, 20, 0.3);
  FPSolution sol = solve_fp_forward(in);
  CHECK_THROWS_AS(linf_bound_check(sol, in, 2.0), ContractViolation);
  CHECK_THROWS_AS(linf_bound_check(sol, in, 1.0), ContractViolation);
  LinfReport rep = linf_bound_check(sol, in, 1.5);
  CHECK(rep.measured <= rep.m0_sup + 1e-12);  // pure smoothing
  CHECK(rep.required_constant == 0.0);
  in.drift = smooth_drift(g, 20, 1.0, 2.0, 1);
  sol = solve_fp_forward(in);
  rep = linf_bound_check(sol, in, 1.5);
  CHECK(std::isfinite(rep.required_constant));
  CHECK(rep.measured <= rep.bound(rep.required_constant) * (1 + 1e-12));
}

TEST_CASE("explicit drift step restriction") {
  // dt^{1-1/sigma} ||b|| above one: high modes grow and the run is refused
  const Grid g = Grid::cube(1, 8.0, 512);
  FPInput in = make_input(g, 1.3, 1.0, 100, 0.45);
  const RealArray x = g.coordinates()[0];
  in.drift.assign(101, VectorField{RealArray(-6.0 * x * (-x.square() / 8.0).exp())});
  CHECK(drift_stability_number(in) > 1.0);
  CHECK_THROWS_AS(solve_fp_forward(in), SolverDivergence);
  // the same drift at a smaller step is stable
  FPInput fine = make_input(g, 1.3, 1.0, 4000, 0.45);
  fine.drift.assign(4001, VectorField{RealArray(-6.0 * x * (-x.square() / 8.0).exp())});
  CHECK(drift_stability_number(fine) < 1.0);
  const auto rep = positivity_comparison_check(solve_fp_forward(fine));
  CHECK(rep.satisfied);
}
