#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/mfg.hpp"
#include "lmfg/spectral.hpp"

#include <chrono>

using namespace lmfg;

namespace {

const Grid kLine = Grid::cube(1, 4.0, 256);

ProbabilityField initial_density(const Grid& g, double centre = 0.5, double width = 0.5) {
  return ProbabilityField::normalized(Field::sample(g, [&](const std::vector<double>& x) {
    return std::exp(-(x[0] - centre) * (x[0] - centre) / (2 * width * width));
  }));
}

/// Monotone benchmark: Gaussian-bump nonlocal coupling, quadratic H.
MFGProblem benchmark(int n_t = 64) {
  Coupling F(NonlocalCoupling{gaussian_kernel(kLine, 0.3), {}, true, 2.0});
  Coupling G(NonlocalCoupling{gaussian_kernel(kLine, 0.3), {}, true, 1.0});
  return make_mfg_problem(quadratic_hamiltonian(), F, G, initial_density(kLine), LevyMeasureSpec(IsotropicStable{1.5}),
                          1.0, n_t);
}

LocalCoupling identity_local(double weight) {
  return LocalCoupling{[weight](const std::vector<RealArray>&, const RealArray& k) { return RealArray(weight * k); }, true,
                       true};
}

}  // namespace

TEST_CASE("coupling constructors and monotonicity flags") {
  const Coupling gauss(NonlocalCoupling{gaussian_kernel(kLine, 0.3), {}, true, 1.0});
  CHECK(gauss.monotone());
  CHECK(monotonicity_spot_check(gauss, kLine).ok);

  // A box kernel is nonnegative, yet its transform changes sign: not monotone.
  Field box = Field::sample(kLine, [](const std::vector<double>& x) { return std::abs(x[0]) <= 1.0 ? 0.5 : 0.0; });
  const Coupling boxed(NonlocalCoupling{box, {}, true, 1.0});
  CHECK_FALSE(boxed.monotone());
  CHECK_FALSE(monotonicity_spot_check(boxed, kLine, 3, 200).ok);

  // composite form with a box kernel is monotone (even kernel, nondecreasing phi)
  const Coupling composite(NonlocalCoupling{
      box, [](const std::vector<RealArray>&, const RealArray& k) { return RealArray(k.cube() + k); }, true, 1.0});
  CHECK(composite.monotone());
  CHECK(monotonicity_spot_check(composite, kLine).ok);

  const Coupling local(identity_local(1.0));
  CHECK(local.monotone());
  CHECK(monotonicity_spot_check(local, kLine).ok);

  const Coupling moll = mollified_coupling(identity_local(1.0), 0.2, kLine);
  CHECK(moll.monotone());
  CHECK(monotonicity_spot_check(moll, kLine).ok);
  CHECK_THROWS_AS(mollified_coupling(identity_local(1.0), 0.5 * kLine.spacing(0), kLine), ContractViolation);
}

TEST_CASE("mollified coupling") {
  const Field uniform = Field::constant(kLine, 1.0 / kLine.volume());
  for (double eps : {0.1, 0.4, 1.0}) {
    const Field v = mollified_coupling(identity_local(1.0), eps, kLine).evaluate(uniform);
    CHECK((v.values - uniform.values).abs().maxCoeff() <= 1e-14);
  }
  const Grid fine = Grid::cube(1, 4.0, 4096);
  const Field mu = initial_density(fine, 0.0, 0.5).field();
  std::vector<double> err;
  for (double eps : {0.4, 0.2, 0.1}) {
    const Field v = mollified_coupling(identity_local(1.0), eps, fine).evaluate(mu);
    err.push_back((v.values - mu.values).abs().maxCoeff());
  }
  MESSAGE("mollifier errors " << err[0] << " " << err[1] << " " << err[2]);
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("decoupled problem: best response is the heat flow, one update converges") {
  MFGProblem p = make_mfg_problem(quadratic_hamiltonian(), Coupling::zero(), Coupling::zero(), initial_density(kLine),
                                  LevyMeasureSpec(IsotropicStable{1.5}), 1.0, 16);
  const auto br = best_response(seed_trajectory(p, "uniform"), p);
  CHECK(br.hjb.u.back().values.abs().maxCoeff() == 0.0);
  const RealArray heat = apply_propagator(build_propagator(p.adjoint, 1.0), p.m0.values());
  CHECK((br.fp.m.back().values - heat).abs().maxCoeff() <= 1e-10);
  const auto again = best_response(seed_trajectory(p, "uniform"), p);
  CHECK((again.fp.m.back().values == br.fp.m.back().values).all());

  const MFGSolution sol = solve_mfg(p, seed_trajectory(p, "bump"));
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.residuals.back() == 0.0);
}

TEST_CASE("two-seed uniqueness shadow on the monotone benchmark") {
  MFGProblem p = benchmark();
  const auto t0 = std::chrono::steady_clock::now();
  const MFGSolution a = solve_mfg(p, seed_trajectory(p, "uniform"));
  const MFGSolution b = solve_mfg(p, seed_trajectory(p, "bump"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("iterations " << a.iterations << " / " << b.iterations << ", " << secs << " s");
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  const double gap = d0_trajectory_sup(a.fp.m, b.fp.m, D0Method::exact_lp).value;
  MESSAGE("inter-seed sup_t d0 = " << gap);
  CHECK(gap <= 1e-3);
  const UniquenessEnergy e = uniqueness_energy_diagnostic(a, b, p);
  MESSAGE("boundary " << e.boundary_term << " coupling " << e.coupling_term << " bregman " << e.bregman_term
                      << " convexity " << e.convexity_term << " residual " << e.identity_residual);
  CHECK(e.boundary_term >= -1e-8);
  CHECK(e.coupling_term >= -1e-8);
  CHECK(e.bregman_term >= -1e-8);
  CHECK(e.convexity_term >= -1e-8);
  CHECK(e.convexity_term <= 10 * p.iteration.tol_d0 * p.iteration.tol_d0 * p.horizon * kLine.volume());

  const UniquenessEnergy same = uniqueness_energy_diagnostic(a, a, p);
  CHECK(same.convexity_term == 0.0);
  CHECK(same.coupling_term == 0.0);

  // truncated run: the diagnostic sees the difference
  MFGProblem early = p;
  early.iteration.max_outer = 1;
  const MFGSolution c = solve_mfg(early, seed_trajectory(p, "bump"));
  CHECK_FALSE(c.converged);
  CHECK(uniqueness_energy_diagnostic(a, c, p).convexity_term > 1e-6);

  // residual series decreases after the first few iterations
  for (std::size_t k = 3; k < a.residuals.size(); ++k) CHECK(a.residuals[k] <= a.residuals[k - 1] * (1 + 1e-9));
}

TEST_CASE("fictitious play reaches the same equilibrium or reports non-convergence") {
  MFGProblem p = benchmark(32);
  const MFGSolution picard = solve_mfg(p, seed_trajectory(p, "m0"));
  p.iteration.scheme = OuterScheme::fictitious_play;
  p.iteration.tol_d0 = 1e-3;
  p.iteration.max_outer = 400;
  const MFGSolution fict = solve_mfg(p, seed_trajectory(p, "m0"));
  if (fict.converged)
    CHECK(d0_trajectory_sup(picard.fp.m, fict.fp.m).value <= 3e-3);
  else
    CHECK(fict.residuals.size() == 400u);
  p.iteration.max_outer = 2;
  const MFGSolution cut = solve_mfg(p, seed_trajectory(p, "uniform"));
  CHECK_FALSE(cut.converged);
  CHECK(cut.residuals.size() == 2u);
}

TEST_CASE("local coupling by epsilon-continuation") {
  MFGProblem p = make_mfg_problem(quadratic_hamiltonian(), Coupling::zero(), Coupling::zero(), initial_density(kLine),
                                  LevyMeasureSpec(IsotropicStable{1.5}), 1.0, 32);
  const auto levels = solve_mfg_local(p, identity_local(0.3), {0.4, 0.2, 0.1});
  REQUIRE(levels.size() == 3u);
  for (const auto& l : levels) CHECK(l.solution.converged);
  MESSAGE("inter-level changes " << levels[1].change << " " << levels[2].change);
  CHECK(levels[2].change < levels[1].change);

  // narrow-kernel nonlocal cross-check
  MFGProblem q = p;
  q.coupling = Coupling(NonlocalCoupling{gaussian_kernel(kLine, 0.02), {}, true, 0.3});
  const MFGSolution nonlocal = solve_mfg(q, seed_trajectory(q, "m0"));
  const double d = d0_trajectory_sup(levels.back().solution.fp.m, nonlocal.fp.m, D0Method::exact_lp).value;
  MESSAGE("local vs narrow nonlocal d0 = " << d);
  CHECK(d <= 1e-3);

  const auto trivial = solve_mfg_local(p, LocalCoupling{[](const std::vector<RealArray>&, const RealArray& k) {
                                                           return RealArray(RealArray::Zero(k.size()));
                                                         }, true, true},
                                       {0.2});
  const MFGSolution decoupled = solve_mfg(p, seed_trajectory(p, "m0"));
  CHECK((trivial.back().solution.fp.m.back().values - decoupled.fp.m.back().values).abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(solve_mfg_local(p, identity_local(1.0), {0.1, 0.2}), ContractViolation);
}
