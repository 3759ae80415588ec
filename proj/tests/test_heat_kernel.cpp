#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/heat_kernel.hpp"
#include "lmfg/spectral.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

using namespace lmfg;

namespace {
Index center(const Grid& g) {
  std::vector<int> idx(g.dim());
  for (int a = 0; a < g.dim(); ++a) idx[a] = g.points(a) / 2;
  return g.flatten(idx);
}
}  // namespace

TEST_CASE("engine symbols reproduce the Cauchy and Gaussian kernels") {
  const Grid g = Grid::cube(1, 256.0, 4096);
  const auto cauchy = kernel_snapshot(build_propagator(build_symbol(LevyMeasureSpec::engine(1.0), g), 1.0));
  CHECK(std::abs(cauchy.kernel.values[center(g)] - 1.0 / M_PI) < 1e-4);
  const auto gauss = kernel_snapshot(build_propagator(build_symbol(LevyMeasureSpec::engine(2.0), g), 1.0));
  CHECK(std::abs(gauss.kernel.values[center(g)] - 1.0 / std::sqrt(4.0 * M_PI)) < 1e-6);
  CHECK(std::abs(gauss.mass - 1.0) < 1e-8);
  // the whole Gaussian profile, not just the peak
  for (int j : {2048 + 8, 2048 + 24}) {
    const double x = g.coordinate(0, j);
    CHECK(std::abs(gauss.kernel.values[j] - std::exp(-x * x / 4.0) / std::sqrt(4.0 * M_PI)) < 1e-10);
  }
}

TEST_CASE("propagator invariants") {
  const Grid g = Grid::cube(2, 10.0, 32);
  const Symbol sym = build_symbol(LevyMeasureSpec(IsotropicStable{1.4}), g);
  const Propagator a = build_propagator(sym, 0.3), b = build_propagator(sym, 0.45);
  CHECK(a.values[0] == Complex(1.0));
  CHECK(a.values.abs().maxCoeff() <= 1.0);
  CHECK((compose(a, b).values - build_propagator(sym, 0.75).values).abs().maxCoeff() < 1e-12);
  CHECK((build_propagator(sym, 0.0).values - 1.0).abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(build_propagator(sym, -1.0), ContractViolation);
}

TEST_CASE("stable kernel against numerical inverse Fourier transform") {
  const double sigma = 1.5;
  const Grid g = Grid::cube(1, 256.0, 4096);
  const auto snap = kernel_snapshot(build_propagator(build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g), 1.0));
  CHECK(snap.resolution.ok);
  boost::math::quadrature::ooura_fourier_cos<double> oc;
  auto phi = [&](double xi) { return std::exp(-std::pow(xi, sigma)) / M_PI; };
  for (double x : {0.0, 1.0, 5.0}) {
    const double want =
        x == 0.0 ? std::tgamma(1.0 + 1.0 / sigma) / M_PI : oc.integrate(phi, x).first;
    const int j = static_cast<int>(std::lround((x + 256.0) / g.spacing(0)));
    CHECK(std::abs(snap.kernel.values[j] - want) < 1e-4 * std::max(1.0, want));
  }
  CHECK(snap.min_value > -1e-6 * snap.kernel.values.maxCoeff());
}

TEST_CASE("anisotropic sum kernel factorizes") {
  const LevyMeasureSpec a(IsotropicStable{1.3}), b(TemperedCGMY{1.0, 2.0, 3.0, 1.7});
  AnisotropicSum sum;
  sum.components.push_back({0, IsotropicStable{1.3}});
  sum.components.push_back({1, TemperedCGMY{1.0, 2.0, 3.0, 1.7}});
  const Grid g2({20.0, 15.0}, {128, 64});
  const Grid gx = Grid::cube(1, 20.0, 128), gy = Grid::cube(1, 15.0, 64);
  const double t = 0.8;
  const RealArray k2 = kernel_snapshot(build_propagator(build_symbol(LevyMeasureSpec(sum), g2), t)).kernel.values;
  const RealArray kx = kernel_snapshot(build_propagator(build_symbol(a, gx), t)).kernel.values;
  const RealArray ky = kernel_snapshot(build_propagator(build_symbol(b, gy), t)).kernel.values;
  double err = 0.0;
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < 64; ++j) err = std::max(err, std::abs(k2[g2.flatten({i, j})] - kx[i] * ky[j]));
  CHECK(err < 1e-8);
}

TEST_CASE("adjoint kernel is the mirror image") {
  const Grid g = Grid::cube(1, 30.0, 512);
  const Symbol sym = build_symbol(LevyMeasureSpec(TemperedCGMY{1.0, 1.0, 6.0, 1.5}), g);
  const RealArray k = kernel_snapshot(build_propagator(sym, 0.5)).kernel.values;
  const RealArray ka = kernel_snapshot(build_propagator(adjoint_symbol(sym), 0.5)).kernel.values;
  CHECK((ka - reflect(g, k)).abs().maxCoeff() < 1e-12);
  CHECK((k - reflect(g, k)).abs().maxCoeff() > 1e-3);  // genuinely asymmetric
}

TEST_CASE("semigroup difference quotient converges to the generator at first order") {
  const Grid g = Grid::cube(1, M_PI, 64);
  const Symbol sym = build_symbol(LevyMeasureSpec(IsotropicStable{1.5}), g);
  const Field u0 = Field::sample(g, [](const std::vector<double>& x) { return std::exp(std::cos(x[0])); });
  const RealArray lu = apply_operator(sym, u0).values;
  std::vector<double> errs;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const RealArray q = (apply_propagator(build_propagator(sym, dt), u0.values) - u0.values) / dt;
    errs.push_back((q - lu).abs().maxCoeff());
  }
  CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(errs[1] / errs[2] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("decay probes in one dimension") {
  const Grid g = Grid::cube(1, 256.0, 4096);
  const LevyMeasureSpec s(IsotropicStable{1.5});
  const std::vector<double> ts{0.5, 1.0, 2.0, 4.0};
  const auto p10 = decay_rate_probe(s, g, 1.0, {0}, ts);
  CHECK(std::abs(p10.fitted_slope) < 1e-8);
  const auto p11 = decay_rate_probe(s, g, 1.0, {1}, ts);
  CHECK(p11.theory_slope == doctest::Approx(-2.0 / 3.0));
  CHECK(p11.within(0.05));
  const auto pinf = decay_rate_probe(s, g, kInfNorm, {0}, ts);
  CHECK(pinf.within(0.05));
  const auto fr = fractional_decay_probe(s, g, 0.75, false, ts);
  CHECK(fr.theory_slope == doctest::Approx(-0.5));
  CHECK(fr.within(0.05));
  const auto fg = fractional_decay_probe(s, g, 0.5, true, ts);
  CHECK(fg.within(0.05));
  CHECK(probe_csv({p10, fg}).find("spec,p,beta") == 0);
  // a box far too small is refused
  CHECK_THROWS_AS(decay_rate_probe(s, Grid::cube(1, 4.0, 64), 1.0, {0}, ts), DomainTooSmall);
}
