#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/levy.hpp"
#include "lmfg/spectral.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

using namespace lmfg;
namespace bq = boost::math::quadrature;

namespace {

// Cancellation-free cos t - 1 and sin t - t for the oracle integrands.
double cosm1(double t) {
  const double h = std::sin(0.5 * t);
  return -2.0 * h * h;
}
double sinm(double t) {
  if (std::abs(t) > 0.5) return std::sin(t) - t;
  double term = t, sum = 0.0;
  for (int k = 1; k < 12; ++k) {
    term *= -t * t / ((2 * k) * (2 * k + 1));
    sum += term;
  }
  return sum;
}

/// Independent 1D symbol oracle: int (e^{i xi z} - 1 - i xi z 1_{|z|<1}) k(z) dz
/// with tanh-sinh on the inner part and Ooura Fourier rules on the tails.
Complex raw_symbol_1d(const std::function<double(double)>& k, double xi) {
  bq::tanh_sinh<double> ts;
  auto inner_re = [&](double z) { return z < 1e-100 ? 0.0 : cosm1(xi * z) * (k(z) + k(-z)); };
  auto inner_im = [&](double z) { return z < 1e-100 ? 0.0 : sinm(xi * z) * (k(z) - k(-z)); };
  double re = ts.integrate(inner_re, 0.0, 1.0, 1e-13);
  double im = ts.integrate(inner_im, 0.0, 1.0, 1e-13);
  // int_1^inf h(z) e^{i xi z} dz with z = 1 + t
  bq::ooura_fourier_cos<double> oc;
  bq::ooura_fourier_sin<double> os;
  const double w = std::abs(xi), sg = xi > 0 ? 1.0 : -1.0;
  auto tail = [&](const std::function<double(double)>& h) {
    auto ht = [&](double t) { return h(1.0 + t); };
    const double c = oc.integrate(ht, w).first, s = os.integrate(ht, w).first;
    // e^{i w (1+t)} = (cos w + i sin w)(cos wt + i sin wt)
    return Complex(std::cos(w) * c - std::sin(w) * s, std::sin(w) * c + std::cos(w) * s);
  };
  bq::exp_sinh<double> es;
  auto kp = [&](double z) { return k(z); };
  auto km = [&](double z) { return k(-z); };
  const Complex tp = tail(kp), tm = tail(km);
  const double mass = es.integrate([&](double z) { return k(1.0 + z) + k(-1.0 - z); }, 0.0, std::numeric_limits<double>::infinity());
  // positive side e^{i xi z}, negative side e^{-i xi z}
  Complex plus = sg > 0 ? tp : std::conj(tp);
  Complex minus = sg > 0 ? std::conj(tm) : tm;
  return Complex(re, im) + plus + minus - mass;
}

}  // namespace

TEST_CASE("stable constant matches the one-dimensional closed form") {
  for (double s : {1.2, 1.5, 1.8}) {
    const double want = std::tgamma(1.0 + s) * std::sin(M_PI * s / 2.0) / M_PI;
    CHECK(stable_constant(1, s) == doctest::Approx(want).epsilon(1e-13));
  }
  CHECK(sphere_area(2) == doctest::Approx(2 * M_PI));
  CHECK(sphere_area(3) == doctest::Approx(4 * M_PI));
}

TEST_CASE("validation rejects orders outside (1, 2) and bad parameters") {
  CHECK_THROWS_AS(LevyMeasureSpec(IsotropicStable{1.0}), ContractViolation);
  CHECK_THROWS_AS(LevyMeasureSpec(IsotropicStable{2.0}), ContractViolation);
  CHECK_THROWS_AS(LevyMeasureSpec(TemperedCGMY{1.0, -1.0, 1.0, 1.5}), ContractViolation);
  CHECK_THROWS_AS(LevyMeasureSpec(TruncatedStable{1.5, 0.0}), ContractViolation);
  CHECK_THROWS_AS(LevyMeasureSpec(AnisotropicSum{}), ContractViolation);
  // |z|^{-3} is not integrable against |z|^2 near the origin
  GeneralDensity bad{[](double z) { return std::pow(std::abs(z), -3.0); }, 1.5, 1.0, 10.0};
  CHECK_THROWS_AS(LevyMeasureSpec(LevyVariant{bad}), ContractViolation);
  CHECK_THROWS_AS(require_solver_order(LevyMeasureSpec::engine(2.0)), ContractViolation);
  CHECK_THROWS_AS(LevyMeasureSpec(TemperedCGMY{}).require_dim(2), ContractViolation);
}

TEST_CASE("stable symbol: shell quadrature split reassembles the closed form") {
  const LevyMeasureSpec s(IsotropicStable{1.5});
  const double c = stable_constant(1, 1.5);
  for (double xi : {0.3, 1.0, 7.5, 40.0}) {
    const std::vector<double> x{xi};
    const Complex raw = raw_symbol_1d([&](double z) { return c * std::pow(std::abs(z), -2.5); }, xi);
    CHECK(raw.real() == doctest::Approx(-std::pow(xi, 1.5)).epsilon(1e-8));
    bq::tanh_sinh<double> ts;
    const double sing =
        ts.integrate([&](double z) { return z < 1e-100 ? 0.0 : cosm1(xi * z) * 2.0 * c * std::pow(z, -2.5); }, 0.0, 1.0);
    CHECK(s.singular_symbol(x).real() == doctest::Approx(sing).epsilon(1e-9));
    CHECK(std::abs(s.singular_symbol(x).imag()) < 1e-14);
  }
}

TEST_CASE("CGMY closed form agrees with direct quadrature of the symbol integral") {
  const TemperedCGMY p{0.7, 2.0, 5.0, 1.4};
  const LevyMeasureSpec s(p);
  auto k = [&](double z) { return p.C * std::pow(std::abs(z), -1.0 - p.Y) * std::exp(z > 0 ? -p.G * z : p.M * z); };
  for (double xi : {-3.0, 0.5, 2.0, 11.0}) {
    const std::vector<double> x{xi};
    const Complex want = raw_symbol_1d(k, xi);
    const Complex got = s.symbol(x);
    CHECK(std::abs(got - want) < 1e-8 * std::abs(want));
    // singular part against tanh-sinh on (0, 1)
    bq::tanh_sinh<double> ts;
    const double re = ts.integrate([&](double z) { return z < 1e-100 ? 0.0 : cosm1(xi * z) * (k(z) + k(-z)); }, 0.0, 1.0);
    const double im = ts.integrate([&](double z) { return z < 1e-100 ? 0.0 : sinm(xi * z) * (k(z) - k(-z)); }, 0.0, 1.0);
    CHECK(std::abs(s.singular_symbol(x) - Complex(re, im)) < 1e-9 * std::abs(Complex(re, im)));
  }
  CHECK(!s.symmetric());
  CHECK(LevyMeasureSpec(TemperedCGMY{1.0, 3.0, 3.0, 1.5}).symmetric());
  // reflection swaps the tempering rates
  const std::vector<double> x{2.0};
  CHECK(std::abs(s.reflected().symbol(x) - std::conj(s.symbol(x))) < 1e-12);
}

TEST_CASE("general density symbol and tail bookkeeping") {
  // symmetric density |z|^{-2.6} e^{-|z|}
  auto k = [](double z) { return std::pow(std::abs(z), -2.6) * std::exp(-std::abs(z)); };
  bq::exp_sinh<double> es;
  const double tail = es.integrate([&](double z) { return 2.0 * k(1.0 + z); }, 0.0, std::numeric_limits<double>::infinity());
  const LevyMeasureSpec s(GeneralDensity{k, 1.6, tail, 60.0, "tempered"});
  CHECK(s.symmetric());
  CHECK(s.tail_mass(1) == doctest::Approx(tail));
  for (double xi : {0.7, 4.0, 25.0}) {
    const std::vector<double> x{xi};
    const Complex want = raw_symbol_1d(k, xi);
    CHECK(std::abs(s.symbol(x) - want) < 1e-8 * std::abs(want));
  }
  bq::tanh_sinh<double> ts;
  const double m2 = ts.integrate([&](double z) { return z < 1e-100 ? 0.0 : 2.0 * z * z * k(z); }, 0.0, 1.0);
  CHECK(s.inner_second_moment(1) == doctest::Approx(m2).epsilon(1e-9));
  // tail_total smaller than the resolved mass is inconsistent
  CHECK_THROWS_AS(LevyMeasureSpec(GeneralDensity{k, 1.6, 0.5 * tail, 60.0}), ContractViolation);
}

TEST_CASE("truncated stable in two dimensions against polar quadrature") {
  const double sigma = 1.3, rho = 2.5;
  const LevyMeasureSpec s(TruncatedStable{sigma, rho});
  const double c = stable_constant(2, sigma);
  for (double k : {0.5, 3.0, 12.0}) {
    // theta-average by a fine trapezoid rule (spectrally accurate for periodic data)
    auto ang = [&](double r) {
      const int n = 256;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += cosm1(k * r * std::cos(2 * M_PI * j / n));
      return acc * 2 * M_PI / n;
    };
    bq::tanh_sinh<double> ts;
    const double inner =
        ts.integrate([&](double r) { return r < 1e-100 ? 0.0 : c * std::pow(r, -1.0 - sigma) * ang(r); }, 0.0, 1.0);
    const double outer = ts.integrate([&](double r) { return c * std::pow(r, -1.0 - sigma) * ang(r); }, 1.0, rho);
    const std::vector<double> xi{k / std::sqrt(2.0), k / std::sqrt(2.0)};
    CHECK(s.singular_symbol(xi).real() == doctest::Approx(inner).epsilon(1e-8));
    CHECK(s.symbol(xi).real() == doctest::Approx(inner + outer).epsilon(1e-8));
  }
  CHECK(s.tail_mass(2) == doctest::Approx(c * 2 * M_PI * (1.0 - std::pow(rho, -sigma)) / sigma));
}

TEST_CASE("tail integrals against exp-sinh") {
  const LevyMeasureSpec s(IsotropicStable{1.4});
  bq::exp_sinh<double> es;
  const double c = stable_constant(2, 1.4) * sphere_area(2);
  auto g = [](double r) { return std::log1p(r); };
  const double want = es.integrate([&](double r) { return g(1.0 + r) * c * std::pow(1.0 + r, -2.4); }, 0.0,
                                   std::numeric_limits<double>::infinity());
  CHECK(s.tail_integral(2, g) == doctest::Approx(want).epsilon(1e-10));
  CHECK(s.tail_integral(2, [](double) { return 1.0; }) == doctest::Approx(s.tail_mass(2)).epsilon(1e-12));
  // r^2 is not integrable against a stable tail
  CHECK_THROWS_AS(s.tail_integral(2, [](double r) { return r * r; }), ContractViolation);
}

TEST_CASE("tabulated symbol is Hermitian and the split is exact") {
  const Grid g = Grid::cube(1, 8.0, 64);
  const LevyMeasureSpec s(TemperedCGMY{1.0, 1.0, 4.0, 1.5});
  const Symbol sym = build_symbol(s, g);
  for (Index i = 0; i < g.size(); ++i) CHECK(std::abs(sym.values[i] - std::conj(sym.values[g.negated_slot(i)])) < 1e-15);
  CHECK(sym.values[0] == Complex(0.0));
  const SymbolSplit split = split_symbol(s, g);
  CHECK(((split.singular.values + split.bounded.values) - sym.values).abs().maxCoeff() < 1e-12);
  // truncated at radius < 1: the bounded part vanishes identically
  const SymbolSplit tr = split_symbol(LevyMeasureSpec(TruncatedStable{1.5, 0.8}), g);
  CHECK(tr.bounded.values.abs().maxCoeff() == 0.0);
  const Symbol adj = adjoint_symbol(sym);
  CHECK((adj.values - sym.values.conjugate()).abs().maxCoeff() == 0.0);
}

TEST_CASE("spectral operator matches the pointwise quadrature oracle") {
  SUBCASE("1D stable") {
    const LevyMeasureSpec s(IsotropicStable{1.5});
    const Grid g = Grid::cube(1, 128.0, 2048);
    const auto tf = gaussian_test_function({0.0}, 1.0);
    const Field f = Field::sample(g, [&](const std::vector<double>& x) { return tf.value(x); });
    const Field lf = apply_operator(build_symbol(s, g), f);
    for (int j : {1024, 1030, 1060}) {
      const std::vector<double> x = g.point(j);
      const double want = quadrature_operator_oracle(s, tf, x);
      CHECK(lf.values[j] == doctest::Approx(want).epsilon(1e-5));
    }
  }
  SUBCASE("2D anisotropic sum") {
    AnisotropicSum sum;
    sum.components.push_back({0, IsotropicStable{1.5}});
    sum.components.push_back({1, TruncatedStable{1.7, 3.0}});
    const LevyMeasureSpec s(sum);
    const Grid g = Grid::cube(2, 64.0, 512);
    const auto tf = gaussian_test_function({0.0, 0.0}, 1.0);
    const Field f = Field::sample(g, [&](const std::vector<double>& x) { return tf.value(x); });
    const Field lf = apply_operator(build_symbol(s, g), f);
    for (Index j : {g.flatten({256, 256}), g.flatten({260, 250})}) {
      const double want = quadrature_operator_oracle(s, tf, g.point(j));
      CHECK(lf.values[j] == doctest::Approx(want).epsilon(1e-5));
    }
  }
}

TEST_CASE("cone condition recovers the stable order") {
  const LevyMeasureSpec s(IsotropicStable{1.6});
  const std::vector<double> radii{0.05, 0.1, 0.2, 0.4};
  const std::vector<double> a1{1.0};
  const auto r1 = check_cone_condition(s, a1, 0.5, radii);
  CHECK(r1.satisfied);
  CHECK(r1.fitted_beta == doctest::Approx(1.6).epsilon(1e-9));
  const std::vector<double> a2{1.0, 1.0};
  const auto r2 = check_cone_condition(s, a2, 0.3, radii);
  CHECK(r2.fitted_beta == doctest::Approx(1.6).epsilon(1e-9));
  // axis-only measure: a diagonal direction sees no mass in a narrow cone
  AnisotropicSum sum;
  sum.components.push_back({0, IsotropicStable{1.5}});
  sum.components.push_back({1, IsotropicStable{1.5}});
  CHECK(!check_cone_condition(LevyMeasureSpec(sum), a2, 0.1, radii).satisfied);
}

TEST_CASE("L^p interpolation bound holds for a Gaussian bump") {
  const LevyMeasureSpec s(IsotropicStable{1.5});
  const Grid g = Grid::cube(1, 32.0, 1024);
  const Field f = Field::sample(g, [](const std::vector<double>& x) { return std::exp(-x[0] * x[0]); });
  const Symbol sym = build_symbol(s, g);
  for (double r : {0.1, 0.5, 1.0}) {
    const auto rep = lp_interpolation_check(sym, f, 2.0, r);
    CHECK(rep.lhs > 0.0);
    CHECK(rep.lhs <= 10.0 * rep.rhs_sum());
  }
}
