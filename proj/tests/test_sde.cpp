#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmfg/fp.hpp"
#include "lmfg/sde.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>

using namespace lmfg;

namespace {

double quantile(std::vector<double> v, double q) {
  const std::size_t k = static_cast<std::size_t>(q * (v.size() - 1));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

Complex empirical_cf(const std::vector<double>& x, double xi) {
  Complex acc = 0.0;
  for (double v : x) acc += std::exp(Complex(0.0, xi * v));
  return acc / static_cast<double>(x.size());
}

ProbabilityField bump(const Grid& g, double width, double centre = 0.0) {
  return ProbabilityField::normalized(Field::sample(g, [&](const std::vector<double>& x) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - (a == 0 ? centre : 0.0)) * (x[a] - (a == 0 ? centre : 0.0));
    return std::exp(-r2 / (2 * width * width));
  }));
}

}  // namespace

TEST_CASE("stable increments: characteristic function, symmetry, self-similarity") {
  const Index n = 100000;
  for (double sigma : {1.3, 1.5, 1.8}) {
    const double dt = 0.1;
    const auto x = sample_stable_increment(sigma, dt, n, 42);
    for (double xi : {0.5, 1.0, 2.0, 4.0}) {
      const Complex cf = empirical_cf(x, xi);
      CHECK(std::abs(cf - std::exp(-dt * std::pow(xi, sigma))) <= 4.0 / std::sqrt(double(n)));
    }
    const double iqr = quantile(x, 0.75) - quantile(x, 0.25);
    CHECK(std::abs(quantile(x, 0.5)) <= 4.0 * iqr / std::sqrt(double(n)));
    const auto y = sample_stable_increment(sigma, 2 * dt, n, 43);
    for (double q : {0.7, 0.8, 0.9}) CHECK(quantile(y, q) / quantile(x, q) == doctest::Approx(std::pow(2.0, 1 / sigma)).epsilon(0.03));
  }
  CHECK_THROWS_AS(sample_stable_increment(1.0, 0.1, 10, 1), ContractViolation);
  CHECK_THROWS_AS(sample_stable_increment(1.5, 0.0, 10, 1), ContractViolation);
}

TEST_CASE("sigma = 2 engine check: Gaussian of variance 2 dt (Kolmogorov-Smirnov)") {
  const Index n = 100000;
  const double dt = 0.3;
  auto x = sample_stable_increment(2.0, dt, n, 9);
  std::sort(x.begin(), x.end());
  const boost::math::normal_distribution<double> ref(0.0, std::sqrt(2 * dt));
  double D = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double F = boost::math::cdf(ref, x[i]);
    D = std::max({D, std::abs(F - double(i) / n), std::abs(F - double(i + 1) / n)});
  }
  MESSAGE("KS statistic " << D << " vs critical " << 1.628 / std::sqrt(double(n)));
  CHECK(D <= 1.628 / std::sqrt(double(n)));
}

TEST_CASE("2D isotropic and anisotropic increments") {
  const Index n = 100000;
  std::mt19937_64 rng(5);
  const double dt = 0.2, sigma = 1.5;
  const IncrementSampler iso(LevyMeasureSpec(IsotropicStable{sigma}), 2, dt);
  const IncrementSampler sum(LevyMeasureSpec(AnisotropicSum{{{0, IsotropicStable{1.5}}, {1, IsotropicStable{1.8}}}}), 2, dt);
  std::vector<std::array<double, 2>> a(n), b(n);
  for (Index i = 0; i < n; ++i) {
    iso.draw(rng, a[i].data());
    sum.draw(rng, b[i].data());
  }
  for (auto xi : {std::array<double, 2>{1.0, 1.0}, std::array<double, 2>{2.0, -0.5}}) {
    Complex ca = 0.0, cb = 0.0;
    for (Index i = 0; i < n; ++i) {
      ca += std::exp(Complex(0.0, xi[0] * a[i][0] + xi[1] * a[i][1]));
      cb += std::exp(Complex(0.0, xi[0] * b[i][0] + xi[1] * b[i][1]));
    }
    ca /= double(n);
    cb /= double(n);
    const double r = std::hypot(xi[0], xi[1]);
    CHECK(std::abs(ca - std::exp(-dt * std::pow(r, sigma))) <= 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(cb - std::exp(-dt * (std::pow(std::abs(xi[0]), 1.5) + std::pow(std::abs(xi[1]), 1.8)))) <=
          4.0 / std::sqrt(double(n)));
  }
}

TEST_CASE("tempered and truncated increments follow the symbol; thinning rate matches") {
  const Index n = 100000;
  const double dt = 0.1;
  for (const LevyMeasureSpec& spec : {LevyMeasureSpec(TemperedCGMY{1.0, 3.0, 5.0, 1.5}),
                                      LevyMeasureSpec(TemperedCGMY{0.5, 1.0, 8.0, 1.3}),
                                      LevyMeasureSpec(TruncatedStable{1.7, 0.8})}) {
    const IncrementSampler s(spec, 1, dt);
    std::mt19937_64 rng(17);
    std::vector<double> x(n);
    IncrementSampler::Counters cnt;
    for (auto& v : x) s.draw(rng, &v, cnt);
    for (double xi : {0.5, 1.0, 2.0}) {
      const double f[1] = {xi};
      const Complex expect = std::exp(dt * spec.symbol(f));
      CHECK(std::abs(empirical_cf(x, xi) - expect) <= 5.0 / std::sqrt(double(n)));
    }
    const double acc = double(cnt.accepted) / cnt.candidates;
    const double p = s.analytic_acceptance().front();
    MESSAGE(spec.name() << ": acceptance " << acc << " vs analytic " << p);
    CHECK(std::abs(acc - p) <= 4.0 * std::sqrt(p * (1 - p) / cnt.candidates));
  }
  GeneralDensity g;
  g.density = [](double z) { return std::exp(-std::abs(z)) / std::pow(std::abs(z), 2.5); };
  g.tail_total = 0.5;
  const LevyMeasureSpec general(g);
  CHECK_FALSE(simulable(general, 1).ok);
  CHECK_THROWS_AS(IncrementSampler(general, 1, 0.1), ContractViolation);
  CHECK_FALSE(simulable(LevyMeasureSpec(TemperedCGMY{}), 2).ok);
}

TEST_CASE("ensembles: determinism, threads, empty, histogram") {
  const Grid g = Grid::cube(1, 8.0, 256);
  const LevyMeasureSpec spec(IsotropicStable{1.5});
  SDEConfig cfg;
  cfg.n_paths = 10000;
  cfg.n_t = 10;
  cfg.seed = 77;
  cfg.threads = 1;
  const PathEnsemble a = simulate_controlled_sde(spec, g, {}, bump(g, 0.5), cfg);
  cfg.threads = 3;
  const PathEnsemble b = simulate_controlled_sde(spec, g, {}, bump(g, 0.5), cfg);
  CHECK((a.positions.back().array() == b.positions.back().array()).all());
  CHECK(a.positions.back().allFinite());
  cfg.seed = 78;
  const PathEnsemble c = simulate_controlled_sde(spec, g, {}, bump(g, 0.5), cfg);
  CHECK_FALSE((a.positions.back().array() == c.positions.back().array()).all());

  cfg.n_paths = 0;
  const PathEnsemble e = simulate_controlled_sde(spec, g, {}, bump(g, 0.5), cfg);
  CHECK(e.n_paths == 0);
  CHECK(e.positions.back().rows() == 0);

  PathEnsemble spike = a;
  for (auto& m : spike.positions) m.setZero();
  const ProbabilityField h = empirical_law(spike, 3, g);
  CHECK(h.values()[g.points(0) / 2] * g.cell_volume() == doctest::Approx(1.0));
  CHECK(std::abs(h.mass() - 1.0) <= 1e-14);

  PathEnsemble flat = a;
  const Index n = 200000;
  flat.n_paths = n;
  flat.positions.assign(1, Eigen::MatrixXd(n, 1));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (Index i = 0; i < n; ++i) flat.positions[0](i, 0) = u(rng);
  const ProbabilityField f = empirical_law(flat, 0, g);
  const double level = 1.0 / g.volume();
  CHECK(((f.values() - level).abs() / level).maxCoeff() <= 4.0 * std::sqrt(double(g.size()) / n));
}

TEST_CASE("drift: constant drift moves the median; wrapping is counted") {
  const Grid g = Grid::cube(1, 8.0, 256);
  const LevyMeasureSpec spec(IsotropicStable{1.5});
  SDEConfig cfg;
  cfg.n_paths = 50000;
  cfg.n_t = 20;
  cfg.wrap = false;
  const double c = 0.8;
  const std::vector<VectorField> drift(21, VectorField{RealArray::Constant(g.size(), c)});
  const PathEnsemble ens = simulate_controlled_sde(spec, g, drift, bump(g, 0.3), cfg);
  std::vector<double> disp(cfg.n_paths);
  for (Index p = 0; p < cfg.n_paths; ++p) disp[p] = ens.positions.back()(p, 0) - ens.positions.front()(p, 0);
  const double iqr = quantile(disp, 0.75) - quantile(disp, 0.25);
  CHECK(std::abs(quantile(disp, 0.5) - c * cfg.horizon) <= 4.0 * iqr / std::sqrt(double(cfg.n_paths)));
  CHECK(ens.wrap_events == 0);

  cfg.wrap = true;
  const Grid tiny = Grid::cube(1, 1.0, 64);
  const PathEnsemble w = simulate_controlled_sde(spec, tiny, {}, bump(tiny, 0.2), cfg);
  CHECK(w.wrap_events > 0);
  CHECK(w.domain_warning);
  CHECK((w.positions.back().array() >= -1.0).all());
  CHECK((w.positions.back().array() < 1.0).all());
}

TEST_CASE("Monte Carlo law matches the FP solution") {
  const Grid g = Grid::cube(1, 16.0, 1024);
  const double T = 1.0;
  const int n_t = 50;
  for (double c : {0.0, 0.7}) {
    const LevyMeasureSpec spec(IsotropicStable{1.5});
    const ProbabilityField m0 = bump(g, 0.3);
    FPInput in{{}, m0, adjoint_symbol(build_symbol(spec, g)), T, n_t, {}};
    if (c != 0.0) in.drift.assign(n_t + 1, VectorField{RealArray::Constant(g.size(), c)});
    const FPSolution sol = solve_fp_forward(in);
    SDEConfig cfg;
    cfg.n_paths = 100000;
    cfg.n_t = n_t;
    cfg.horizon = T;
    const PathEnsemble ens = simulate_controlled_sde(spec, g, in.drift, m0, cfg);
    const double bound = 5.0 * (1.0 / std::sqrt(double(cfg.n_paths)) + T / n_t);
    for (int k : {n_t / 2, n_t}) {
      const double d = d0_distance(empirical_law(ens, k, g).field(), sol.m[k]).value;
      MESSAGE("c = " << c << ", node " << k << ": d0 = " << d << " (bound " << bound << ")");
      CHECK(d <= bound);
    }
  }
}
