#include "lmfg/acceptance.hpp"

#include "lmfg/fit.hpp"
#include "lmfg/fp.hpp"
#include "lmfg/metrics.hpp"
#include "lmfg/mfg.hpp"
#include "lmfg/sde.hpp"
#include "lmfg/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cstdio>
#include <random>
#include <sstream>

namespace lmfg {

namespace {

/// Collects named measurements and the overall verdict of one criterion.
struct Recorder {
  CriterionResult r;
  Recorder(std::string property, std::string target) {
    r.property = std::move(property);
    r.target = std::move(target);
    r.passed = true;
  }
  void measure(const std::string& key, double value) { r.measured.emplace_back(key, value); }
  /// Records `value` and folds `ok` into the verdict.
  void check(const std::string& key, double value, bool ok) {
    measure(key, value);
    if (!ok || !std::isfinite(value)) r.passed = false;
  }
};

ProbabilityField gaussian_density(const Grid& g, double width, double centre = 0.0) {
  return ProbabilityField::normalized(Field::sample(g, [&](const std::vector<double>& x) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const double c = a == 0 ? centre : 0.0;
      r2 += (x[a] - c) * (x[a] - c);
    }
    return std::exp(-r2 / (2 * width * width));
  }));
}

/// Smooth periodic drift, time dependent, with random coefficients.
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
      for (int e = 0; e < g.dim(); ++e) comp += amp * coef[4 * a + 1 + (e % 3)] * (w * x[e] + t).sin() * std::cos(t);
      b.push_back(comp);
    }
    out.push_back(b);
  }
  return out;
}

std::vector<VectorField> constant_drift(const Grid& g, int n_t, double c) {
  VectorField b(g.dim(), RealArray::Zero(g.size()));
  b[0].setConstant(c);
  return std::vector<VectorField>(n_t + 1, b);
}

double l2_norm(const Grid& g, const RealArray& v) { return std::sqrt(v.square().sum() * g.cell_volume()); }

/// Sum of three random Gaussian bumps, smooth and well inside the box.
Field random_smooth(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.5, 2.0);
  struct Bump {
    double a, width;
    std::vector<double> c;
  };
  std::vector<Bump> bumps;
  for (int j = 0; j < 3; ++j) {
    Bump b{u(rng), w(rng), {}};
    for (int a = 0; a < g.dim(); ++a) b.c.push_back(0.25 * g.half_extent(a) * u(rng));
    bumps.push_back(b);
  }
  return Field::sample(g, [&](const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& b : bumps) {
      double r2 = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - b.c[a]) * (x[a] - b.c[a]);
      s += b.a * std::exp(-r2 / (2 * b.width * b.width));
    }
    return s;
  });
}

LevyMeasureSpec sum_spec(Levy1D first, Levy1D second) {
  AnisotropicSum s;
  s.components.push_back({0, std::move(first)});
  s.components.push_back({1, std::move(second)});
  return LevyMeasureSpec(s);
}

std::string tag(const char* fmt, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

std::string tag(const char* fmt, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

// ---------------------------------------------------------------------------

/// Spectral operator against direct quadrature of the defining integral.
CriterionResult operator_exactness(const AcceptanceOptions&) {
  constexpr double kTol = 1e-5;
  /// Errors are relative to the oracle value, floored at 1% of sup |L f| so
  /// that sign changes of L f do not blow up the ratio.
  constexpr double kFloor = 1e-2;
  Recorder rec("spectral L f equals the quadrature of the jump integral on smooth f",
               "max relative error <= 1e-5 at 5 points per spec");
  struct Case {
    std::string name;
    LevyMeasureSpec spec;
    Grid grid;
    std::vector<std::vector<int>> offsets;
  };
  std::vector<Case> cases{
      /// Periodic images shift L f by a constant ~ L^{-1-sigma}; the boxes along
      /// the untempered stable axes are wide enough to push it below 1e-7.
      {"stable1.5", LevyMeasureSpec(IsotropicStable{1.5}), Grid::cube(1, 512.0, 8192), {{0}, {4}, {10}, {24}, {40}}},
      {"cgmy", LevyMeasureSpec(TemperedCGMY{1.0, 3.0, 5.0, 1.5}), Grid::cube(1, 32.0, 512), {{0}, {4}, {10}, {24}, {40}}},
      {"sum2d", sum_spec(IsotropicStable{1.5}, TruncatedStable{1.7, 3.0}), Grid({512.0, 32.0}, {4096, 256}),
       {{0, 0}, {4, -6}, {8, 0}, {0, 6}, {14, 14}}},
  };
  for (const auto& c : cases) {
    const int d = c.grid.dim();
    const TestFunction tf = gaussian_test_function(std::vector<double>(d, 0.0), 1.0);
    const Field f = Field::sample(c.grid, [&](const std::vector<double>& x) { return tf.value(x); });
    const Field lf = apply_operator(build_symbol(c.spec, c.grid), f);
    const double scale = lf.values.abs().maxCoeff();
    double worst = 0.0;
    for (const auto& off : c.offsets) {
      std::vector<int> idx(d);
      for (int a = 0; a < d; ++a) idx[a] = c.grid.points(a) / 2 + off[a];
      const Index cell = c.grid.flatten(idx);
      const std::vector<double> x = c.grid.point(cell);
      const double want = quadrature_operator_oracle(c.spec, tf, x);
      worst = std::max(worst, std::abs(lf.values[cell] - want) / std::max(std::abs(want), kFloor * scale));
    }
    rec.check("max_rel_err." + c.name, worst, worst <= kTol);
  }
  return rec.r;
}

/// Adjoint duality on random smooth pairs.
CriterionResult adjoint_duality(const AcceptanceOptions& opt) {
  constexpr double kTol = 1e-10;
  Recorder rec("<L f, g> = <f, L* g> with L* the conjugate-symbol operator",
               "100 random pairs, relative defect <= 1e-10");
  struct Case {
    std::string name;
    LevyMeasureSpec spec;
    Grid grid;
  };
  std::vector<Case> cases{
      {"stable1.5", LevyMeasureSpec(IsotropicStable{1.5}), Grid::cube(1, 32.0, 256)},
      {"cgmy_asym", LevyMeasureSpec(TemperedCGMY{1.0, 1.0, 6.0, 1.5}), Grid::cube(1, 32.0, 256)},
      {"cgmy", LevyMeasureSpec(TemperedCGMY{1.0, 3.0, 5.0, 1.3}), Grid::cube(1, 32.0, 256)},
      {"sum2d", sum_spec(IsotropicStable{1.5}, TemperedCGMY{1.0, 1.0, 4.0, 1.7}), Grid::cube(2, 16.0, 64)},
  };
  std::mt19937_64 rng(opt.seed);
  int pairs = 0;
  for (const auto& c : cases) {
    const Symbol sym = build_symbol(c.spec, c.grid), adj = adjoint_symbol(sym);
    double worst = 0.0;
    for (int k = 0; k < 25; ++k, ++pairs) {
      const Field f = random_smooth(c.grid, rng), g = random_smooth(c.grid, rng);
      const RealArray lf = apply_operator(sym, f.values), lsg = apply_operator(adj, g.values);
      const double h = c.grid.cell_volume();
      const double lhs = (lf * g.values).sum() * h, rhs = (f.values * lsg).sum() * h;
      worst = std::max(worst, std::abs(lhs - rhs) / (l2_norm(c.grid, lf) * l2_norm(c.grid, g.values)));
    }
    rec.check("max_rel_defect." + c.name, worst, worst <= kTol);
  }
  rec.measure("pairs", pairs);
  return rec.r;
}

/// Heat-kernel closed forms and mass conservation.
CriterionResult heat_kernel_closed_forms(const AcceptanceOptions&) {
  constexpr double kCauchyTol = 1e-4, kGaussTol = 1e-6, kMassTol = 1e-8;
  Recorder rec("engine kernels match Cauchy and Gaussian closed forms; every kernel has unit mass",
               "Cauchy peak within 1e-4, Gaussian peak within 1e-6, mass within 1e-8");
  {
    const Grid g = Grid::cube(1, 1000.0, 32768);
    const auto snap = kernel_snapshot(build_propagator(build_symbol(LevyMeasureSpec::engine(1.0), g), 1.0), 1e-3);
    const double peak = snap.kernel.values[g.points(0) / 2];
    rec.check("cauchy_peak_err", std::abs(peak - 1.0 / M_PI), std::abs(peak - 1.0 / M_PI) <= kCauchyTol);
  }
  {
    const Grid g = Grid::cube(1, 64.0, 2048);
    const auto snap = kernel_snapshot(build_propagator(build_symbol(LevyMeasureSpec::engine(2.0), g), 1.0));
    const double want = 1.0 / std::sqrt(4 * M_PI);
    const double peak = snap.kernel.values[g.points(0) / 2];
    rec.check("gauss_peak_err", std::abs(peak - want), std::abs(peak - want) <= kGaussTol);
  }
  struct Case {
    std::string name;
    LevyMeasureSpec spec;
    Grid grid;
  };
  std::vector<Case> cases{
      {"stable1.3", LevyMeasureSpec(IsotropicStable{1.3}), Grid::cube(1, 256.0, 4096)},
      {"stable1.5", LevyMeasureSpec(IsotropicStable{1.5}), Grid::cube(1, 256.0, 4096)},
      {"stable1.8", LevyMeasureSpec(IsotropicStable{1.8}), Grid::cube(1, 256.0, 4096)},
      {"stable1.5_2d", LevyMeasureSpec(IsotropicStable{1.5}), Grid::cube(2, 32.0, 256)},
      {"cgmy", LevyMeasureSpec(TemperedCGMY{1.0, 1.0, 6.0, 1.5}), Grid::cube(1, 64.0, 1024)},
      {"truncated", LevyMeasureSpec(TruncatedStable{1.7, 2.0}), Grid::cube(1, 64.0, 1024)},
      {"sum2d", sum_spec(IsotropicStable{1.3}, TemperedCGMY{1.0, 2.0, 3.0, 1.7}), Grid({20.0, 15.0}, {128, 64})},
  };
  for (const auto& c : cases) {
    const Propagator prop = build_propagator(build_symbol(c.spec, c.grid), 1.0);
    const double mass = kernel_values(prop, {}).sum() * c.grid.cell_volume();
    rec.check("mass_defect." + c.name, std::abs(mass - 1.0), std::abs(mass - 1.0) <= kMassTol);
  }
  return rec.r;
}

/// Decay exponents of derivative norms of the heat kernel.
CriterionResult decay_exponents(const AcceptanceOptions&) {
  constexpr double kTol = 0.05;
  Recorder rec("log-log slopes of ||D^beta K(t)||_p and || |D|^s K(t) ||_1 match -(|beta| + (1-1/p) d)/sigma",
               "|fitted - theory| <= 0.05 for every probe");
  const std::vector<double> ts{0.5, 1.0, 2.0, 4.0};
  for (double sigma : {1.3, 1.5, 1.8}) {
    const LevyMeasureSpec spec(IsotropicStable{sigma});
    for (int d : {1, 2}) {
      const Grid g = d == 1 ? Grid::cube(1, 256.0, 4096) : Grid::cube(2, 128.0, 1024);
      const std::vector<int> zero(d, 0);
      std::vector<int> first(d, 0);
      first[0] = 1;
      struct Probe {
        double p;
        std::vector<int> beta;
      };
      double worst = 0.0;
      for (const Probe& pr : {Probe{1.0, zero}, Probe{1.0, first}, Probe{2.0, zero}, Probe{kInfNorm, zero}}) {
        const ProbeResult res = decay_rate_probe(spec, g, pr.p, pr.beta, ts);
        worst = std::max(worst, std::abs(res.fitted_slope - res.theory_slope));
      }
      for (bool grad : {false, true}) {
        const ProbeResult res = fractional_decay_probe(spec, g, 0.5, grad, ts);
        worst = std::max(worst, std::abs(res.fitted_slope - res.theory_slope));
      }
      rec.check(tag("max_slope_err.sigma%.1f.d%.0f", sigma, d), worst, worst <= kTol);
    }
  }
  return rec.r;
}

/// Anisotropic sums: factorized kernel and decay governed by the smallest order.
CriterionResult anisotropic_sum(const AcceptanceOptions&) {
  constexpr double kFactorTol = 1e-8, kSlopeTol = 0.05;
  Recorder rec("kernel of an axis sum is the product of 1D kernels; L1 gradient decay rate is -1/sigma_min",
               "factorization error <= 1e-8; |slope + 1/sigma_min| <= 0.05");
  {
    const Grid g2({20.0, 15.0}, {128, 64});
    const Grid gx = Grid::cube(1, 20.0, 128), gy = Grid::cube(1, 15.0, 64);
    const double t = 0.8;
    const RealArray k2 =
        kernel_values(build_propagator(build_symbol(sum_spec(IsotropicStable{1.3}, TemperedCGMY{1.0, 2.0, 3.0, 1.7}), g2), t), {});
    const RealArray kx = kernel_values(build_propagator(build_symbol(LevyMeasureSpec(IsotropicStable{1.3}), gx), t), {});
    const RealArray ky =
        kernel_values(build_propagator(build_symbol(LevyMeasureSpec(TemperedCGMY{1.0, 2.0, 3.0, 1.7}), gy), t), {});
    double err = 0.0;
    for (int i = 0; i < 128; ++i)
      for (int j = 0; j < 64; ++j) err = std::max(err, std::abs(k2[g2.flatten({i, j})] - kx[i] * ky[j]));
    rec.check("factorization_err", err, err <= kFactorTol);
  }
  {
    const LevyMeasureSpec spec = sum_spec(IsotropicStable{1.5}, IsotropicStable{1.8});
    const ProbeResult res = decay_rate_probe(spec, Grid::cube(2, 256.0, 1024), 1.0, {1, 0}, {0.5, 1.0, 2.0, 4.0});
    rec.measure("theory_slope", res.theory_slope);
    rec.check("fitted_slope", res.fitted_slope, std::abs(res.fitted_slope + 1.0 / 1.5) <= kSlopeTol);
  }
  return rec.r;
}

/// Manufactured backward problem with exact solution e^{-t} cos x.
HJBInput manufactured(const Grid& g, int n_t, double sigma, double T, Hamiltonian h) {
  HJBInput in{std::move(h), {}, {}, build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g), T, n_t, {}};
  for (int k = 0; k <= n_t; ++k) {
    const double t = k * T / n_t;
    in.source.push_back(Field::sample(g, [t](const std::vector<double>& x) {
      const double s = std::sin(x[0]);
      return 2.0 * std::exp(-t) * std::cos(x[0]) + 0.5 * std::exp(-2.0 * t) * s * s;
    }));
  }
  in.terminal = Field::sample(g, [T](const std::vector<double>& x) { return std::exp(-T) * std::cos(x[0]); });
  return in;
}

CriterionResult hjb_accuracy_bounds(const AcceptanceOptions&) {
  constexpr double kOrder = 0.95;
  Recorder rec("HJB solver converges at first order on a manufactured solution; sup and Lipschitz bounds hold",
               "observed order >= 0.95 per refinement; all bounds satisfied over T x H x sigma");
  const Grid g = Grid::cube(1, M_PI, 32);
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    const HJBSolution sol = solve_hjb_backward(manufactured(g, n, 1.5, 1.0, quadratic_hamiltonian()));
    double e = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double t = k * sol.time_step();
      const Field want = Field::sample(g, [t](const std::vector<double>& x) { return std::exp(-t) * std::cos(x[0]); });
      e = std::max(e, (sol.u[k].values - want.values).abs().maxCoeff());
    }
    errs.push_back(e);
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double order = std::log2(errs[i - 1] / errs[i]);
    rec.check(tag("order.%.0f", double(i)), order, order >= kOrder);
  }
  int violations = 0, runs = 0;
  double worst_sup_ratio = 0.0, worst_lip_ratio = 0.0;
  for (double T : {0.5, 1.0, 2.0})
    for (double sigma : {1.3, 1.5, 1.8})
      for (const char* h : {"quadratic", "eikonal", "discounted"}) {
        const HJBInput in = manufactured(g, 64, sigma, T, hamiltonian_preset(h, 0.5));
        const HJBSolution sol = solve_hjb_backward(in);
        const BoundReport s = sup_bound_check(sol, in), l = lipschitz_diagnostic(sol, in);
        ++runs;
        violations += !s.satisfied + !l.satisfied;
        worst_sup_ratio = std::max(worst_sup_ratio, s.measured / s.bound);
        worst_lip_ratio = std::max(worst_lip_ratio, l.measured / l.bound);
      }
  rec.measure("bound_runs", runs);
  rec.measure("worst_sup_ratio", worst_sup_ratio);
  rec.measure("worst_lipschitz_ratio", worst_lip_ratio);
  rec.check("bound_violations", violations, violations == 0);
  return rec.r;
}

/// Comparison principle on ordered terminal data.
CriterionResult hjb_comparison(const AcceptanceOptions& opt) {
  constexpr double kTol = 1e-8;
  Recorder rec("ordered terminal data give ordered HJB solutions", "20 pairs, min (u2 - u1) >= -1e-8");
  const Grid g = Grid::cube(1, 4.0, 128);
  std::mt19937_64 rng(opt.seed + 100);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    const double sigma = 1.3 + 0.5 * u(rng);
    const Hamiltonian h = k % 2 ? eikonal_hamiltonian() : quadratic_hamiltonian();
    const Symbol sym = build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g);
    const Field G1 = random_smooth(g, rng);
    Field bump = random_smooth(g, rng);
    bump.values = bump.values.abs() + 0.05 * u(rng);
    const Field G2(g, G1.values + bump.values);
    const Field f = random_smooth(g, rng);
    HJBInput lo{h, std::vector<Field>(17, f), G1, sym, 1.0, 16, {}};
    HJBInput hi = lo;
    hi.terminal = G2;
    const auto rep = comparison_diagnostic(solve_hjb_backward(lo), solve_hjb_backward(hi), kTol);
    worst = std::min(worst, rep.min_difference);
  }
  rec.check("min_difference", worst, worst >= -kTol);
  return rec.r;
}

CriterionResult fp_conservation(const AcceptanceOptions&) {
  constexpr double kMass = 1e-8, kPos = 1e-6, kOrder = 0.9;
  Recorder rec("FP scheme conserves mass, stays nonnegative, and satisfies the very weak identity at first order",
               "mass defect <= 1e-8, min m >= -1e-6 max m over 100 steps; residual order >= 0.9");
  double mass = 0.0, pos = std::numeric_limits<double>::infinity();
  for (double sigma : {1.3, 1.5, 1.8}) {
    const Grid g = Grid::cube(1, 8.0, 256);
    const Symbol adj = adjoint_symbol(build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g));
    for (int variant = 0; variant < 3; ++variant) {
      FPInput in{{}, gaussian_density(g, 0.5), adj, 1.0, 100, {}};
      if (variant == 1) in.drift = constant_drift(g, 100, 0.7);
      if (variant == 2) in.drift = smooth_drift(g, 100, 1.0, 0.8, 7);
      const auto rep = positivity_comparison_check(solve_fp_forward(in));
      mass = std::max(mass, rep.mass_defect);
      pos = std::min(pos, rep.min_relative);
    }
  }
  {
    const Grid g = Grid::cube(2, 6.0, 64);
    FPInput in{{}, gaussian_density(g, 0.6, 1.0), adjoint_symbol(build_symbol(LevyMeasureSpec(IsotropicStable{1.5}), g)),
               1.0, 100, {}};
    const auto x = g.coordinates();
    in.drift.assign(101, VectorField{-0.5 * x[1], 0.5 * x[0]});
    const auto rep = positivity_comparison_check(solve_fp_forward(in));
    mass = std::max(mass, rep.mass_defect);
    pos = std::min(pos, rep.min_relative);
  }
  rec.check("max_mass_defect", mass, mass <= kMass);
  rec.check("min_relative_value", pos, pos >= -kPos);

  const Grid g = Grid::cube(1, M_PI, 64);
  const Symbol adj = adjoint_symbol(build_symbol(LevyMeasureSpec(IsotropicStable{1.5}), g));
  std::vector<double> dts, res;
  for (int n_t : {8, 16, 32, 64}) {
    FPInput in{smooth_drift(g, n_t, 1.0, 0.8, 5), gaussian_density(g, 0.5), adj, 1.0, n_t, {}};
    const FPSolution sol = solve_fp_forward(in);
    double worst = 0.0;
    for (double phase : {0.3, 1.1, 2.0, 2.9})
      worst = std::max(worst, very_weak_residual(sol, in, [phase](double t, const std::vector<double>& x) {
                         return std::sin(x[0] + phase) * std::exp(-t) + 0.5 * std::cos(2 * x[0] - phase) * t;
                       }));
    dts.push_back(1.0 / n_t);
    res.push_back(worst);
  }
  const double order = fit_loglog(dts, res).slope;
  rec.check("very_weak_order", order, order >= kOrder);
  return rec.r;
}

CriterionResult fp_regularity(const AcceptanceOptions&) {
  constexpr double kExpTol = 0.1;
  Recorder rec("d0 time modulus has exponent 1/sigma; log-tail Lyapunov inequality; L-infinity bound",
               "|exponent - 1/sigma| <= 0.1; Lyapunov satisfied; L-inf bound holds with the fitted constant");
  for (double sigma : {1.3, 1.5, 1.8}) {
    const Grid g = Grid::cube(1, 5.0, 4096);
    FPInput in{{}, gaussian_density(g, 0.01), adjoint_symbol(build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g)), 0.1,
               10, {}};
    const auto rep = d0_equicontinuity_probe(solve_fp_forward(in), in, 0.01, 0.1);
    rec.check(tag("exponent.sigma%.1f", sigma), rep.exponent, std::abs(rep.exponent - 1.0 / sigma) <= kExpTol);
  }
  {
    const Grid g = Grid::cube(1, 256.0, 8192);
    int failed = 0;
    bool healthy = true;
    for (double sigma : {1.3, 1.5, 1.8})
      for (double c : {0.0, 1.0}) {
        FPInput in{{}, gaussian_density(g, 0.5), adjoint_symbol(build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g)),
                   2.0, 40, {}};
        if (c > 0) in.drift = constant_drift(g, 40, c);
        const auto rep = lyapunov_tail_check(solve_fp_forward(in), in, log_tail_function());
        failed += !rep.satisfied;
        healthy = healthy && rep.torus_healthy;
      }
    rec.check("lyapunov_failures", failed, failed == 0);
    rec.measure("torus_healthy", healthy);
  }
  {
    // p = 1.2 is admissible for every sigma in {1.3, 1.5, 1.8} in one dimension
    const Grid g = Grid::cube(1, 8.0, 256);
    const RealArray x = g.coordinates()[0];
    double fitted = 0.0;
    int failed = 0;
    for (double sigma : {1.3, 1.5, 1.8})
      for (int variant = 0; variant < 4; ++variant) {
        const Symbol adj = adjoint_symbol(build_symbol(LevyMeasureSpec(IsotropicStable{sigma}), g));
        // sup m0 < 1 while the inward drift pushes sup m above 1, so the drift term binds
        const auto make = [&](int n_t) {
          FPInput in{{}, gaussian_density(g, 0.45), adj, 1.0, n_t, {}};
          if (variant == 1) in.drift = constant_drift(g, n_t, 0.7);
          if (variant == 2) in.drift = smooth_drift(g, n_t, 1.0, 2.0, 1);
          if (variant == 3) in.drift.assign(n_t + 1, VectorField{RealArray(-6.0 * x * (-x.square() / 8.0).exp())});
          return in;
        };
        int n_t = 20;
        while (drift_stability_number(make(n_t)) > 0.5) n_t *= 2;
        const FPInput in = make(n_t);
        const LinfReport rep = linf_bound_check(solve_fp_forward(in), in, 1.2);
        fitted = std::max(fitted, rep.required_constant);
        if (rep.measured > rep.bound(rep.required_constant) * (1 + 1e-12)) ++failed;
        if (variant == 0 && rep.measured > rep.m0_sup * (1 + 1e-12)) ++failed;
      }
    rec.measure("linf_fitted_constant", fitted);
    rec.check("linf_failures", failed, failed == 0 && std::isfinite(fitted));
  }
  return rec.r;
}

CriterionResult sde_agreement(const AcceptanceOptions& opt) {
  Recorder rec("Monte Carlo law of the controlled SDE matches the FP solution in d0",
               "d0 <= 5 (n^-1/2 + dt) at t = T/2 and T, n = 1e5");
  const Grid g = Grid::cube(1, 32.0, 2048);
  const double T = 1.0;
  const int n_t = 50;
  for (double sigma : {1.3, 1.5, 1.8})
    for (double c : {0.0, 0.7}) {
      const LevyMeasureSpec spec(IsotropicStable{sigma});
      const ProbabilityField m0 = gaussian_density(g, 0.3);
      FPInput in{{}, m0, adjoint_symbol(build_symbol(spec, g)), T, n_t, {}};
      if (c != 0.0) in.drift = constant_drift(g, n_t, c);
      const FPSolution sol = solve_fp_forward(in);
      SDEConfig cfg;
      cfg.n_paths = 100000;
      cfg.n_t = n_t;
      cfg.horizon = T;
      cfg.seed = opt.seed;
      const PathEnsemble ens = simulate_controlled_sde(spec, g, in.drift, m0, cfg);
      const double bound = 5.0 * (1.0 / std::sqrt(double(cfg.n_paths)) + T / n_t);
      double worst = 0.0;
      for (int k : {n_t / 2, n_t}) worst = std::max(worst, d0_distance(empirical_law(ens, k, g).field(), sol.m[k]).value);
      rec.check(tag("d0.sigma%.1f.c%.1f", sigma, c), worst, worst <= bound);
    }
  rec.measure("bound", 5.0 * (1.0 / std::sqrt(1e5) + T / n_t));
  return rec.r;
}

Eigen::MatrixXd random_points(int n, int d, double spread, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Eigen::MatrixXd p(n, d);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) p(i, a) = u(rng);
  return p;
}

DiscreteMeasure random_measure(const Eigen::MatrixXd& pts, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealArray w(pts.rows());
  for (Index i = 0; i < w.size(); ++i) w[i] = u(rng) < 0.2 ? 0.0 : u(rng);
  if (w.sum() == 0.0) w[0] = 1.0;
  w /= w.sum();
  w[w.size() - 1] = std::max(0.0, 1.0 - w.head(w.size() - 1).sum());
  return DiscreteMeasure(pts, w);
}

CriterionResult d0_solver(const AcceptanceOptions& opt) {
  Recorder rec("exact d0 solver matches vertex enumeration, two-atom closed form, and the metric axioms",
               "|LP - oracle| <= 1e-9 on 50 instances; two-atom error <= 1e-14; axioms within 1e-8");
  std::mt19937_64 rng(opt.seed + 200);
  double worst = 0.0, cert = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5, d = 1 + trial % 3;
    const Eigen::MatrixXd p = random_points(n, d, trial % 2 ? 0.6 : 2.0, rng);
    const DiscreteMeasure mu = random_measure(p, rng), nu = random_measure(p, rng);
    const D0Result r = d0_distance(mu, nu);
    worst = std::max(worst, std::abs(r.value - d0_brute_oracle(mu, nu)));
    cert = std::max(cert, std::abs(evaluate_test_function(mu, nu, r.certificate) - r.value));
  }
  rec.check("max_oracle_gap", worst, worst <= 1e-9);
  rec.check("max_certificate_gap", cert, cert <= 1e-10);
  double atoms = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd p = random_points(2, 1 + trial % 3, 1.5, rng);
    RealArray w1(2), w2(2);
    w1 << 1.0, 0.0;
    w2 << 0.0, 1.0;
    const double want = std::min((p.row(0) - p.row(1)).norm(), 2.0);
    atoms = std::max(atoms, std::abs(d0_distance(DiscreteMeasure(p, w1), DiscreteMeasure(p, w2)).value - want));
  }
  rec.check("two_atom_err", atoms, atoms <= 1e-14);
  double symmetry = 0.0, triangle = 0.0, identity = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::MatrixXd p = random_points(12, 1 + trial % 2, 3.0, rng);
    const auto a = random_measure(p, rng), b = random_measure(p, rng), c = random_measure(p, rng);
    const double ab = d0_distance(a, b).value, ba = d0_distance(b, a).value;
    const double bc = d0_distance(b, c).value, ac = d0_distance(a, c).value;
    symmetry = std::max(symmetry, std::abs(ab - ba));
    triangle = std::max(triangle, ac - ab - bc);
    identity = std::max(identity, d0_distance(a, a).value);
  }
  rec.check("symmetry_defect", symmetry, symmetry <= 1e-10);
  rec.check("triangle_excess", triangle, triangle <= 1e-8);
  rec.check("self_distance", identity, identity <= 1e-14);
  return rec.r;
}

const Grid& benchmark_grid() {
  static const Grid g = Grid::cube(1, 4.0, 256);
  return g;
}

MFGProblem benchmark_problem() {
  const Grid& g = benchmark_grid();
  Coupling F(NonlocalCoupling{gaussian_kernel(g, 0.3), {}, true, 2.0});
  Coupling G(NonlocalCoupling{gaussian_kernel(g, 0.3), {}, true, 1.0});
  return make_mfg_problem(quadratic_hamiltonian(), F, G, gaussian_density(g, 0.5, 0.5),
                          LevyMeasureSpec(IsotropicStable{1.5}), 1.0, 64);
}

CriterionResult mfg_uniqueness(const AcceptanceOptions&) {
  constexpr double kGap = 1e-3;
  Recorder rec("monotone benchmark: both seeds converge to the same equilibrium; energy identity terms vanish",
               "both converge, inter-seed sup_t d0 <= 1e-3, energy terms >= -1e-8 and convexity term small");
  const MFGProblem p = benchmark_problem();
  const MFGSolution a = solve_mfg(p, seed_trajectory(p, "uniform"));
  const MFGSolution b = solve_mfg(p, seed_trajectory(p, "bump"));
  rec.check("iterations.uniform", a.iterations, a.converged);
  rec.check("iterations.bump", b.iterations, b.converged);
  const double gap = d0_trajectory_sup(a.fp.m, b.fp.m, D0Method::exact_lp).value;
  rec.check("inter_seed_d0", gap, gap <= kGap);
  const UniquenessEnergy e = uniqueness_energy_diagnostic(a, b, p);
  const double smallest = std::min({e.boundary_term, e.coupling_term, e.bregman_term, e.convexity_term});
  rec.check("min_energy_term", smallest, smallest >= -1e-8);
  const double cap = 10 * p.iteration.tol_d0 * p.iteration.tol_d0 * p.horizon * benchmark_grid().volume();
  rec.check("convexity_term", e.convexity_term, e.convexity_term <= cap);
  rec.measure("identity_residual", e.identity_residual);
  return rec.r;
}

CriterionResult mfg_local_continuation(const AcceptanceOptions&) {
  constexpr double kCross = 1e-3;
  Recorder rec("local coupling via epsilon-continuation converges and matches a narrow nonlocal kernel",
               "every level converges, changes shrink, d0 to narrow-kernel solution <= 1e-3");
  const Grid& g = benchmark_grid();
  const MFGProblem p = make_mfg_problem(quadratic_hamiltonian(), Coupling::zero(), Coupling::zero(),
                                        gaussian_density(g, 0.5, 0.5), LevyMeasureSpec(IsotropicStable{1.5}), 1.0, 32);
  const LocalCoupling local{[](const std::vector<RealArray>&, const RealArray& k) { return RealArray(0.3 * k); }, true, true};
  const auto levels = solve_mfg_local(p, local, {0.4, 0.2, 0.1});
  int unconverged = 0;
  for (const auto& l : levels) unconverged += !l.solution.converged;
  rec.check("unconverged_levels", unconverged, unconverged == 0);
  rec.measure("change.0.2", levels[1].change);
  rec.check("change.0.1", levels[2].change, levels[2].change < levels[1].change);
  MFGProblem q = p;
  q.coupling = Coupling(NonlocalCoupling{gaussian_kernel(g, 0.02), {}, true, 0.3});
  const MFGSolution nonlocal = solve_mfg(q, seed_trajectory(q, "m0"));
  const double d = d0_trajectory_sup(levels.back().solution.fp.m, nonlocal.fp.m, D0Method::exact_lp).value;
  rec.check("d0_vs_narrow_nonlocal", d, d <= kCross && nonlocal.converged);
  return rec.r;
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> all{
      {1, "operator-exactness", operator_exactness},
      {2, "adjoint-duality", adjoint_duality},
      {3, "heat-kernel-closed-forms", heat_kernel_closed_forms},
      {4, "decay-exponents", decay_exponents},
      {5, "anisotropic-sum", anisotropic_sum},
      {6, "hjb-accuracy-bounds", hjb_accuracy_bounds},
      {7, "hjb-comparison", hjb_comparison},
      {8, "fp-conservation", fp_conservation},
      {9, "fp-regularity", fp_regularity},
      {10, "sde-agreement", sde_agreement},
      {11, "d0-solver", d0_solver},
      {12, "mfg-uniqueness", mfg_uniqueness},
      {13, "mfg-local-continuation", mfg_local_continuation},
  };
  return all;
}

CriterionResult run_criterion(const Criterion& c, const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = c.run(opt);
  } catch (const std::exception& e) {
    r.passed = false;
    r.note = e.what();
  }
  r.id = c.id;
  r.name = c.name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, const std::vector<int>& only) {
  std::vector<CriterionResult> out;
  for (const auto& c : acceptance_criteria())
    if (only.empty() || std::find(only.begin(), only.end(), c.id) != only.end()) out.push_back(run_criterion(c, opt));
  return out;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  char head[64];
  std::snprintf(head, sizeof head, "[%s] %02d %-26s", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str());
  os << head;
  for (const auto& [k, v] : r.measured) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " %s=%.3g", k.c_str(), v);
    os << buf;
  }
  if (!r.note.empty()) os << " error=\"" << r.note << '"';
  char tail[32];
  std::snprintf(tail, sizeof tail, "  %.1f s", r.seconds);
  os << "  (" << r.target << ")" << tail;
  return os.str();
}

}  // namespace lmfg
