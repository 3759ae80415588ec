#include "lmfg/fp.hpp"

#include "lmfg/fit.hpp"
#include "lmfg/spectral.hpp"

#include <algorithm>
#include <sstream>

namespace lmfg {
namespace {

void validate(const FPInput& in) {
  require_solver_order(in.adjoint.spec);
  if (in.n_t < 1) throw ContractViolation("fp: n_t must be >= 1");
  if (!(in.horizon > 0.0)) throw ContractViolation("fp: horizon must be positive");
  const Grid& g = in.m0.grid();
  require_same_grid(in.adjoint.grid, g, "fp");
  if (!in.drift.empty()) {
    if (static_cast<int>(in.drift.size()) != in.n_t + 1) throw ContractViolation("fp: drift needs n_t + 1 time nodes");
    for (const auto& b : in.drift) {
      if (static_cast<int>(b.size()) != g.dim()) throw ContractViolation("fp: drift needs one component per axis");
      for (const auto& c : b)
        if (c.size() != g.size() || !c.allFinite()) throw ContractViolation("fp: drift component malformed or not finite");
    }
  }
  const auto& o = in.options;
  if (!(o.positivity_tolerance >= 0.0) || !(o.positivity_hard_limit > 0.0))
    throw ContractViolation("fp: invalid positivity options");
}

double relative_negativity(const RealArray& m) {
  const double top = m.maxCoeff();
  return top > 0.0 ? std::max(0.0, -m.minCoeff()) / top : 0.0;
}

/// Scheme state shared by all steps.
struct Stepper {
  const FPInput& in;
  const Grid& grid;
  double dt;
  Propagator full, half;
  std::vector<ComplexArray> flux_full, flux_half;  // i xi_a e^{s L*} per axis

  explicit Stepper(const FPInput& input)
      : in(input),
        grid(input.m0.grid()),
        dt(input.horizon / input.n_t),
        full(build_propagator(input.adjoint, dt)),
        half(build_propagator(input.adjoint, 0.5 * dt)) {
    for (int a = 0; a < grid.dim(); ++a) {
      const ComplexArray d = derivative_multiplier(grid, a);
      flux_full.push_back(d * half.values);          // for the full step: d_a K*(dt/2)
      flux_half.push_back(d * build_propagator(input.adjoint, 0.25 * dt).values);  // predictor: d_a K*(dt/4)
    }
  }

  VectorField drift_at(double k) const {
    // k may be a half-integer; linear interpolation between nodes
    VectorField b;
    if (in.drift.empty()) return b;
    const int lo = static_cast<int>(std::floor(k));
    const int hi = std::min(lo + 1, in.n_t);
    const double w = k - lo;
    for (int a = 0; a < grid.dim(); ++a) b.push_back((1.0 - w) * in.drift[lo][a] + w * in.drift[hi][a]);
    return b;
  }

  /// sum_a d_a K(.) (b_a m) with the given per-axis multipliers.
  RealArray divergence(const VectorField& b, const RealArray& m, const std::vector<ComplexArray>& mult) const {
    ComplexArray acc = ComplexArray::Zero(grid.size());
    for (int a = 0; a < grid.dim(); ++a) acc += forward_transform(grid, RealArray(b[a] * m)) * mult[a];
    return inverse_transform_real(grid, acc);
  }

  RealArray step(const RealArray& m, int k) const {
    if (in.drift.empty()) return apply_propagator(full, m);
    // predictor at t_k + dt/2, then the midpoint corrector over the whole step
    const RealArray mid = apply_propagator(half, m) - 0.5 * dt * divergence(drift_at(k), m, flux_half);
    return apply_propagator(full, m) - dt * divergence(drift_at(k + 0.5), mid, flux_full);
  }
};

}  // namespace

FPSolution solve_fp_forward(const FPInput& input) {
  validate(input);
  const Stepper st(input);
  FPSolution sol;
  sol.grid = st.grid;
  sol.horizon = input.horizon;
  sol.n_t = input.n_t;
  RealArray m = input.m0.values();
  const double h = st.grid.cell_volume();
  auto record = [&](const RealArray& v, int k) {
    sol.m.emplace_back(st.grid, v, k * st.dt);
    sol.mass_defect.push_back(std::abs(v.sum() * h - 1.0));
    sol.positivity_defect.push_back(relative_negativity(v));
  };
  record(m, 0);
  for (int k = 0; k < input.n_t; ++k) {
    m = st.step(m, k);
    if (!m.allFinite()) throw SolverDivergence("fp: non-finite density", std::numeric_limits<double>::infinity());
    const double defect = relative_negativity(m);
    if (defect > input.options.positivity_hard_limit) {
      std::ostringstream os;
      os << "fp: positivity defect " << defect << " at step " << k + 1
         << " exceeds the hard limit; step size too large (drift stability number " << drift_stability_number(input)
         << ")";
      throw SolverDivergence(os.str(), defect);
    }
    if (input.options.clip && defect > input.options.positivity_tolerance) {
      const double before = m.sum();
      const RealArray clipped = m.max(0.0);
      sol.clipped_mass += (clipped - m).sum() * h;
      m = clipped * (before / clipped.sum());
    }
    record(m, k + 1);
  }
  return sol;
}

double drift_sup(const FPInput& input) {
  double top = 0.0;
  for (const auto& b : input.drift) {
    RealArray n2 = RealArray::Zero(b.empty() ? 0 : b[0].size());
    for (const auto& c : b) n2 += c.square();
    if (n2.size()) top = std::max(top, std::sqrt(n2.maxCoeff()));
  }
  return top;
}

double drift_stability_number(const FPInput& input) {
  const double sigma = input.adjoint.spec.order();
  const double dt = input.horizon / input.n_t;
  return std::pow(dt, 1.0 - 1.0 / sigma) * std::pow(2.0 / sigma, 1.0 / sigma) * std::exp(-1.0 / sigma) * drift_sup(input);
}

double very_weak_residual(const FPSolution& sol, const FPInput& input, const SpaceTimeFunction& phi) {
  const Grid& g = sol.grid;
  const Symbol forward = adjoint_symbol(input.adjoint);
  const double dt = sol.time_step();
  const double eps = 1e-5 * std::max(1.0, sol.horizon);
  const double h = g.cell_volume();
  auto sample = [&](double t) { return Field::sample(g, [&](const std::vector<double>& x) { return phi(t, x); }).values; };
  std::vector<double> integrand(sol.n_t + 1);
  for (int k = 0; k <= sol.n_t; ++k) {
    const double t = k * dt;
    const RealArray p = sample(t);
    RealArray gen = (sample(t + eps) - sample(t - eps)) / (2 * eps) + apply_operator(forward, p);
    if (!input.drift.empty()) {
      const VectorField dp = spectral_gradient(g, p);
      for (int a = 0; a < g.dim(); ++a) gen += input.drift[k][a] * dp[a];
    }
    integrand[k] = (sol.m[k].values * gen).sum() * h;
  }
  double time_integral = 0.0;
  for (int k = 0; k < sol.n_t; ++k) time_integral += 0.5 * dt * (integrand[k] + integrand[k + 1]);
  const double end = (sol.m.back().values * sample(sol.horizon)).sum() * h;
  const double start = (sol.m.front().values * sample(0.0)).sum() * h;
  return std::abs(end - start - time_integral);
}

EquicontinuityReport d0_equicontinuity_probe(const FPSolution& sol, const FPInput& input, double min_lag,
                                             double max_lag, int first) {
  if (first < 0 || first > sol.n_t) throw ContractViolation("equicontinuity probe: bad reference node");
  EquicontinuityReport r;
  const double sigma = input.adjoint.spec.order();
  r.theory_exponent = 1.0 / sigma;
  const double b = drift_sup(input);
  const double t0 = first * sol.time_step();
  for (int k = first + 1; k <= sol.n_t; ++k) {
    const double lag = k * sol.time_step() - t0;
    if (lag < min_lag - 1e-12 || lag > max_lag + 1e-12) continue;
    const double d = d0_distance(sol.m[k], sol.m[first], D0Method::exact_lp).value;
    r.lag.push_back(lag);
    r.distance.push_back(d);
    r.constant = std::max(r.constant, d / ((1.0 + b) * std::pow(lag, 1.0 / sigma)));
  }
  if (r.lag.size() < 2) throw ContractViolation("equicontinuity probe: fewer than two lags in range");
  r.exponent = fit_loglog(r.lag, r.distance).slope;
  return r;
}

TailFunction log_tail_function() {
  return {[](double r) { return std::log1p(r); }, 1.0, 1.0, "log(1+r)"};
}

LyapunovReport lyapunov_tail_check(const FPSolution& sol, const FPInput& input, const TailFunction& psi, double c,
                                   double slack) {
  const Grid& g = sol.grid;
  const LevyMeasureSpec& spec = input.adjoint.spec;
  LyapunovReport r;
  r.tail_integral = spec.tail_integral(g.dim(), psi.eval);  // throws if psi is not integrable
  r.inner_moment = spec.inner_second_moment(g.dim());
  const double b = drift_sup(input);
  const auto coords = g.coordinates();
  RealArray radius = RealArray::Zero(g.size());
  for (const auto& x : coords) radius += x.square();
  radius = radius.sqrt();
  double half_min = g.half_extent(0);
  for (int a = 1; a < g.dim(); ++a) half_min = std::min(half_min, g.half_extent(a));
  const RealArray psi_r = radius.unaryExpr(psi.eval);
  const RealArray outer = (radius > 0.8 * half_min).cast<double>();
  const double h = g.cell_volume();
  const double base = (sol.m.front().values * psi_r).sum() * h;
  r.satisfied = true;
  for (int k = 0; k <= sol.n_t; ++k) {
    const double t = k * sol.time_step();
    r.lhs.push_back((sol.m[k].values * psi_r).sum() * h);
    r.rhs.push_back(base + 2.0 * psi.derivative_bound + c * t * psi.derivative_bound * (b + r.inner_moment) +
                    t * r.tail_integral);
    if (r.lhs.back() > r.rhs.back() + slack) r.satisfied = false;
    r.outer_mass = std::max(r.outer_mass, (sol.m[k].values.max(0.0) * outer).sum() * h);
  }
  r.torus_healthy = r.outer_mass < 1e-3;
  return r;
}

double LinfReport::bound(double C) const {
  return std::max(1.0, std::pow(m0_sup + C * time_factor * drift, p / (p - 1.0)));
}

LinfReport linf_bound_check(const FPSolution& sol, const FPInput& input, double p) {
  const int d = sol.grid.dim();
  const double sigma = input.adjoint.spec.order();
  const double p0 = d / (d + 1.0 - sigma);
  if (!(p > 1.0 && p < p0)) {
    std::ostringstream os;
    os << "linf bound: p must lie in (1, " << p0 << ")";
    throw ContractViolation(os.str());
  }
  LinfReport r;
  r.p = p;
  r.m0_sup = input.m0.values().abs().maxCoeff();
  r.drift = drift_sup(input);
  r.time_factor = std::pow(sol.horizon, (d - p * (1.0 + d - sigma)) / (p * sigma));
  for (const auto& m : sol.m) r.measured = std::max(r.measured, m.values.maxCoeff());
  // Solve bound(C) >= measured for the smallest C >= 0.
  const double need = std::pow(r.measured, (p - 1.0) / p);
  if (r.measured <= 1.0 || need <= r.m0_sup)
    r.required_constant = 0.0;
  else if (r.drift * r.time_factor > 0.0)
    r.required_constant = (need - r.m0_sup) / (r.drift * r.time_factor);
  else
    r.required_constant = std::numeric_limits<double>::infinity();
  return r;
}

PositivityReport positivity_comparison_check(const FPSolution& sol, double tol_pos, double tol_mass) {
  PositivityReport r;
  r.min_relative = 1.0;
  for (std::size_t k = 0; k < sol.m.size(); ++k) {
    const RealArray& v = sol.m[k].values;
    r.min_relative = std::min(r.min_relative, v.minCoeff() / v.maxCoeff());
    r.mass_defect = std::max(r.mass_defect, sol.mass_defect[k]);
  }
  r.satisfied = r.min_relative >= -tol_pos && r.mass_defect <= tol_mass;
  return r;
}

}  // namespace lmfg
