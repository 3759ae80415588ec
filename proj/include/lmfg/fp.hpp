#pragma once

#include "lmfg/heat_kernel.hpp"
#include "lmfg/metrics.hpp"

#include <functional>

namespace lmfg {

struct FPOptions {
  /// Run tolerance on negative values, relative to max m.
  double positivity_tolerance = 1e-6;
  /// Beyond this relative defect the step is declared too large.
  double positivity_hard_limit = 1e-2;
  /// Clip negative values and renormalize after every step.
  bool clip = false;
};

/// Forward problem m_t - L* m + div(b m) = 0, m(0) = m0.
struct FPInput {
  /// b at the time nodes t_k = k T / n_t, k = 0..n_t; empty means b == 0.
  std::vector<VectorField> drift;
  ProbabilityField m0;
  /// Symbol of the adjoint operator L* (see adjoint_symbol).
  Symbol adjoint;
  double horizon = 1.0;
  int n_t = 32;
  FPOptions options;
};

struct FPSolution {
  Grid grid;
  double horizon = 0.0;
  int n_t = 0;
  /// m at the forward time nodes; plain fields because spectral ripple may
  /// dip below zero within the run tolerance.
  std::vector<Field> m;
  std::vector<double> mass_defect;
  /// max(0, -min m) / max m at every node.
  std::vector<double> positivity_defect;
  double clipped_mass = 0.0;
  double time_step() const { return horizon / n_t; }
};

/// Exponential midpoint scheme in flux form:
/// m_{k+1} = K*(dt) m_k - dt sum_i d_i K*(dt/2) (b_i m)_{k+1/2}.
/// Throws SolverDivergence when the positivity defect passes the hard limit.
FPSolution solve_fp_forward(const FPInput& input);

/// |sup b| over all nodes and components (Euclidean length per cell).
double drift_sup(const FPInput& input);

/// Largest one-step amplification of the explicit drift term over all
/// frequencies, max_xi dt |xi| e^{-dt |xi|^sigma / 2} ||b||_inf
/// = dt^{1 - 1/sigma} (2/sigma)^{1/sigma} e^{-1/sigma} ||b||_inf.
/// Values above about 1 make the scheme unstable; shrink dt.
double drift_stability_number(const FPInput& input);

using SpaceTimeFunction = std::function<double(double, const std::vector<double>&)>;

/// Residual of int m(T) phi(T) - int m(0) phi(0) - int_0^T int m (phi_t + L phi + b . D phi)
/// (trapezoid in time, phi_t by centred differences of phi).
double very_weak_residual(const FPSolution& sol, const FPInput& input, const SpaceTimeFunction& phi);

struct EquicontinuityReport {
  std::vector<double> lag;
  std::vector<double> distance;
  double exponent = 0.0;
  /// Smallest c with d0 <= c (1 + ||b||) lag^{1/sigma} on every pair.
  double constant = 0.0;
  double theory_exponent = 0.0;
};

/// d0(m(t_k), m(t_first)) for t_k - t_first in [min_lag, max_lag]; log-log fit.
EquicontinuityReport d0_equicontinuity_probe(const FPSolution& sol, const FPInput& input, double min_lag,
                                             double max_lag, int first = 0);

struct TailFunction {
  std::function<double(double)> eval;
  double derivative_bound = 1.0;
  double second_derivative_bound = 1.0;
  std::string name;
};
/// psi(r) = log(1 + r).
TailFunction log_tail_function();

struct LyapunovReport {
  std::vector<double> lhs;
  std::vector<double> rhs;
  double tail_integral = 0.0;  // int_{|z|>1} psi dmu
  double inner_moment = 0.0;   // int_{|z|<1} |z|^2 dmu
  /// Largest mass outside radius 0.8 L along the run.
  double outer_mass = 0.0;
  bool satisfied = false;
  bool torus_healthy = false;
};

/// lhs(t) = int m(t) psi(|x|); rhs(t) = int m0 psi + 2||psi'|| + c t ||psi'|| (||b|| + inner
/// moment) + t int_{|z|>1} psi dmu. Throws ContractViolation if psi is not mu-integrable.
LyapunovReport lyapunov_tail_check(const FPSolution& sol, const FPInput& input, const TailFunction& psi,
                                   double c = 1.0, double slack = 1e-6);

struct LinfReport {
  double measured = 0.0;  // max_t ||m(t)||_inf
  double m0_sup = 0.0;
  double drift = 0.0;
  double time_factor = 0.0;  // T^{(d - p(1+d-sigma)) / (p sigma)}
  double p = 0.0;
  /// Smallest C for which this run satisfies the bound (0 if any C works).
  double required_constant = 0.0;
  double bound(double C) const;
};

/// Both sides of the L-infinity bound; requires 1 < p < d / (d + 1 - sigma).
LinfReport linf_bound_check(const FPSolution& sol, const FPInput& input, double p);

struct PositivityReport {
  double min_relative = 0.0;  // min_t min_x m / max m
  double mass_defect = 0.0;
  bool satisfied = false;
};
PositivityReport positivity_comparison_check(const FPSolution& sol, double tol_pos = 1e-6, double tol_mass = 1e-8);

}  // namespace lmfg
