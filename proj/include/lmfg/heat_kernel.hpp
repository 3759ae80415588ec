#pragma once

#include "lmfg/levy.hpp"

#include <limits>
#include <string>
#include <vector>

namespace lmfg {

/// Modewise e^{dt S(xi)}: the heat kernel K(dt) in Fourier form.
struct Propagator {
  Grid grid;
  double dt = 0.0;
  ComplexArray values;
  LevyMeasureSpec spec;
};

/// dt = 0 gives the identity; negative dt is rejected.
Propagator build_propagator(const Symbol& sym, double dt);
/// Product of two propagators on the same grid (semigroup law).
Propagator compose(const Propagator& a, const Propagator& b);

/// K(dt) * f.
RealArray apply_propagator(const Propagator& prop, const RealArray& values);
Field apply_propagator(const Propagator& prop, const Field& f);

/// Kernel sampled at the grid nodes, centered at x = 0 (node N/2 per axis).
/// `extra_multiplier` (empty for none) is applied to the spectrum first.
RealArray kernel_values(const Propagator& prop, const ComplexArray& extra_multiplier);

struct ResolutionReport {
  double annulus_peak_ratio = 0.0;  // max of |K| on the outer 10% of the box / max |K|
  double high_frequency_energy = 0.0;
  bool ok = false;
};

/// Well-resolved iff the outer 10% shell of the box holds only a 1e-4 fraction
/// of the peak and the top 10% of frequencies carry < 1e-6 of the energy.
ResolutionReport check_resolution(const Propagator& prop);

struct KernelSnapshot {
  Field kernel;
  double mass = 0.0;
  double min_value = 0.0;  // most negative spectral ripple
  ResolutionReport resolution;
};

/// Throws DomainTooSmall when the mass defect exceeds `mass_tol`.
KernelSnapshot kernel_snapshot(const Propagator& prop, double mass_tol = 1e-8);

/// Mirror image f(-x) on the grid (node j -> N - j per axis).
RealArray reflect(const Grid& grid, const RealArray& values);

/// Multiplier prod_a (i xi_a)^{beta_a}; Nyquist slots zeroed for odd orders.
ComplexArray multi_derivative_multiplier(const Grid& grid, const std::vector<int>& beta);
/// |xi|^s.
ComplexArray fractional_multiplier(const Grid& grid, double s);

struct ProbeRow {
  double t = 0.0;
  double norm = 0.0;
};

struct ProbeResult {
  std::string spec_id;
  double p = 1.0;
  std::vector<int> beta;
  double s = 0.0;
  std::vector<ProbeRow> rows;
  double fitted_slope = 0.0;
  double theory_slope = 0.0;
  double residual = 0.0;
  bool within(double tol) const { return std::abs(fitted_slope - theory_slope) <= tol; }
};

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Slope of log ||D^beta K(t)||_p against log t; theory -(|beta| + (1-1/p) d)/sigma.
/// Throws DomainTooSmall if any probe time is not well resolved.
ProbeResult decay_rate_probe(const LevyMeasureSpec& spec, const Grid& grid, double p, const std::vector<int>& beta,
                             const std::vector<double>& times);

/// Slope of log || |D|^s K(t) ||_1 (optionally composed with d/dx_axis);
/// theory -s/sigma, or -(s+1)/sigma with the gradient.
ProbeResult fractional_decay_probe(const LevyMeasureSpec& spec, const Grid& grid, double s, bool with_gradient,
                                   const std::vector<double>& times, int axis = 0);

/// CSV rows {spec id, p, beta, s, t, norm, fitted slope, theory slope, residual}.
std::string probe_csv(const std::vector<ProbeResult>& results);

}  // namespace lmfg
