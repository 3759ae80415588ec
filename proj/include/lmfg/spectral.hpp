#pragma once

#include "lmfg/core.hpp"

namespace lmfg {

/// Unnormalized discrete Fourier transform of a real grid function, in FFT slot
/// order along every axis. inverse_transform(forward_transform(f)) == f.
ComplexArray forward_transform(const Grid& grid, const RealArray& values);
ComplexArray forward_transform(const Field& field);
ComplexArray forward_transform_complex(const Grid& grid, ComplexArray values);

/// Inverse transform (includes the 1/prod N factor).
ComplexArray inverse_transform(const Grid& grid, ComplexArray spectrum);
/// Real part of the inverse transform.
RealArray inverse_transform_real(const Grid& grid, ComplexArray spectrum);

/// Multiplies the spectrum of `values` by `multiplier` and transforms back.
RealArray apply_multiplier(const Grid& grid, const RealArray& values, const ComplexArray& multiplier);

/// |xi| at every spectral slot.
RealArray frequency_magnitude(const Grid& grid);
/// xi_axis at every spectral slot.
RealArray frequency_component(const Grid& grid, int axis);
/// i xi_axis with the Nyquist slot of that axis zeroed.
ComplexArray derivative_multiplier(const Grid& grid, int axis);
/// (-1)^{sum k}: shifts a spectrum so that its inverse is centered at x = 0.
RealArray centering_phase(const Grid& grid);

/// Spectral partial derivative along `axis`; exact on band-limited data.
Field spectral_gradient(const Field& field, int axis);
/// All partial derivatives.
VectorField spectral_gradient(const Grid& grid, const RealArray& values);

/// Periodic convolution (kernel * values)(x) = int kernel(x - y) values(y) dy,
/// with `kernel` sampled on the grid and centered at x = 0.
RealArray periodic_convolve(const Grid& grid, const RealArray& kernel, const RealArray& values);

/// Spectral energy fraction carried by the top `fraction` of |xi| (by radius).
double high_frequency_energy_fraction(const Grid& grid, const ComplexArray& spectrum, double fraction);

/// Shifts `values` by whole cells (`cells[a]` along axis a, periodic).
RealArray shift_cells(const Grid& grid, const RealArray& values, const std::vector<int>& cells);

}  // namespace lmfg
