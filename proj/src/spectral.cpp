#include "lmfg/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>

namespace lmfg {
namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

// Transforms every line along `axis` in place.
void transform_axis(const Grid& grid, ComplexArray& data, int axis, bool inverse) {
  const int n = grid.points(axis);
  const Index stride = grid.stride(axis);
  const Index block = stride * n;
  std::vector<Complex> line(n), out(n);
  auto& engine = fft_engine();
  for (Index outer = 0; outer < grid.size(); outer += block) {
    for (Index inner = 0; inner < stride; ++inner) {
      const Index base = outer + inner;
      for (int j = 0; j < n; ++j) line[j] = data[base + j * stride];
      if (inverse)
        engine.inv(out, line);
      else
        engine.fwd(out, line);
      for (int j = 0; j < n; ++j) data[base + j * stride] = out[j];
    }
  }
}

}  // namespace

ComplexArray forward_transform_complex(const Grid& grid, ComplexArray values) {
  if (values.size() != grid.size()) throw ContractViolation("forward_transform: size mismatch");
  for (int a = 0; a < grid.dim(); ++a) transform_axis(grid, values, a, false);
  return values;
}

ComplexArray forward_transform(const Grid& grid, const RealArray& values) {
  if (values.size() != grid.size()) throw ContractViolation("forward_transform: size mismatch");
  return forward_transform_complex(grid, values.cast<Complex>());
}

ComplexArray forward_transform(const Field& field) { return forward_transform(field.grid, field.values); }

ComplexArray inverse_transform(const Grid& grid, ComplexArray spectrum) {
  if (spectrum.size() != grid.size()) throw ContractViolation("inverse_transform: size mismatch");
  for (int a = 0; a < grid.dim(); ++a) transform_axis(grid, spectrum, a, true);
  return spectrum;
}

RealArray inverse_transform_real(const Grid& grid, ComplexArray spectrum) {
  return inverse_transform(grid, std::move(spectrum)).real();
}

RealArray apply_multiplier(const Grid& grid, const RealArray& values, const ComplexArray& multiplier) {
  if (multiplier.size() != grid.size()) throw ContractViolation("apply_multiplier: size mismatch");
  ComplexArray s = forward_transform(grid, values);
  s *= multiplier;
  return inverse_transform_real(grid, std::move(s));
}

RealArray frequency_component(const Grid& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) throw ContractViolation("frequency_component: axis out of range");
  RealArray out(grid.size());
  const Index stride = grid.stride(axis);
  const int n = grid.points(axis);
  for (Index i = 0; i < grid.size(); ++i) out[i] = grid.frequency(axis, static_cast<int>((i / stride) % n));
  return out;
}

RealArray frequency_magnitude(const Grid& grid) {
  RealArray s = RealArray::Zero(grid.size());
  for (int a = 0; a < grid.dim(); ++a) s += frequency_component(grid, a).square();
  return s.sqrt();
}

ComplexArray derivative_multiplier(const Grid& grid, int axis) {
  RealArray xi = frequency_component(grid, axis);
  const Index stride = grid.stride(axis);
  const int n = grid.points(axis);
  for (Index i = 0; i < grid.size(); ++i)
    if (grid.is_nyquist(axis, static_cast<int>((i / stride) % n))) xi[i] = 0.0;
  return xi.cast<Complex>() * Complex(0.0, 1.0);
}

RealArray centering_phase(const Grid& grid) {
  RealArray out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    long k = 0;
    Index flat = i;
    for (int a = 0; a < grid.dim(); ++a) {
      const int j = static_cast<int>(flat / grid.stride(a));
      flat %= grid.stride(a);
      k += grid.wavenumber(a, j);
    }
    out[i] = (k % 2 == 0) ? 1.0 : -1.0;
  }
  return out;
}

Field spectral_gradient(const Field& field, int axis) {
  if (axis < 0 || axis >= field.grid.dim()) throw ContractViolation("spectral_gradient: axis >= dim");
  return Field(field.grid, apply_multiplier(field.grid, field.values, derivative_multiplier(field.grid, axis)),
               field.time);
}

VectorField spectral_gradient(const Grid& grid, const RealArray& values) {
  const ComplexArray s = forward_transform(grid, values);
  VectorField out;
  out.reserve(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) out.push_back(inverse_transform_real(grid, s * derivative_multiplier(grid, a)));
  return out;
}

RealArray periodic_convolve(const Grid& grid, const RealArray& kernel, const RealArray& values) {
  // Kernel centered at node N/2 (x = 0); the phase factor moves it to slot 0.
  ComplexArray k = forward_transform(grid, kernel) * centering_phase(grid).cast<Complex>();
  return apply_multiplier(grid, values, k * grid.cell_volume());
}

double high_frequency_energy_fraction(const Grid& grid, const ComplexArray& spectrum, double fraction) {
  // Radius measured in units of the per-axis maximum wavenumber.
  RealArray r = RealArray::Zero(grid.size());
  for (int a = 0; a < grid.dim(); ++a) {
    const Index stride = grid.stride(a);
    const int n = grid.points(a);
    for (Index i = 0; i < grid.size(); ++i) {
      const double k = std::abs(grid.wavenumber(a, static_cast<int>((i / stride) % n))) / (0.5 * n);
      r[i] = std::max(r[i], k);
    }
  }
  const RealArray e = spectrum.abs2();
  const double total = e.sum();
  if (total <= 0.0) return 0.0;
  return (r > 1.0 - fraction).select(e, 0.0).sum() / total;
}

RealArray shift_cells(const Grid& grid, const RealArray& values, const std::vector<int>& cells) {
  RealArray out(values.size());
  for (Index i = 0; i < grid.size(); ++i) {
    auto idx = grid.unflatten(i);
    for (int a = 0; a < grid.dim(); ++a) {
      const int n = grid.points(a);
      idx[a] = ((idx[a] + cells[a]) % n + n) % n;
    }
    out[grid.flatten(idx)] = values[i];
  }
  return out;
}

}  // namespace lmfg
