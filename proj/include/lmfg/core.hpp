#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmfg {

using Index = Eigen::Index;
using RealArray = Eigen::ArrayXd;
using ComplexArray = Eigen::ArrayXcd;
using Complex = std::complex<double>;

/// Raised when a caller breaks an operation's precondition (size mismatch,
/// out-of-range parameter, grid mismatch, ...).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the periodic box is too small or too coarse for the requested
/// computation (kernel mass leaking, under-resolved probes, ...).
class DomainTooSmall : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by iterative solvers that fail to contract or to converge.
class SolverDivergence : public std::runtime_error {
public:
  SolverDivergence(const std::string& what, double last_ratio)
      : std::runtime_error(what), last_ratio_(last_ratio) {}
  double last_ratio() const noexcept { return last_ratio_; }

private:
  double last_ratio_;
};

/// Periodic box [-L_0, L_0) x ... x [-L_{d-1}, L_{d-1}) with N_i points per
/// axis. Node j on axis i sits at x = -L_i + j h_i. Flattened storage is
/// row-major (axis 0 slowest).
class Grid {
public:
  Grid() = default;
  Grid(std::vector<double> half_extent, std::vector<int> points);

  /// Same half-extent and point count on every axis.
  static Grid cube(int dim, double half_extent, int points);

  int dim() const noexcept { return static_cast<int>(points_.size()); }
  const std::vector<double>& half_extent() const noexcept { return half_extent_; }
  const std::vector<int>& points() const noexcept { return points_; }
  double half_extent(int axis) const { return half_extent_.at(axis); }
  int points(int axis) const { return points_.at(axis); }
  double spacing(int axis) const { return 2.0 * half_extent_.at(axis) / points_.at(axis); }
  Index stride(int axis) const { return strides_.at(axis); }
  Index size() const noexcept { return size_; }

  /// Volume element prod_i h_i.
  double cell_volume() const noexcept;
  /// Torus volume prod_i 2 L_i.
  double volume() const noexcept;

  double coordinate(int axis, int j) const { return -half_extent_[axis] + j * spacing(axis); }
  /// Signed integer frequency index for FFT slot j: 0..N/2-1, -N/2..-1.
  int wavenumber(int axis, int j) const;
  /// Angular frequency pi k / L for FFT slot j.
  double frequency(int axis, int j) const { return M_PI * wavenumber(axis, j) / half_extent_[axis]; }
  bool is_nyquist(int axis, int j) const { return j == points_[axis] / 2; }

  /// Multi-index of a flat cell index.
  std::vector<int> unflatten(Index flat) const;
  Index flatten(const std::vector<int>& idx) const;
  /// Physical coordinates of flat cell `flat`.
  std::vector<double> point(Index flat) const;
  /// Flat index of the Hermitian partner -k of spectral slot `flat`.
  Index negated_slot(Index flat) const;

  /// Per-axis coordinate of every cell, flattened; one array per axis.
  std::vector<RealArray> coordinates() const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

private:
  std::vector<double> half_extent_;
  std::vector<int> points_;
  std::vector<Index> strides_;
  Index size_ = 0;
};

/// Real-valued grid function.
struct Field {
  Grid grid;
  RealArray values;
  std::optional<double> time;

  Field() = default;
  Field(Grid g, RealArray v, std::optional<double> t = std::nullopt);
  static Field zeros(const Grid& g, std::optional<double> t = std::nullopt);
  static Field constant(const Grid& g, double c, std::optional<double> t = std::nullopt);

  /// Samples `fn(x)` at every node; `fn` receives the coordinate vector.
  template <class Fn>
  static Field sample(const Grid& g, Fn&& fn, std::optional<double> t = std::nullopt) {
    RealArray v(g.size());
    for (Index i = 0; i < g.size(); ++i) v[i] = fn(g.point(i));
    return Field(g, std::move(v), t);
  }

  /// Riemann sum of the values.
  double integral() const { return values.sum() * grid.cell_volume(); }
  bool all_finite() const { return values.allFinite(); }
};

/// Components of a vector-valued grid function (one array per axis).
using VectorField = std::vector<RealArray>;

struct ProbabilityTolerances {
  double positivity = 1e-10;
  double mass = 1e-8;
};

/// Field with nonnegative values (up to tolerance) and unit mass.
class ProbabilityField {
public:
  /// Validates `f`; throws ContractViolation on a positivity or mass defect.
  explicit ProbabilityField(Field f, ProbabilityTolerances tol = {});
  /// Rescales a nonnegative field to unit mass, then validates.
  static ProbabilityField normalized(Field f, ProbabilityTolerances tol = {});

  const Field& field() const noexcept { return field_; }
  const Grid& grid() const noexcept { return field_.grid; }
  const RealArray& values() const noexcept { return field_.values; }
  double mass() const { return field_.integral(); }

private:
  Field field_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

/// L^p norm by Riemann sum; p = infinity gives the grid maximum of |values|.
double lp_norm(const Grid& g, const RealArray& values, double p);
/// Pointwise Euclidean norm of a vector field.
RealArray pointwise_norm(const VectorField& v);

}  // namespace lmfg
