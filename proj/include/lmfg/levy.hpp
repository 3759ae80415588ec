#pragma once

#include "lmfg/core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <variant>

namespace lmfg {

/// Rotation-invariant sigma-stable measure c_{d,sigma} |z|^{-d-sigma} dz, with
/// c_{d,sigma} chosen so that the symbol is exactly -|xi|^sigma.
struct IsotropicStable {
  double sigma = 1.5;
};

/// One-dimensional CGMY density C |z|^{-1-Y} exp(-G z^+ - M z^-).
struct TemperedCGMY {
  double C = 1.0;
  double G = 1.0;
  double M = 1.0;
  double Y = 1.5;
};

/// Isotropic stable density restricted to the ball |z| < cutoff.
struct TruncatedStable {
  double sigma = 1.5;
  double cutoff = 1.0;
};

/// User density on the real line. `tail_total` is the mass on |z| >= 1; the
/// density is integrated numerically out to `tail_radius`, and the mass
/// beyond that radius is taken from `tail_total`.
struct GeneralDensity {
  std::function<double(double)> density;
  double sigma_order = 1.5;
  double tail_total = 0.0;
  double tail_radius = 50.0;
  std::string label = "general";
};

using Levy1D = std::variant<IsotropicStable, TemperedCGMY, TruncatedStable, GeneralDensity>;

/// A one-dimensional measure embedded along coordinate axis `axis`.
struct AxisComponent {
  int axis = 0;
  Levy1D measure;
};

/// Sum of one-dimensional operators acting along coordinate axes.
struct AnisotropicSum {
  std::vector<AxisComponent> components;
};

using LevyVariant = std::variant<IsotropicStable, TemperedCGMY, AnisotropicSum, TruncatedStable, GeneralDensity>;

/// Validated description of a Levy jump measure. Split radius is fixed at 1.
class LevyMeasureSpec {
public:
  /// Validates the parameters; every stable order must lie in (1, 2).
  explicit LevyMeasureSpec(LevyVariant v);
  /// Closed-form -|xi|^alpha symbol for alpha in (0, 2], used only to test the
  /// heat-kernel machinery against the Cauchy (alpha = 1) and Gaussian
  /// (alpha = 2) kernels. Solvers reject these.
  static LevyMeasureSpec engine(double alpha);

  const LevyVariant& variant() const noexcept { return v_; }
  bool is_engine() const noexcept { return engine_; }
  std::string name() const;

  /// Order sigma; minimum over components for sums.
  double order() const;
  /// Smallest dimension the spec can be embedded in (1 for 1D variants,
  /// 1 + max axis for sums, 1 for isotropic).
  int min_dim() const;
  /// True when the spec only makes sense in exactly one dimension.
  bool one_dimensional() const;
  void require_dim(int d) const;
  bool symmetric() const;

  /// mu(B_1^c).
  double tail_mass(int dim) const;
  /// int_{|z|<1} |z|^2 dmu.
  double inner_second_moment(int dim) const;
  /// int_{|z|>1} g(|z|) dmu; throws ContractViolation when the integral does
  /// not settle (g not mu-integrable at infinity).
  double tail_integral(int dim, const std::function<double(double)>& g) const;
  /// mu(|z| > R) for R >= 1.
  double tail_mass_beyond(int dim, double radius) const;
  /// Radial measure density: dmu(|z| in dr) / dr.
  double radial_density(int dim, double r) const;

  /// Antipodal measure mu*(B) = mu(-B).
  LevyMeasureSpec reflected() const;

  /// Symbol at a single frequency vector (closed form or quadrature).
  Complex symbol(std::span<const double> xi) const;
  /// Singular part: integral over |z| < 1 only.
  Complex singular_symbol(std::span<const double> xi) const;

private:
  LevyMeasureSpec(LevyVariant v, bool engine) : v_(std::move(v)), engine_(engine) {}
  LevyVariant v_;
  bool engine_ = false;
};

/// Throws unless the spec is a solver-admissible operator (order in (1, 2)).
void require_solver_order(const LevyMeasureSpec& spec);

/// c_{d,sigma} of the isotropic stable density.
double stable_constant(int dim, double sigma);
/// Surface area of the unit sphere S^{d-1}.
double sphere_area(int dim);

/// Tabulated Fourier multiplier on a grid's spectral slots.
struct Symbol {
  Grid grid;
  ComplexArray values;
  LevyMeasureSpec spec;
  /// Bound on the part of the tail not resolved by quadrature (GeneralDensity).
  double quadrature_remainder = 0.0;
};

Symbol build_symbol(const LevyMeasureSpec& spec, const Grid& grid);

struct SymbolSplit {
  Symbol singular;
  Symbol bounded;
};
/// Singular (|z| < 1) and bounded (|z| >= 1) parts of the symbol.
SymbolSplit split_symbol(const LevyMeasureSpec& spec, const Grid& grid);

/// Symbol of the adjoint operator: complex conjugate table.
Symbol adjoint_symbol(const Symbol& sym);

/// Spectral application of the operator to a field on the same grid.
Field apply_operator(const Symbol& sym, const Field& f);
RealArray apply_operator(const Symbol& sym, const RealArray& values);

/// Smooth test function with its Hessian, for the pointwise quadrature oracle.
struct TestFunction {
  std::function<double(std::span<const double>)> value;
  std::function<Eigen::MatrixXd(std::span<const double>)> hessian;
};

/// Isotropic Gaussian exp(-|x - center|^2 / (2 width^2)).
TestFunction gaussian_test_function(std::vector<double> center, double width);

struct OracleOptions {
  double outer_radius = 200.0;
  int angular_points = 64;
};

/// Direct evaluation of the singular integral defining L f(x) on R^d, the
/// small-jump part in second-order Taylor remainder form.
double quadrature_operator_oracle(const LevyMeasureSpec& spec, const TestFunction& f, std::span<const double> x,
                                  const OracleOptions& opt = {});

struct LpInterpolationReport {
  double lhs = 0.0;            // ||L f||_p
  double hessian_term = 0.0;   // ||D^2 f||_p r^{2-sigma}
  double gradient_term = 0.0;  // ||D f||_p Gamma(sigma, r)
  double tail_term = 0.0;      // ||f||_p mu(B_1^c)
  double hessian_norm = 0.0;   // ||D^2 f||_p
  double function_norm = 0.0;  // ||f||_p
  double rhs_sum() const { return hessian_term + gradient_term + tail_term; }
};

/// Both sides of the L^p operator bound at split radius r in (0, 1].
LpInterpolationReport lp_interpolation_check(const Symbol& sym, const Field& f, double p, double r);

struct ConeReport {
  std::vector<double> radii;
  std::vector<double> integrals;
  double fitted_beta = 0.0;
  double fitted_constant = 0.0;
  bool satisfied = false;
};

/// Fits int_{cone(a, eta) cap B_r} |z|^2 dmu ~ C eta^{(d-1)/2} r^{2-beta}.
/// With `directional` the cone is {<a,z> >= (1-eta)|a||z|}; otherwise the
/// two-sided cone {|<a,z>| >= (1-eta)|a||z|}.
ConeReport check_cone_condition(const LevyMeasureSpec& spec, std::span<const double> direction, double eta,
                                std::span<const double> radii, bool directional = true);

}  // namespace lmfg
