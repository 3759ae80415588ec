#pragma once

#include "lmfg/fp.hpp"
#include "lmfg/hjb.hpp"
#include "lmfg/metrics.hpp"

#include <functional>
#include <variant>

namespace lmfg {

/// Pointwise map (x, k) -> value on whole grids.
using PointwiseMap = std::function<RealArray(const std::vector<RealArray>& x, const RealArray& k)>;

/// F(x, m) = (rho * m)(x), or with `phi` the composite rho * phi(., rho * m).
/// `kernel` is centred at node N/2 of its grid (x = 0).
struct NonlocalCoupling {
  Field kernel;
  PointwiseMap phi;
  bool phi_nondecreasing = true;
  double weight = 1.0;
};

/// F(x, m) = f(x, m(x)).
struct LocalCoupling {
  PointwiseMap f;
  bool nondecreasing = true;
  /// f(x, k) = a(x) + c k; needed for the mollified form to stay monotone.
  bool affine = false;
};

/// F_eps(x, m) = f(x, (m * phi_eps)(x)) with the C-infinity bump phi.
struct MollifiedCoupling {
  LocalCoupling local;
  double epsilon = 0.1;
};

using CouplingVariant = std::variant<std::monostate, NonlocalCoupling, LocalCoupling, MollifiedCoupling>;

class Coupling {
public:
  Coupling() = default;
  explicit Coupling(CouplingVariant v);
  static Coupling zero() { return Coupling(); }

  const CouplingVariant& variant() const noexcept { return v_; }
  bool is_zero() const noexcept { return std::holds_alternative<std::monostate>(v_); }
  bool is_local() const noexcept { return std::holds_alternative<LocalCoupling>(v_); }
  /// Structural monotonicity witness; see monotone_reason().
  bool monotone() const noexcept { return monotone_; }
  const std::string& monotone_reason() const noexcept { return reason_; }
  std::string name() const;

  /// F(., m) on the grid of m.
  Field evaluate(const Field& m) const;

private:
  CouplingVariant v_;
  bool monotone_ = true;
  std::string reason_ = "zero coupling";
};

/// Normalized Gaussian kernel of standard deviation `width`, centred at x = 0.
Field gaussian_kernel(const Grid& grid, double width);
/// Mollifier phi_eps on the grid (unit discrete mass); requires eps > max spacing.
Field mollifier(const Grid& grid, double epsilon);
Coupling mollified_coupling(const LocalCoupling& local, double epsilon, const Grid& grid);

struct MonotonicityCheck {
  double min_pairing = 0.0;  // min over pairs of int (F(m1) - F(m2)) (m1 - m2)
  int pairs = 0;
  bool ok = false;
};
/// Random smooth probability pairs; ok when min_pairing >= -1e-10.
MonotonicityCheck monotonicity_spot_check(const Coupling& c, const Grid& grid, unsigned seed = 3, int pairs = 20);

enum class OuterScheme { damped_picard, fictitious_play };

struct MFGIteration {
  OuterScheme scheme = OuterScheme::damped_picard;
  double theta = 0.5;
  double tol_d0 = 1e-4;
  int max_outer = 200;
  D0Method metric = D0Method::grid_lp;
};

struct MFGProblem {
  Hamiltonian hamiltonian;
  Coupling coupling;
  Coupling terminal;
  ProbabilityField m0;
  Symbol symbol;   // L
  Symbol adjoint;  // L*
  double horizon = 1.0;
  int n_t = 32;
  PicardConfig picard;
  MFGIteration iteration;
  FPOptions fp;
};

/// Builds L and L* from the spec on the grid of m0.
MFGProblem make_mfg_problem(Hamiltonian h, Coupling F, Coupling G, ProbabilityField m0, const LevyMeasureSpec& spec,
                            double horizon, int n_t);

struct BestResponse {
  HJBSolution hjb;
  FPSolution fp;
};

/// S(mu): HJB with source F(., mu(t)) and terminal G(., mu(T)), then FP with
/// drift -D_p H(x, u, Du) from m0.
BestResponse best_response(const std::vector<Field>& mu, const MFGProblem& prob);
/// b = -D_p H along an HJB solution.
std::vector<VectorField> equilibrium_drift(const HJBSolution& u, const Hamiltonian& h);

/// Initial guess, constant in time: "uniform", "bump" (narrow Gaussian at the
/// origin) or "m0".
std::vector<Field> seed_trajectory(const MFGProblem& prob, const std::string& profile);

struct MFGSolution {
  HJBSolution hjb;
  FPSolution fp;
  std::vector<double> residuals;  // sup_t d0(mu_k, S(mu_k))
  std::vector<double> thetas;
  bool converged = false;
  int iterations = 0;
};

/// Outer fixed-point loop; never throws on non-convergence (converged = false).
MFGSolution solve_mfg(const MFGProblem& prob, std::vector<Field> seed);

struct ContinuationLevel {
  double epsilon = 0.0;
  MFGSolution solution;
  /// sup_t d0 to the previous level (0 for the first).
  double change = 0.0;
};
/// Solves the mollified problems along a decreasing eps schedule, warm-starting each level.
std::vector<ContinuationLevel> solve_mfg_local(const MFGProblem& prob, const LocalCoupling& local,
                                               const std::vector<double>& schedule, const std::string& seed = "m0");

struct UniquenessEnergy {
  double boundary_term = 0.0;    // int (G(m1(T)) - G(m2(T))) (m1(T) - m2(T))
  double coupling_term = 0.0;    // int_0^T int (F(m1) - F(m2)) (m1 - m2)
  double bregman_term = 0.0;     // int_0^T int m1 [H(Du2) - H(Du1) - H_p(Du1)(Du2 - Du1)] + (1 <-> 2)
  double convexity_term = 0.0;   // int_0^T int (m1 + m2) / (2C) |Du1 - Du2|^2
  double initial_term = 0.0;     // int (u1(0) - u2(0)) (m1(0) - m2(0))
  double identity_residual = 0.0;  // boundary + coupling + bregman - initial
  double convexity_constant = 1.0;
  bool normalized = false;       // false when H has no convexity constant
};
UniquenessEnergy uniqueness_energy_diagnostic(const MFGSolution& a, const MFGSolution& b, const MFGProblem& prob);

}  // namespace lmfg
