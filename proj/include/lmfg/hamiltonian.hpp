#pragma once

#include "lmfg/core.hpp"

#include <functional>
#include <optional>
#include <string>

namespace lmfg {

/// H(x, u, p) evaluated on whole grids: `x` holds one coordinate array per
/// axis, `p` one momentum array per axis.
using HamiltonianEval = std::function<RealArray(const std::vector<RealArray>& x, const RealArray& u, const VectorField& p)>;
using HamiltonianGrad = std::function<VectorField(const std::vector<RealArray>& x, const RealArray& u, const VectorField& p)>;

struct Hamiltonian {
  std::string preset = "custom";
  HamiltonianEval eval;
  HamiltonianGrad grad_p;
  /// Monotonicity constant gamma: H(x,v,p) - H(x,u,p) >= gamma (v - u) for u <= v.
  double gamma = 0.0;
  /// Lipschitz-in-x constant C_R entering the gradient bound.
  double lipschitz_x = 1.0;
  /// Global bound on |D_p H| when one exists.
  std::optional<double> global_dp_bound;
  /// Uniform convexity constant C: I/C <= D_pp H <= C I.
  std::optional<double> convexity;
  /// False when H does not depend on (u, p) at all.
  bool depends_on_solution = true;
};

/// 1/2 kappa |p|^2.
Hamiltonian quadratic_hamiltonian(double kappa = 1.0);
/// sqrt(1 + |p|^2) - 1.
Hamiltonian eikonal_hamiltonian();
/// H == 0.
Hamiltonian zero_hamiltonian();
/// 1/2 |p|^2 + lambda u, lambda >= 0.
Hamiltonian discounted_quadratic_hamiltonian(double lambda);

/// Builds a preset by name: quadratic, eikonal, zero, stiff (kappa-scaled
/// quadratic), discounted.
Hamiltonian hamiltonian_preset(const std::string& name, double parameter = 1.0);

struct HamiltonianCheck {
  double gradient_error = 0.0;     // max relative mismatch of grad_p vs centered differences
  double monotonicity_defect = 0.0;  // max of gamma (v-u) - (H(v) - H(u)) over samples
  bool ok = false;
};

/// Samples random (x, u, p) and checks grad_p consistency (1e-6 relative)
/// and the gamma-monotonicity in u.
HamiltonianCheck check_hamiltonian(const Hamiltonian& h, int dim, unsigned seed = 7, int samples = 200);

}  // namespace lmfg
