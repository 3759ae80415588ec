#pragma once

#include "lmfg/hamiltonian.hpp"
#include "lmfg/heat_kernel.hpp"

namespace lmfg {

struct PicardConfig {
  int max_sweeps = 60;
  double tol = 1e-11;  // relative sup-norm change between sweeps
  double window = 0.25;  // T0
  int n_windows = 1;
};

/// Backward problem -u_t - L u + H(x, u, Du) = f, u(T) = G.
struct HJBInput {
  Hamiltonian hamiltonian;
  /// f at the forward time nodes t_k = k T / n_t, k = 0..n_t; empty means f == 0.
  std::vector<Field> source;
  Field terminal;
  Symbol symbol;
  double horizon = 1.0;
  int n_t = 32;
  PicardConfig picard;
};

struct WindowRecord {
  int first_step = 0;  // in reversed time
  int steps = 0;
  int sweeps = 0;
  double ratio = 0.0;  // last successive-difference ratio
  double change = 0.0;  // last sup-norm change
};

struct HJBSolution {
  Grid grid;
  double horizon = 0.0;
  int n_t = 0;
  std::vector<Field> u;  // u[k] at forward time t_k
  std::vector<VectorField> du;
  std::vector<WindowRecord> windows;
  int bisections = 0;
  double time_step() const { return horizon / n_t; }
};

/// Duhamel/Picard solve in reversed time tau = T - t:
/// v_{j+1} = K(dt) v_j - dt K(dt/2) [H(x, v_mid, Dv_mid) - f_mid].
/// Windows that fail to contract are halved; a failing single step throws
/// SolverDivergence carrying the last ratio.
HJBSolution solve_hjb_backward(const HJBInput& input);

/// One Picard window starting from v_start. Returns the trajectory (steps + 1
/// fields, in reversed time) and the record; throws SolverDivergence when the
/// sweeps do not contract.
struct WindowResult {
  std::vector<RealArray> v;
  WindowRecord record;
};
WindowResult picard_window(const HJBInput& input, const RealArray& v_start, int first_step, int steps);

/// Largest residual of the discrete Duhamel relation along the solution.
double duhamel_residual(const HJBSolution& sol, const HJBInput& input);
/// Largest strong-form residual |-u_t - L u + H - f| at interior nodes
/// (centered time differences, spectral L and Du).
double strong_form_residual(const HJBSolution& sol, const HJBInput& input);

struct BoundReport {
  double measured = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

/// max_t ||u||_inf <= ||G||_inf + C0 T with C0 = ||H(.,0,0)|| + ||f||.
BoundReport sup_bound_check(const HJBSolution& sol, const HJBInput& input, double slack = 1e-6);
/// max_t ||Du||_inf <= M_T = e^{2 C_R T} (C_R/2 + T^2 ||D_x f||^2 + ||DG||^2)^{1/2}.
BoundReport lipschitz_diagnostic(const HJBSolution& sol, const HJBInput& input);

struct ComparisonReport {
  double min_difference = 0.0;  // min over t, x of (u2 - u1)
  int time_index = 0;
  Index cell = 0;
  bool satisfied = false;
};
ComparisonReport comparison_diagnostic(const HJBSolution& lower, const HJBSolution& upper, double tol = 1e-8);

}  // namespace lmfg
