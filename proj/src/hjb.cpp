#include "lmfg/hjb.hpp"

#include "lmfg/spectral.hpp"

#include <sstream>

namespace lmfg {
namespace {

/// Evaluation context shared by the sweeps of one solve.
struct Context {
  const HJBInput& in;
  Grid grid;
  std::vector<RealArray> x;
  Propagator full, half;
  double dt;

  explicit Context(const HJBInput& input)
      : in(input),
        grid(input.terminal.grid),
        x(grid.coordinates()),
        full(build_propagator(input.symbol, input.horizon / input.n_t)),
        half(build_propagator(input.symbol, 0.5 * input.horizon / input.n_t)),
        dt(input.horizon / input.n_t) {}

  /// f at reversed-time node j (forward node n_t - j).
  RealArray source(int j) const {
    if (in.source.empty()) return RealArray::Zero(grid.size());
    return in.source[in.n_t - j].values;
  }

  RealArray hamiltonian(const RealArray& v) const {
    return in.hamiltonian.eval(x, v, spectral_gradient(grid, v));
  }

  /// Right-hand side of one Duhamel step given the midpoint state.
  RealArray step(const RealArray& v_j, const RealArray& v_mid, int j) const {
    const RealArray f_mid = 0.5 * (source(j) + source(j + 1));
    return apply_propagator(full, v_j) - dt * apply_propagator(half, RealArray(hamiltonian(v_mid) - f_mid));
  }
};

void validate(const HJBInput& in) {
  require_solver_order(in.symbol.spec);
  if (in.n_t < 1) throw ContractViolation("hjb: n_t must be >= 1");
  if (!(in.horizon > 0.0)) throw ContractViolation("hjb: horizon must be positive");
  if (!in.hamiltonian.eval || !in.hamiltonian.grad_p) throw ContractViolation("hjb: hamiltonian is incomplete");
  require_same_grid(in.symbol.grid, in.terminal.grid, "hjb");
  if (!in.terminal.all_finite()) throw ContractViolation("hjb: terminal data not finite");
  if (!in.source.empty()) {
    if (static_cast<int>(in.source.size()) != in.n_t + 1) throw ContractViolation("hjb: source needs n_t + 1 time nodes");
    for (const auto& f : in.source) {
      require_same_grid(f.grid, in.terminal.grid, "hjb source");
      if (!f.all_finite()) throw ContractViolation("hjb: source not finite");
    }
  }
  if (in.picard.max_sweeps < 1 || !(in.picard.tol > 0.0) || !(in.picard.window > 0.0) || in.picard.n_windows < 1)
    throw ContractViolation("hjb: invalid picard configuration");
}

WindowResult run_window(const Context& ctx, const RealArray& v_start, int first, int steps) {
  const auto& cfg = ctx.in.picard;
  std::vector<RealArray> v(steps + 1, v_start);
  WindowRecord rec;
  rec.first_step = first;
  rec.steps = steps;
  double prev_change = -1.0;
  const int max_sweeps = ctx.in.hamiltonian.depends_on_solution ? cfg.max_sweeps : 1;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    std::vector<RealArray> next(steps + 1);
    next[0] = v_start;
    double change = 0.0, scale = 1.0;
    for (int j = 0; j < steps; ++j) {
      next[j + 1] = ctx.step(next[j], 0.5 * (v[j] + v[j + 1]), first + j);
      change = std::max(change, (next[j + 1] - v[j + 1]).abs().maxCoeff());
      scale = std::max(scale, next[j + 1].abs().maxCoeff());
    }
    v = std::move(next);
    rec.sweeps = sweep;
    rec.change = change / scale;
    if (!std::isfinite(change)) throw SolverDivergence("hjb: non-finite Picard iterate", rec.ratio);
    rec.ratio = prev_change > 0.0 ? change / prev_change : 0.0;
    if (!ctx.in.hamiltonian.depends_on_solution) {
      rec.ratio = 0.0;
      break;
    }
    if (rec.change <= cfg.tol && sweep >= 2) break;
    if (sweep >= 3 && rec.ratio >= 1.0) throw SolverDivergence("hjb: Picard sweeps do not contract", rec.ratio);
    if (sweep == max_sweeps) throw SolverDivergence("hjb: Picard sweeps did not reach tolerance", rec.ratio);
    prev_change = change;
  }
  return WindowResult{std::move(v), rec};
}

}  // namespace

WindowResult picard_window(const HJBInput& input, const RealArray& v_start, int first_step, int steps) {
  validate(input);
  if (first_step < 0 || steps < 1 || first_step + steps > input.n_t) throw ContractViolation("picard_window: bad step range");
  const Context ctx(input);
  const int max_steps = std::max(1, static_cast<int>(std::floor(input.picard.window / ctx.dt + 1e-9)));
  if (steps > max_steps) throw ContractViolation("picard_window: window longer than T0");
  return run_window(ctx, v_start, first_step, steps);
}

HJBSolution solve_hjb_backward(const HJBInput& input) {
  validate(input);
  const Context ctx(input);
  if (!ctx.hamiltonian(input.terminal.values).allFinite())
    throw ContractViolation("hjb: Hamiltonian evaluates to a non-finite value on the terminal data");

  const double window = std::min(input.picard.window, input.horizon / input.picard.n_windows);
  const int window_steps = std::max(1, static_cast<int>(std::floor(window / ctx.dt + 1e-9)));

  HJBSolution sol;
  sol.grid = ctx.grid;
  sol.horizon = input.horizon;
  sol.n_t = input.n_t;
  std::vector<RealArray> v{input.terminal.values};  // reversed time
  int j = 0, steps = window_steps;
  while (j < input.n_t) {
    steps = std::min(steps, input.n_t - j);
    try {
      WindowResult w = run_window(ctx, v.back(), j, steps);
      for (int k = 1; k <= steps; ++k) v.push_back(std::move(w.v[k]));
      sol.windows.push_back(w.record);
      j += steps;
    } catch (const SolverDivergence& e) {
      if (steps == 1) {
        std::ostringstream os;
        os << e.what() << " at the minimum window (reversed step " << j << ")";
        throw SolverDivergence(os.str(), e.last_ratio());
      }
      steps /= 2;
      ++sol.bisections;
    }
  }
  sol.u.resize(input.n_t + 1);
  sol.du.resize(input.n_t + 1);
  for (int k = 0; k <= input.n_t; ++k) {
    sol.u[k] = Field(ctx.grid, v[input.n_t - k], k * ctx.dt);
    sol.du[k] = spectral_gradient(ctx.grid, sol.u[k].values);
  }
  return sol;
}

double duhamel_residual(const HJBSolution& sol, const HJBInput& input) {
  const Context ctx(input);
  double r = 0.0;
  for (int j = 0; j < sol.n_t; ++j) {
    const RealArray& vj = sol.u[sol.n_t - j].values;
    const RealArray& vn = sol.u[sol.n_t - j - 1].values;
    r = std::max(r, (vn - ctx.step(vj, 0.5 * (vj + vn), j)).abs().maxCoeff());
  }
  return r;
}

double strong_form_residual(const HJBSolution& sol, const HJBInput& input) {
  const Context ctx(input);
  double r = 0.0;
  for (int k = 1; k < sol.n_t; ++k) {
    const RealArray ut = (sol.u[k + 1].values - sol.u[k - 1].values) / (2.0 * ctx.dt);
    const RealArray lu = apply_operator(input.symbol, sol.u[k].values);
    const RealArray f = input.source.empty() ? RealArray::Zero(ctx.grid.size()) : input.source[k].values;
    const RealArray res = -ut - lu + input.hamiltonian.eval(ctx.x, sol.u[k].values, sol.du[k]) - f;
    r = std::max(r, res.abs().maxCoeff());
  }
  return r;
}

BoundReport sup_bound_check(const HJBSolution& sol, const HJBInput& input, double slack) {
  const Grid& g = sol.grid;
  const RealArray zero = RealArray::Zero(g.size());
  const double h00 = input.hamiltonian.eval(g.coordinates(), zero, VectorField(g.dim(), zero)).abs().maxCoeff();
  double fmax = 0.0;
  for (const auto& f : input.source) fmax = std::max(fmax, f.values.abs().maxCoeff());
  BoundReport r;
  r.bound = input.terminal.values.abs().maxCoeff() + (h00 + fmax) * input.horizon;
  for (const auto& u : sol.u) r.measured = std::max(r.measured, u.values.abs().maxCoeff());
  r.satisfied = r.measured <= r.bound + slack;
  return r;
}

BoundReport lipschitz_diagnostic(const HJBSolution& sol, const HJBInput& input) {
  const Grid& g = sol.grid;
  double dxf = 0.0;
  for (const auto& f : input.source) dxf = std::max(dxf, pointwise_norm(spectral_gradient(g, f.values)).maxCoeff());
  const double dg = pointwise_norm(spectral_gradient(g, input.terminal.values)).maxCoeff();
  const double cr = input.hamiltonian.lipschitz_x;
  const double T = input.horizon;
  BoundReport r;
  r.bound = std::exp(2.0 * cr * T) * std::sqrt(0.5 * cr + T * T * dxf * dxf + dg * dg);
  for (const auto& du : sol.du) r.measured = std::max(r.measured, pointwise_norm(du).maxCoeff());
  r.satisfied = r.measured <= r.bound;
  return r;
}

ComparisonReport comparison_diagnostic(const HJBSolution& lower, const HJBSolution& upper, double tol) {
  if (lower.grid != upper.grid || lower.n_t != upper.n_t || lower.horizon != upper.horizon)
    throw ContractViolation("comparison_diagnostic: solutions belong to different problems");
  ComparisonReport r;
  r.min_difference = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= lower.n_t; ++k) {
    Index cell = 0;
    const double m = (upper.u[k].values - lower.u[k].values).minCoeff(&cell);
    if (m < r.min_difference) {
      r.min_difference = m;
      r.time_index = k;
      r.cell = cell;
    }
  }
  r.satisfied = r.min_difference >= -tol;
  return r;
}

}  // namespace lmfg
