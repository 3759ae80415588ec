#include "lmfg/heat_kernel.hpp"

#include "lmfg/fit.hpp"
#include "lmfg/spectral.hpp"

#include <numeric>
#include <sstream>

namespace lmfg {

Propagator build_propagator(const Symbol& sym, double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw ContractViolation("build_propagator: dt must be >= 0");
  ComplexArray v = (sym.values * dt).exp();
  v[0] = 1.0;  // the mass mode is exactly preserved
  return Propagator{sym.grid, dt, std::move(v), sym.spec};
}

Propagator compose(const Propagator& a, const Propagator& b) {
  require_same_grid(a.grid, b.grid, "compose");
  return Propagator{a.grid, a.dt + b.dt, a.values * b.values, a.spec};
}

RealArray apply_propagator(const Propagator& prop, const RealArray& values) {
  return apply_multiplier(prop.grid, values, prop.values);
}

Field apply_propagator(const Propagator& prop, const Field& f) {
  require_same_grid(prop.grid, f.grid, "apply_propagator");
  std::optional<double> t;
  if (f.time) t = *f.time + prop.dt;
  return Field(f.grid, apply_propagator(prop, f.values), t);
}

RealArray kernel_values(const Propagator& prop, const ComplexArray& extra_multiplier) {
  const Grid& g = prop.grid;
  ComplexArray s = prop.values * centering_phase(g).cast<Complex>();
  if (extra_multiplier.size() > 0) {
    if (extra_multiplier.size() != g.size()) throw ContractViolation("kernel_values: multiplier size mismatch");
    s *= extra_multiplier;
  }
  return inverse_transform_real(g, std::move(s)) / g.cell_volume();
}

namespace {

/// Cells whose max-norm position is in the outer 10% of the box.
std::vector<Index> outer_shell(const Grid& g) {
  std::vector<Index> out;
  for (Index i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(x[a]) > 0.9 * g.half_extent(a)) {
        out.push_back(i);
        break;
      }
  }
  return out;
}

ResolutionReport resolution_of(const Grid& g, const RealArray& kernel, const ComplexArray& spectrum) {
  ResolutionReport r;
  const double peak = kernel.abs().maxCoeff();
  double shell = 0.0;
  for (Index i : outer_shell(g)) shell = std::max(shell, std::abs(kernel[i]));
  r.annulus_peak_ratio = peak > 0.0 ? shell / peak : 0.0;
  r.high_frequency_energy = high_frequency_energy_fraction(g, spectrum, 0.1);
  r.ok = r.annulus_peak_ratio < 1e-4 && r.high_frequency_energy < 1e-6;
  return r;
}

}  // namespace

ResolutionReport check_resolution(const Propagator& prop) {
  return resolution_of(prop.grid, kernel_values(prop, {}), prop.values);
}

KernelSnapshot kernel_snapshot(const Propagator& prop, double mass_tol) {
  KernelSnapshot snap;
  RealArray k = kernel_values(prop, {});
  snap.resolution = resolution_of(prop.grid, k, prop.values);
  snap.kernel = Field(prop.grid, std::move(k), prop.dt);
  snap.mass = snap.kernel.integral();
  snap.min_value = snap.kernel.values.minCoeff();
  if (!(std::abs(snap.mass - 1.0) <= mass_tol))
    throw DomainTooSmall("kernel_snapshot: mass defect " + std::to_string(snap.mass - 1.0) + " exceeds tolerance");
  return snap;
}

RealArray reflect(const Grid& grid, const RealArray& values) {
  RealArray out(values.size());
  for (Index i = 0; i < grid.size(); ++i) {
    auto idx = grid.unflatten(i);
    for (int a = 0; a < grid.dim(); ++a) idx[a] = (grid.points(a) - idx[a]) % grid.points(a);
    out[grid.flatten(idx)] = values[i];
  }
  return out;
}

ComplexArray multi_derivative_multiplier(const Grid& grid, const std::vector<int>& beta) {
  if (static_cast<int>(beta.size()) != grid.dim()) throw ContractViolation("derivative multi-index has the wrong length");
  ComplexArray m = ComplexArray::Ones(grid.size());
  for (int a = 0; a < grid.dim(); ++a) {
    if (beta[a] < 0) throw ContractViolation("derivative multi-index must be nonnegative");
    if (beta[a] == 0) continue;
    const ComplexArray d = derivative_multiplier(grid, a);
    for (int k = 0; k < beta[a]; ++k) m *= d;
  }
  return m;
}

ComplexArray fractional_multiplier(const Grid& grid, double s) {
  return frequency_magnitude(grid).pow(s).cast<Complex>();
}

namespace {

ProbeResult run_probe(const LevyMeasureSpec& spec, const Grid& grid, double p, const ComplexArray& mult,
                      const std::vector<double>& times) {
  if (times.size() < 2) throw ContractViolation("decay probe: need at least two times");
  const Symbol sym = build_symbol(spec, grid);
  ProbeResult r;
  r.spec_id = spec.name();
  r.p = p;
  std::vector<double> ts, ns;
  for (double t : times) {
    const Propagator prop = build_propagator(sym, t);
    const auto res = check_resolution(prop);
    if (!res.ok) {
      std::ostringstream os;
      os << "decay probe: kernel not resolved at t=" << t << " (annulus ratio " << res.annulus_peak_ratio
         << ", high-frequency energy " << res.high_frequency_energy << ")";
      throw DomainTooSmall(os.str());
    }
    const double n = lp_norm(grid, kernel_values(prop, mult), p);
    r.rows.push_back({t, n});
    ts.push_back(t);
    ns.push_back(n);
  }
  const LineFit f = fit_loglog(ts, ns);
  r.fitted_slope = f.slope;
  r.residual = f.residual;
  return r;
}

}  // namespace

ProbeResult decay_rate_probe(const LevyMeasureSpec& spec, const Grid& grid, double p, const std::vector<int>& beta,
                             const std::vector<double>& times) {
  if (!(p >= 1.0)) throw ContractViolation("decay_rate_probe: p must be >= 1");
  const int order = std::accumulate(beta.begin(), beta.end(), 0);
  if (order > 2) throw ContractViolation("decay_rate_probe: |beta| <= 2");
  ProbeResult r = run_probe(spec, grid, p, order == 0 ? ComplexArray() : multi_derivative_multiplier(grid, beta), times);
  r.beta = beta;
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  r.theory_slope = -(order + (1.0 - inv_p) * grid.dim()) / spec.order();
  return r;
}

ProbeResult fractional_decay_probe(const LevyMeasureSpec& spec, const Grid& grid, double s, bool with_gradient,
                                   const std::vector<double>& times, int axis) {
  const double top = with_gradient ? 1.0 : 2.0;
  if (!(s > 0.0 && s < top)) throw ContractViolation("fractional_decay_probe: s out of range");
  ComplexArray m = fractional_multiplier(grid, s);
  if (with_gradient) m *= derivative_multiplier(grid, axis);
  ProbeResult r = run_probe(spec, grid, 1.0, m, times);
  r.s = s;
  r.beta.assign(grid.dim(), 0);
  if (with_gradient) r.beta[axis] = 1;
  r.theory_slope = -(s + (with_gradient ? 1.0 : 0.0)) / spec.order();
  return r;
}

std::string probe_csv(const std::vector<ProbeResult>& results) {
  std::ostringstream os;
  os.precision(12);
  os << "spec,p,beta,s,t,norm,fitted_slope,theory_slope,residual\n";
  for (const auto& r : results) {
    std::string beta;
    for (std::size_t i = 0; i < r.beta.size(); ++i) beta += (i ? ":" : "") + std::to_string(r.beta[i]);
    for (const auto& row : r.rows)
      os << '"' << r.spec_id << "\"," << (std::isinf(r.p) ? std::string("inf") : std::to_string(r.p)) << ',' << beta << ','
         << r.s << ',' << row.t << ',' << row.norm << ',' << r.fitted_slope << ',' << r.theory_slope << ',' << r.residual
         << '\n';
  }
  return os.str();
}

}  // namespace lmfg
