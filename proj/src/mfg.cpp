#include "lmfg/mfg.hpp"

#include "lmfg/spectral.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace lmfg {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Real part of the transform of a kernel centred at x = 0.
RealArray centred_spectrum(const Field& kernel) {
  const ComplexArray s = forward_transform(kernel.grid, kernel.values) * centering_phase(kernel.grid).cast<Complex>();
  return s.real() * kernel.grid.cell_volume();
}

bool is_even(const Field& kernel) {
  const double scale = kernel.values.abs().maxCoeff();
  return (reflect(kernel.grid, kernel.values) - kernel.values).abs().maxCoeff() <= 1e-12 * std::max(scale, 1e-300);
}

bool nonnegative_spectrum(const Field& kernel) {
  const RealArray s = centred_spectrum(kernel);
  return s.minCoeff() >= -1e-12 * std::max(s.abs().maxCoeff(), 1e-300);
}

double pairing(const Grid& g, const RealArray& a, const RealArray& b) { return (a * b).sum() * g.cell_volume(); }

/// Smooth bump exp(-1 / (1 - r^2)) on the unit ball.
double bump_profile(double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

}  // namespace

Coupling::Coupling(CouplingVariant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [&](const std::monostate&) {
                   monotone_ = true;
                   reason_ = "zero coupling";
                 },
                 [&](const NonlocalCoupling& c) {
                   if (c.kernel.values.size() != c.kernel.grid.size() || !c.kernel.all_finite())
                     throw ContractViolation("nonlocal coupling: kernel malformed or not finite");
                   if (c.phi) {
                     monotone_ = c.weight >= 0.0 && c.phi_nondecreasing && is_even(c.kernel);
                     reason_ = monotone_ ? "even kernel, nondecreasing phi" : "needs an even kernel and nondecreasing phi";
                   } else {
                     monotone_ = c.weight >= 0.0 && nonnegative_spectrum(c.kernel);
                     reason_ = monotone_ ? "kernel transform >= 0" : "kernel transform changes sign";
                   }
                 },
                 [&](const LocalCoupling& c) {
                   if (!c.f) throw ContractViolation("local coupling: f missing");
                   monotone_ = c.nondecreasing;
                   reason_ = monotone_ ? "nondecreasing in m" : "not nondecreasing in m";
                 },
                 [&](const MollifiedCoupling& c) {
                   if (!c.local.f) throw ContractViolation("mollified coupling: f missing");
                   if (!(c.epsilon > 0.0)) throw ContractViolation("mollified coupling: epsilon must be positive");
                   // the mollifier is an autoconvolution, so its transform is >= 0
                   monotone_ = c.local.nondecreasing && c.local.affine;
                   reason_ = monotone_ ? "affine nondecreasing f, positive-definite mollifier"
                                       : "monotone only for affine nondecreasing f";
                 },
             },
             v_);
}

std::string Coupling::name() const {
  return std::visit(overloaded{
                        [](const std::monostate&) { return std::string("zero"); },
                        [](const NonlocalCoupling& c) { return std::string(c.phi ? "nonlocal-composite" : "nonlocal"); },
                        [](const LocalCoupling&) { return std::string("local"); },
                        [](const MollifiedCoupling& c) {
                          std::ostringstream os;
                          os << "mollified(eps=" << c.epsilon << ")";
                          return os.str();
                        },
                    },
                    v_);
}

Field Coupling::evaluate(const Field& m) const {
  const Grid& g = m.grid;
  return std::visit(overloaded{
                        [&](const std::monostate&) { return Field::zeros(g, m.time); },
                        [&](const NonlocalCoupling& c) {
                          require_same_grid(c.kernel.grid, g, "nonlocal coupling");
                          RealArray v = periodic_convolve(g, c.kernel.values, m.values);
                          if (c.phi) v = periodic_convolve(g, c.kernel.values, c.phi(g.coordinates(), v));
                          return Field(g, c.weight * v, m.time);
                        },
                        [&](const LocalCoupling& c) { return Field(g, c.f(g.coordinates(), m.values), m.time); },
                        [&](const MollifiedCoupling& c) {
                          const Field phi = mollifier(g, c.epsilon);
                          return Field(g, c.local.f(g.coordinates(), periodic_convolve(g, phi.values, m.values)), m.time);
                        },
                    },
                    v_);
}

Field gaussian_kernel(const Grid& grid, double width) {
  if (!(width > 0.0)) throw ContractViolation("gaussian kernel: width must be positive");
  Field k = Field::sample(grid, [&](const std::vector<double>& x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::exp(-r2 / (2 * width * width));
  });
  k.values /= k.integral();
  return k;
}

Field mollifier(const Grid& grid, double epsilon) {
  double h = 0.0;
  for (int a = 0; a < grid.dim(); ++a) h = std::max(h, grid.spacing(a));
  if (!(epsilon > h)) throw ContractViolation("mollifier: epsilon is under the grid resolution");
  // phi = psi * psi with psi a bump of radius eps / 2: smooth, compactly
  // supported in the eps-ball, even, with a nonnegative transform.
  Field psi = Field::sample(grid, [&](const std::vector<double>& x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return bump_profile(std::sqrt(r2) / (0.5 * epsilon));
  });
  psi.values /= psi.integral();
  Field phi(grid, periodic_convolve(grid, psi.values, psi.values));
  phi.values = phi.values.max(0.0);
  phi.values /= phi.integral();
  return phi;
}

Coupling mollified_coupling(const LocalCoupling& local, double epsilon, const Grid& grid) {
  mollifier(grid, epsilon);  // validates the resolution
  return Coupling(MollifiedCoupling{local, epsilon});
}

MonotonicityCheck monotonicity_spot_check(const Coupling& c, const Grid& grid, unsigned seed, int pairs) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_density = [&]() {
    RealArray v = RealArray::Constant(grid.size(), 0.05);
    const auto x = grid.coordinates();
    for (int b = 0; b < 3; ++b) {
      RealArray r2 = RealArray::Zero(grid.size());
      const double w = 0.1 + 0.6 * u(rng);
      for (int a = 0; a < grid.dim(); ++a) {
        const double centre = (2 * u(rng) - 1) * 0.7 * grid.half_extent(a);
        r2 += (x[a] - centre).square();
      }
      v += u(rng) * (-r2 / (2 * w * w)).exp();
    }
    return Field(grid, v / (v.sum() * grid.cell_volume()));
  };
  MonotonicityCheck out;
  out.min_pairing = std::numeric_limits<double>::infinity();
  for (int k = 0; k < pairs; ++k) {
    const Field a = random_density(), b = random_density();
    const double v = pairing(grid, c.evaluate(a).values - c.evaluate(b).values, a.values - b.values);
    out.min_pairing = std::min(out.min_pairing, v);
  }
  out.pairs = pairs;
  out.ok = out.min_pairing >= -1e-10;
  return out;
}

MFGProblem make_mfg_problem(Hamiltonian h, Coupling F, Coupling G, ProbabilityField m0, const LevyMeasureSpec& spec,
                            double horizon, int n_t) {
  const Symbol sym = build_symbol(spec, m0.grid());
  MFGProblem p{std::move(h), std::move(F), std::move(G), std::move(m0), sym, adjoint_symbol(sym), horizon, n_t, {}, {}, {}};
  return p;
}

std::vector<VectorField> equilibrium_drift(const HJBSolution& u, const Hamiltonian& h) {
  const auto x = u.grid.coordinates();
  std::vector<VectorField> b;
  b.reserve(u.u.size());
  for (std::size_t k = 0; k < u.u.size(); ++k) {
    VectorField g = h.grad_p(x, u.u[k].values, u.du[k]);
    for (auto& c : g) c = -c;
    b.push_back(std::move(g));
  }
  return b;
}

BestResponse best_response(const std::vector<Field>& mu, const MFGProblem& prob) {
  if (static_cast<int>(mu.size()) != prob.n_t + 1) throw ContractViolation("best_response: mu needs n_t + 1 time nodes");
  for (const auto& m : mu) require_same_grid(m.grid, prob.m0.grid(), "best_response");
  HJBInput hin{prob.hamiltonian, {}, prob.terminal.evaluate(mu.back()), prob.symbol, prob.horizon, prob.n_t, prob.picard};
  if (!prob.coupling.is_zero()) {
    hin.source.reserve(mu.size());
    for (const auto& m : mu) hin.source.push_back(prob.coupling.evaluate(m));
  }
  BestResponse out;
  out.hjb = solve_hjb_backward(hin);
  FPInput fin{{}, prob.m0, prob.adjoint, prob.horizon, prob.n_t, prob.fp};
  if (prob.hamiltonian.depends_on_solution) fin.drift = equilibrium_drift(out.hjb, prob.hamiltonian);
  out.fp = solve_fp_forward(fin);
  return out;
}

std::vector<Field> seed_trajectory(const MFGProblem& prob, const std::string& profile) {
  const Grid& g = prob.m0.grid();
  Field f;
  if (profile == "uniform")
    f = Field::constant(g, 1.0 / g.volume());
  else if (profile == "bump") {
    double h = 0.0;
    for (int a = 0; a < g.dim(); ++a) h = std::max(h, g.spacing(a));
    f = gaussian_kernel(g, 2.0 * h);
  } else if (profile == "m0")
    f = prob.m0.field();
  else
    throw ContractViolation("unknown seed profile '" + profile + "'");
  std::vector<Field> out;
  for (int k = 0; k <= prob.n_t; ++k) out.emplace_back(g, f.values, k * prob.horizon / prob.n_t);
  return out;
}

MFGSolution solve_mfg(const MFGProblem& prob, std::vector<Field> mu) {
  const auto& it = prob.iteration;
  if (!(it.theta > 0.0 && it.theta <= 1.0) || !(it.tol_d0 > 0.0) || it.max_outer < 1)
    throw ContractViolation("solve_mfg: invalid iteration settings");
  MFGSolution out;
  double theta = it.theta, previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k < it.max_outer; ++k) {
    BestResponse br = best_response(mu, prob);
    const double res = d0_trajectory_sup(mu, br.fp.m, it.metric).value;
    out.residuals.push_back(res);
    out.hjb = std::move(br.hjb);
    out.fp = std::move(br.fp);
    out.iterations = k;
    if (res <= it.tol_d0) {
      out.converged = true;
      return out;
    }
    // The first update jumps straight to S(mu_0): the seed carries no information worth keeping.
    double step;
    if (k == 0)
      step = 1.0;
    else if (it.scheme == OuterScheme::fictitious_play)
      step = 1.0 / (k + 1);
    else {
      if (res > previous) theta = std::max(0.5 * theta, 1.0 / 1024);
      step = theta;
    }
    out.thetas.push_back(step);
    previous = res;
    for (std::size_t t = 0; t < mu.size(); ++t) mu[t].values = (1.0 - step) * mu[t].values + step * out.fp.m[t].values;
  }
  out.iterations = it.max_outer;
  return out;
}

std::vector<ContinuationLevel> solve_mfg_local(const MFGProblem& prob, const LocalCoupling& local,
                                               const std::vector<double>& schedule, const std::string& seed) {
  if (schedule.empty()) throw ContractViolation("continuation: empty epsilon schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] < schedule[i - 1])) throw ContractViolation("continuation: epsilon schedule must decrease");
  std::vector<ContinuationLevel> levels;
  std::vector<Field> start = seed_trajectory(prob, seed);
  for (double eps : schedule) {
    MFGProblem p = prob;
    p.coupling = mollified_coupling(local, eps, prob.m0.grid());
    ContinuationLevel lvl;
    lvl.epsilon = eps;
    lvl.solution = solve_mfg(p, start);
    if (!levels.empty())
      lvl.change = d0_trajectory_sup(levels.back().solution.fp.m, lvl.solution.fp.m, prob.iteration.metric).value;
    start = lvl.solution.fp.m;
    levels.push_back(std::move(lvl));
  }
  return levels;
}

UniquenessEnergy uniqueness_energy_diagnostic(const MFGSolution& a, const MFGSolution& b, const MFGProblem& prob) {
  if (a.fp.n_t != b.fp.n_t || a.fp.n_t != prob.n_t || a.hjb.n_t != prob.n_t || b.hjb.n_t != prob.n_t)
    throw ContractViolation("uniqueness diagnostic: solutions belong to different problems");
  const Grid& g = prob.m0.grid();
  require_same_grid(a.fp.grid, g, "uniqueness diagnostic");
  require_same_grid(b.fp.grid, g, "uniqueness diagnostic");
  const Hamiltonian& h = prob.hamiltonian;
  const auto x = g.coordinates();
  const double dt = prob.horizon / prob.n_t;
  UniquenessEnergy e;
  e.normalized = h.convexity.has_value();
  e.convexity_constant = h.convexity.value_or(1.0);
  const int n = prob.n_t;
  auto weight = [&](int k) { return (k == 0 || k == n) ? 0.5 * dt : dt; };
  for (int k = 0; k <= n; ++k) {
    const RealArray &m1 = a.fp.m[k].values, &m2 = b.fp.m[k].values;
    const RealArray &u1 = a.hjb.u[k].values, &u2 = b.hjb.u[k].values;
    const VectorField &p1 = a.hjb.du[k], &p2 = b.hjb.du[k];
    const RealArray dm = m1 - m2;
    e.coupling_term +=
        weight(k) * pairing(g, prob.coupling.evaluate(a.fp.m[k]).values - prob.coupling.evaluate(b.fp.m[k]).values, dm);
    const VectorField g1 = h.grad_p(x, u1, p1), g2 = h.grad_p(x, u2, p2);
    RealArray br1 = h.eval(x, u1, p2) - h.eval(x, u1, p1);
    RealArray br2 = h.eval(x, u2, p1) - h.eval(x, u2, p2);
    RealArray gap2 = RealArray::Zero(g.size());
    for (int ax = 0; ax < g.dim(); ++ax) {
      br1 -= g1[ax] * (p2[ax] - p1[ax]);
      br2 -= g2[ax] * (p1[ax] - p2[ax]);
      gap2 += (p1[ax] - p2[ax]).square();
    }
    e.bregman_term += weight(k) * (pairing(g, m1, br1) + pairing(g, m2, br2));
    e.convexity_term += weight(k) * pairing(g, m1 + m2, gap2) / (2.0 * e.convexity_constant);
  }
  e.boundary_term = pairing(g,
                            prob.terminal.evaluate(a.fp.m[n]).values - prob.terminal.evaluate(b.fp.m[n]).values,
                            a.fp.m[n].values - b.fp.m[n].values);
  e.initial_term = pairing(g, a.hjb.u[0].values - b.hjb.u[0].values, a.fp.m[0].values - b.fp.m[0].values);
  e.identity_residual = e.boundary_term + e.coupling_term + e.bregman_term - e.initial_term;
  return e;
}

}  // namespace lmfg
