#include "lmfg/hamiltonian.hpp"

#include <random>

namespace lmfg {
namespace {

RealArray squared_norm(const VectorField& p) {
  RealArray s = RealArray::Zero(p.empty() ? 0 : p[0].size());
  for (const auto& c : p) s += c.square();
  return s;
}

}  // namespace

Hamiltonian quadratic_hamiltonian(double kappa) {
  if (!(kappa > 0.0)) throw ContractViolation("quadratic hamiltonian: kappa must be positive");
  Hamiltonian h;
  h.preset = kappa == 1.0 ? "quadratic" : "stiff";
  h.eval = [kappa](const std::vector<RealArray>&, const RealArray&, const VectorField& p) -> RealArray {
    return 0.5 * kappa * squared_norm(p);
  };
  h.grad_p = [kappa](const std::vector<RealArray>&, const RealArray&, const VectorField& p) {
    VectorField g;
    for (const auto& c : p) g.push_back(kappa * c);
    return g;
  };
  h.convexity = std::max(kappa, 1.0 / kappa);
  return h;
}

Hamiltonian eikonal_hamiltonian() {
  Hamiltonian h;
  h.preset = "eikonal";
  h.eval = [](const std::vector<RealArray>&, const RealArray&, const VectorField& p) -> RealArray {
    return (1.0 + squared_norm(p)).sqrt() - 1.0;
  };
  h.grad_p = [](const std::vector<RealArray>&, const RealArray&, const VectorField& p) {
    const RealArray inv = (1.0 + squared_norm(p)).rsqrt();
    VectorField g;
    for (const auto& c : p) g.push_back(c * inv);
    return g;
  };
  h.global_dp_bound = 1.0;
  return h;
}

Hamiltonian zero_hamiltonian() {
  Hamiltonian h;
  h.preset = "zero";
  h.eval = [](const std::vector<RealArray>&, const RealArray& u, const VectorField&) -> RealArray {
    return RealArray::Zero(u.size());
  };
  h.grad_p = [](const std::vector<RealArray>&, const RealArray& u, const VectorField& p) {
    return VectorField(p.size(), RealArray::Zero(u.size()));
  };
  h.global_dp_bound = 0.0;
  h.depends_on_solution = false;
  return h;
}

Hamiltonian discounted_quadratic_hamiltonian(double lambda) {
  if (!(lambda >= 0.0)) throw ContractViolation("discounted hamiltonian: lambda must be >= 0");
  Hamiltonian h = quadratic_hamiltonian(1.0);
  h.preset = "discounted";
  h.eval = [lambda](const std::vector<RealArray>&, const RealArray& u, const VectorField& p) -> RealArray {
    return 0.5 * squared_norm(p) + lambda * u;
  };
  h.gamma = lambda;
  h.convexity.reset();  // depends on u, outside the convex H(x, p) class
  return h;
}

Hamiltonian hamiltonian_preset(const std::string& name, double parameter) {
  if (name == "quadratic") return quadratic_hamiltonian(1.0);
  if (name == "stiff") return quadratic_hamiltonian(parameter);
  if (name == "eikonal") return eikonal_hamiltonian();
  if (name == "zero") return zero_hamiltonian();
  if (name == "discounted") return discounted_quadratic_hamiltonian(parameter);
  throw ContractViolation("unknown hamiltonian preset '" + name + "'");
}

HamiltonianCheck check_hamiltonian(const Hamiltonian& h, int dim, unsigned seed, int samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  auto draw = [&](Index n) {
    RealArray a(n);
    for (Index i = 0; i < n; ++i) a[i] = unif(rng);
    return a;
  };
  const Index n = samples;
  std::vector<RealArray> x(dim);
  VectorField p(dim);
  for (int a = 0; a < dim; ++a) {
    x[a] = draw(n);
    p[a] = draw(n);
  }
  const RealArray u = draw(n);
  HamiltonianCheck c;
  const VectorField g = h.grad_p(x, u, p);
  const double step = 1e-5;
  for (int a = 0; a < dim; ++a) {
    VectorField pp = p, pm = p;
    pp[a] += step;
    pm[a] -= step;
    const RealArray fd = (h.eval(x, u, pp) - h.eval(x, u, pm)) / (2.0 * step);
    const RealArray rel = (fd - g[a]).abs() / (1.0 + g[a].abs());
    c.gradient_error = std::max(c.gradient_error, rel.maxCoeff());
  }
  const RealArray v = u + draw(n).abs();
  const RealArray gap = h.gamma * (v - u) - (h.eval(x, v, p) - h.eval(x, u, p));
  c.monotonicity_defect = std::max(0.0, gap.maxCoeff());
  c.ok = c.gradient_error <= 1e-6 && c.monotonicity_defect <= 1e-12;
  return c;
}

}  // namespace lmfg
