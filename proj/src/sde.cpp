#include "lmfg/sde.hpp"

#include "lmfg/parallel.hpp"
#include "lmfg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmfg {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr Index kChunk = 4096;

double uniform_open(std::mt19937_64& rng) {
  // (0, 1), never exactly 0
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Integral of z^power g(z) over [a, b] (0 < a < b, b may be large) in the
/// variable s = log z, which tames both endpoints.
template <class Fn>
double log_scale_integral(Fn&& g, double power, double a, double b) {
  const double lo = std::log(a), hi = std::log(b);
  return quad::composite([&](double s) {
    const double z = std::exp(s);
    return std::pow(z, power + 1.0) * g(z);
  }, lo, hi, 0.05, 16);
}

IncrementSampler::Component thinned(double C, double G, double M, double Y, double cutoff, double dt, double eps) {
  IncrementSampler::Component c{IncrementSampler::Component::thinned};
  c.C = C;
  c.G = G;
  c.M = M;
  c.Y = Y;
  c.cutoff = cutoff;
  c.eps = std::min(eps, 0.5 * cutoff);
  const double e = c.eps;
  const double top = std::isfinite(cutoff) ? cutoff : e * std::exp(60.0 / Y);
  auto both = [&](double z) { return (z < cutoff ? 1.0 : 0.0) * (std::exp(-G * z) + std::exp(-M * z)); };
  auto odd = [&](double z) { return (z < cutoff ? 1.0 : 0.0) * (std::exp(-G * z) - std::exp(-M * z)); };
  const double envelope_rate = 2.0 * C * std::pow(e, -Y) / Y;
  const double big_rate = C * log_scale_integral(both, -1.0 - Y, e, top);
  // small jumps: variance int_0^eps z^2 nu, computed from eps*1e-12 (the rest is negligible)
  const double small_var = C * log_scale_integral(both, 1.0 - Y, e * 1e-12, e);
  const double comp = -C * log_scale_integral(odd, -Y, e, std::min(1.0, top));
  c.candidate_mean = envelope_rate * dt;
  c.acceptance = big_rate / envelope_rate;
  c.shift = comp * dt;
  c.small_sd = std::sqrt(small_var * dt);
  return c;
}

}  // namespace

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double standard_stable(double sigma, std::mt19937_64& rng) {
  const double v = M_PI * (uniform_open(rng) - 0.5);
  const double w = -std::log(uniform_open(rng));
  if (sigma == 1.0) return std::tan(v);
  return std::sin(sigma * v) / std::pow(std::cos(v), 1.0 / sigma) *
         std::pow(std::cos((1.0 - sigma) * v) / w, (1.0 - sigma) / sigma);
}

double positive_stable(double alpha, std::mt19937_64& rng) {
  const double u = M_PI * uniform_open(rng);
  const double w = -std::log(uniform_open(rng));
  return std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
}

std::vector<double> sample_stable_increment(double sigma, double dt, Index n, std::uint64_t seed) {
  if (!(sigma > 1.0 && sigma <= 2.0)) throw ContractViolation("stable increment: sigma must lie in (1, 2]");
  if (!(dt > 0.0)) throw ContractViolation("stable increment: dt must be positive");
  if (n < 0) throw ContractViolation("stable increment: negative sample count");
  std::mt19937_64 rng(SplitMix64{seed}.next());
  const double scale = std::pow(dt, 1.0 / sigma);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = scale * standard_stable(sigma, rng);
  return out;
}

Simulability simulable(const LevyMeasureSpec& spec, int dim) {
  if (spec.is_engine()) return {false, "engine symbols have no jump measure to simulate"};
  auto one = [&](const Levy1D& m) -> Simulability {
    return std::visit(overloaded{
                          [](const GeneralDensity&) { return Simulability{false, "general densities have no exact sampler"}; },
                          [](const auto&) { return Simulability{true, ""}; },
                      },
                      m);
  };
  return std::visit(overloaded{
                        [&](const IsotropicStable&) { return Simulability{true, ""}; },
                        [&](const TemperedCGMY&) {
                          return dim == 1 ? Simulability{true, ""} : Simulability{false, "CGMY is one-dimensional"};
                        },
                        [&](const TruncatedStable&) {
                          return dim == 1 ? Simulability{true, ""}
                                          : Simulability{false, "truncated stable is simulated in 1D only"};
                        },
                        [&](const GeneralDensity&) {
                          return Simulability{false, "general densities have no exact sampler"};
                        },
                        [&](const AnisotropicSum& s) {
                          for (const auto& c : s.components) {
                            auto r = one(c.measure);
                            if (!r.ok) return r;
                            if (c.axis >= dim) return Simulability{false, "component axis outside the dimension"};
                          }
                          return Simulability{true, ""};
                        },
                    },
                    spec.variant());
}

IncrementSampler::IncrementSampler(const LevyMeasureSpec& spec, int dim, double dt, double eps) : dim_(dim) {
  const Simulability s = simulable(spec, dim);
  if (!s.ok) throw ContractViolation("sde: not simulable: " + s.reason);
  if (!(dt > 0.0)) throw ContractViolation("sde: dt must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ContractViolation("sde: small-jump threshold must lie in (0, 1)");
  auto add_1d = [&](const Levy1D& m, int axis) {
    std::visit(overloaded{
                   [&](const IsotropicStable& st) {
                     Component c{Component::stable_axis};
                     c.axis = axis;
                     c.sigma = st.sigma;
                     c.scale = std::pow(dt, 1.0 / st.sigma);
                     parts_.push_back(c);
                   },
                   [&](const TemperedCGMY& cg) {
                     Component c = thinned(cg.C, cg.G, cg.M, cg.Y, std::numeric_limits<double>::infinity(), dt, eps);
                     c.axis = axis;
                     parts_.push_back(c);
                   },
                   [&](const TruncatedStable& tr) {
                     Component c = thinned(stable_constant(1, tr.sigma), 0.0, 0.0, tr.sigma, tr.cutoff, dt, eps);
                     c.axis = axis;
                     parts_.push_back(c);
                   },
                   [&](const GeneralDensity&) {},
               },
               m);
  };
  std::visit(overloaded{
                 [&](const IsotropicStable& st) {
                   if (dim == 1) {
                     add_1d(st, 0);
                   } else {
                     Component c{Component::stable_isotropic};
                     c.sigma = st.sigma;
                     c.scale = std::pow(dt, 1.0 / st.sigma);
                     parts_.push_back(c);
                   }
                 },
                 [&](const AnisotropicSum& sum) {
                   for (const auto& comp : sum.components) add_1d(comp.measure, comp.axis);
                 },
                 [&](const auto& other) { add_1d(Levy1D(other), 0); },
             },
             spec.variant());
}

std::vector<double> IncrementSampler::analytic_acceptance() const {
  std::vector<double> out;
  for (const auto& c : parts_)
    if (c.kind == Component::thinned) out.push_back(c.acceptance);
  return out;
}

void IncrementSampler::draw(std::mt19937_64& rng, double* out) const {
  Counters ignore;
  draw(rng, out, ignore);
}

void IncrementSampler::draw(std::mt19937_64& rng, double* out, Counters& counters) const {
  for (int a = 0; a < dim_; ++a) out[a] = 0.0;
  for (const auto& c : parts_) {
    switch (c.kind) {
      case Component::stable_axis:
        out[c.axis] += c.scale * standard_stable(c.sigma, rng);
        break;
      case Component::stable_isotropic: {
        // sub-Gaussian representation: sqrt(A) N(0, 2I), A positive (sigma/2)-stable
        const double amp = c.scale * std::sqrt(positive_stable(0.5 * c.sigma, rng));
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0));
        for (int a = 0; a < dim_; ++a) out[a] += amp * normal(rng);
        break;
      }
      case Component::thinned: {
        std::poisson_distribution<long> count(c.candidate_mean);
        const long n = count(rng);
        double jumps = 0.0;
        for (long j = 0; j < n; ++j) {
          const bool positive = uniform_open(rng) < 0.5;
          const double r = c.eps * std::pow(uniform_open(rng), -1.0 / c.Y);
          const double keep = r < c.cutoff ? std::exp(-(positive ? c.G : c.M) * r) : 0.0;
          if (uniform_open(rng) < keep) {
            jumps += positive ? r : -r;
            ++counters.accepted;
          }
        }
        counters.candidates += n;
        std::normal_distribution<double> normal(c.shift, c.small_sd);
        out[c.axis] += jumps + (c.small_sd > 0.0 ? normal(rng) : c.shift);
        break;
      }
    }
  }
}

namespace {

/// Multilinear periodic interpolation of one drift component.
double interpolate(const Grid& g, const RealArray& values, const double* x) {
  const int d = g.dim();
  int base[8];
  double frac[8];
  for (int a = 0; a < d; ++a) {
    const double s = (x[a] + g.half_extent(a)) / g.spacing(a);
    const double fl = std::floor(s);
    frac[a] = s - fl;
    const int n = g.points(a);
    base[a] = static_cast<int>(((static_cast<long long>(fl) % n) + n) % n);
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    Index flat = 0;
    for (int a = 0; a < d; ++a) {
      const int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      flat += static_cast<Index>((base[a] + bit) % g.points(a)) * g.stride(a);
    }
    acc += w * values[flat];
  }
  return acc;
}

}  // namespace

PathEnsemble simulate_controlled_sde(const LevyMeasureSpec& spec, const Grid& grid, const std::vector<VectorField>& drift,
                                     const ProbabilityField& m0, const SDEConfig& cfg) {
  require_same_grid(m0.grid(), grid, "simulate_controlled_sde");
  const int d = grid.dim();
  if (d > 3) throw ContractViolation("sde: at most three dimensions");
  if (cfg.n_paths < 0 || cfg.n_t < 1 || !(cfg.horizon > 0.0)) throw ContractViolation("sde: invalid configuration");
  if (!drift.empty()) {
    if (static_cast<int>(drift.size()) != cfg.n_t + 1) throw ContractViolation("sde: drift needs n_t + 1 time nodes");
    for (const auto& b : drift)
      if (static_cast<int>(b.size()) != d) throw ContractViolation("sde: drift needs one component per axis");
  }
  const double dt = cfg.horizon / cfg.n_t;
  const IncrementSampler sampler(spec, d, dt, cfg.small_jump_eps);

  PathEnsemble ens;
  ens.n_paths = cfg.n_paths;
  ens.dim = d;
  ens.seed = cfg.seed;
  ens.horizon = cfg.horizon;
  ens.n_t = cfg.n_t;
  ens.positions.assign(cfg.n_t + 1, Eigen::MatrixXd(cfg.n_paths, d));
  if (cfg.n_paths == 0) return ens;

  // cumulative cell distribution of m0
  std::vector<double> cdf(static_cast<std::size_t>(grid.size()));
  double run = 0.0;
  for (Index i = 0; i < grid.size(); ++i) cdf[i] = (run += std::max(0.0, m0.values()[i]));
  for (auto& c : cdf) c /= run;

  const int chunks = static_cast<int>((cfg.n_paths + kChunk - 1) / kChunk);
  std::vector<std::uint64_t> seeds(chunks);
  SplitMix64 master{cfg.seed};
  for (auto& s : seeds) s = master.next();
  std::vector<long long> wraps(chunks, 0), wrapped_paths(chunks, 0);
  std::vector<IncrementSampler::Counters> counters(chunks);

  parallel_chunks(chunks, [&](int c) {
    std::mt19937_64 rng(seeds[c]);
    const Index first = c * kChunk, last = std::min<Index>(cfg.n_paths, first + kChunk);
    double x[3], inc[3];
    for (Index p = first; p < last; ++p) {
      const double u = uniform_open(rng);
      const Index cell = std::min<Index>(grid.size() - 1, std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      const auto node = grid.point(cell);
      for (int a = 0; a < d; ++a) {
        x[a] = node[a] + (uniform_open(rng) - 0.5) * grid.spacing(a);
        ens.positions[0](p, a) = x[a];
      }
      bool wrapped = false;
      for (int k = 0; k < cfg.n_t; ++k) {
        sampler.draw(rng, inc, counters[c]);
        double bx[3] = {0.0, 0.0, 0.0};
        if (!drift.empty())
          for (int a = 0; a < d; ++a) bx[a] = interpolate(grid, drift[k][a], x);
        for (int a = 0; a < d; ++a) {
          x[a] += bx[a] * dt + inc[a];
          if (cfg.wrap) {
            const double L = grid.half_extent(a);
            if (x[a] < -L || x[a] >= L) {
              x[a] -= 2.0 * L * std::floor((x[a] + L) / (2.0 * L));
              if (x[a] >= L) x[a] -= 2.0 * L;  // round-off guard
              ++wraps[c];
              wrapped = true;
            }
          }
          ens.positions[k + 1](p, a) = x[a];
        }
      }
      wrapped_paths[c] += wrapped;
    }
  }, cfg.threads);

  long long wrapped_total = 0, candidates = 0, accepted = 0;
  for (int c = 0; c < chunks; ++c) {
    ens.wrap_events += wraps[c];
    wrapped_total += wrapped_paths[c];
    candidates += counters[c].candidates;
    accepted += counters[c].accepted;
  }
  ens.wrap_rate = static_cast<double>(wrapped_total) / cfg.n_paths;
  ens.domain_warning = ens.wrap_rate > 0.01;
  const auto analytic = sampler.analytic_acceptance();
  if (!analytic.empty()) {
    ens.acceptance_rate = candidates ? static_cast<double>(accepted) / candidates : 1.0;
    ens.analytic_acceptance = analytic.front();
  }
  return ens;
}

ProbabilityField empirical_law(const PathEnsemble& ens, int node, const Grid& grid) {
  if (node < 0 || node >= static_cast<int>(ens.positions.size())) throw ContractViolation("empirical_law: bad time node");
  if (ens.dim != grid.dim()) throw ContractViolation("empirical_law: dimension mismatch");
  if (ens.n_paths == 0) throw ContractViolation("empirical_law: empty ensemble");
  RealArray counts = RealArray::Zero(grid.size());
  const Eigen::MatrixXd& X = ens.positions[node];
  for (Index p = 0; p < ens.n_paths; ++p) {
    Index flat = 0;
    for (int a = 0; a < grid.dim(); ++a) {
      const int n = grid.points(a);
      const long long j = std::llround((X(p, a) + grid.half_extent(a)) / grid.spacing(a));
      flat += static_cast<Index>(((j % n) + n) % n) * grid.stride(a);
    }
    counts[flat] += 1.0;
  }
  return ProbabilityField(Field(grid, counts / (static_cast<double>(ens.n_paths) * grid.cell_volume()), node * ens.horizon / ens.n_t));
}

}  // namespace lmfg
