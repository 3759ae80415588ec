#pragma once

#include "lmfg/levy.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace lmfg {

/// splitmix64 stream; used to derive independent per-chunk seeds.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next();
};

/// Standard symmetric stable variate with E e^{i xi X} = e^{-|xi|^sigma}
/// (Chambers-Mallows-Stuck); sigma in (0, 2].
double standard_stable(double sigma, std::mt19937_64& rng);
/// Positive (alpha < 1) stable variate with Laplace transform e^{-lambda^alpha} (Kanter).
double positive_stable(double alpha, std::mt19937_64& rng);

/// n i.i.d. increments over dt of the symmetric sigma-stable process whose
/// symbol is -|xi|^sigma. sigma = 2 is accepted as the Gaussian engine check.
std::vector<double> sample_stable_increment(double sigma, double dt, Index n, std::uint64_t seed);

struct Simulability {
  bool ok = false;
  std::string reason;
};
Simulability simulable(const LevyMeasureSpec& spec, int dim);

/// Draws increments L_{t+dt} - L_t of the Levy process in dimension `dim`.
/// Stable parts are exact; tempered or truncated 1D parts use thinning from
/// the stable envelope for |z| > eps plus a Gaussian for the small jumps.
class IncrementSampler {
public:
  IncrementSampler(const LevyMeasureSpec& spec, int dim, double dt, double small_jump_eps = 0.05);
  void draw(std::mt19937_64& rng, double* out) const;
  int dim() const noexcept { return dim_; }
  /// P(candidate accepted) predicted from the measure, per thinned component.
  std::vector<double> analytic_acceptance() const;

  struct Counters {
    long long candidates = 0;
    long long accepted = 0;
  };
  /// draw() variant that also counts thinning candidates.
  void draw(std::mt19937_64& rng, double* out, Counters& counters) const;

  struct Component {
    enum Kind { stable_axis, stable_isotropic, thinned } kind;
    int axis = 0;
    double scale = 1.0;  // dt^{1/sigma} for stable parts
    double sigma = 1.5;
    // thinned: density C |z|^{-1-Y} tilt(z) with tilt = e^{-G z} / e^{-M |z|}, cut at `cutoff`
    double C = 1.0, G = 0.0, M = 0.0, Y = 1.5, cutoff = 0.0;
    double eps = 0.05;
    double candidate_mean = 0.0;  // envelope rate * dt
    double shift = 0.0;           // compensator drift * dt
    double small_sd = 0.0;        // sqrt(small-jump variance * dt)
    double acceptance = 0.0;      // analytic
  };

private:
  int dim_;
  std::vector<Component> parts_;
};

struct SDEConfig {
  Index n_paths = 10000;
  int n_t = 50;
  double horizon = 1.0;
  std::uint64_t seed = 1;
  bool wrap = true;
  int threads = 0;  // 0: LMFG_THREADS
  double small_jump_eps = 0.05;
};

struct PathEnsemble {
  Index n_paths = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  int n_t = 0;
  /// positions[k] is n_paths x dim at time node k.
  std::vector<Eigen::MatrixXd> positions;
  long long wrap_events = 0;
  /// Fraction of paths wrapped at least once.
  double wrap_rate = 0.0;
  bool domain_warning = false;
  double acceptance_rate = 1.0;
  double analytic_acceptance = 1.0;
};

/// Euler splitting X_{k+1} = X_k + b(t_k, X_k) dt + dL with multilinear,
/// periodic drift interpolation from the grid; m0 sampled by cell then
/// uniformly inside the cell. `drift` is empty or has n_t + 1 nodes.
PathEnsemble simulate_controlled_sde(const LevyMeasureSpec& spec, const Grid& grid, const std::vector<VectorField>& drift,
                                     const ProbabilityField& m0, const SDEConfig& cfg);

/// Histogram on the grid cells (nearest node, periodic), normalized to mass 1.
ProbabilityField empirical_law(const PathEnsemble& ens, int node, const Grid& grid);

}  // namespace lmfg
