#pragma once

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmfg::cli {

/// Every schema and range violation found in a config, not just the first.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
  std::vector<std::string> errors_;
};

/// One-dimensional jump measure: stable {sigma}, cgmy {C, G, M, Y}, truncated {sigma, cutoff}.
struct MeasureConfig {
  std::string variant = "stable";
  double sigma = 1.5;
  double C = 1.0, G = 1.0, M = 1.0, Y = 1.5;
  double cutoff = 1.0;
  int axis = 0;  // only inside a sum
};

/// A single measure, or variant "sum" with per-axis components.
struct SpecConfig {
  MeasureConfig measure;
  std::vector<MeasureConfig> components;
  bool is_sum = false;
};

struct GridConfig {
  int dim = 1;
  std::vector<double> half_extent{4.0};
  std::vector<int> points{256};
};

struct HamiltonianConfig {
  std::string preset = "quadratic";
  double parameter = 1.0;
};

/// none | nonlocal {kernel_width, weight} | local {weight, exponent}: f(m) = weight m^exponent.
struct CouplingConfig {
  std::string type = "none";
  double kernel_width = 0.3;
  double weight = 1.0;
  double exponent = 1.0;
};

/// gaussian-bump {center, width} | uniform | two-bumps {centers, width}.
struct M0Config {
  std::string preset = "gaussian-bump";
  std::vector<double> center{0.0};
  std::vector<std::vector<double>> centers{{-1.0}, {1.0}};
  double width = 0.5;
};

struct ProblemConfig {
  SpecConfig spec;
  GridConfig grid;
  double horizon = 1.0;
  HamiltonianConfig hamiltonian;
  CouplingConfig coupling;
  CouplingConfig terminal;
  M0Config m0;
};

struct SolverConfig {
  int n_t = 64;
  double tol_d0 = 1e-4;
  int max_outer = 200;
  double damping = 0.5;
  std::string scheme = "damped-picard";  // or fictitious-play
  std::string metric = "grid-lp";
  std::vector<double> epsilon_schedule{0.4, 0.2, 0.1};
  double picard_tol = 1e-11;
  int picard_max_sweeps = 60;
  double picard_window = 0.25;
  double positivity_tolerance = 1e-6;
  double positivity_hard_limit = 1e-2;
  bool clip = false;
};

struct DiagnosticsConfig {
  /// Checks to run; empty means every check that applies to the command.
  std::vector<std::string> checks;
};

struct SimulationConfig {
  std::int64_t paths = 10000;
  double small_jump_eps = 0.05;
  bool wrap = true;
};

struct RunConfig {
  ProblemConfig problem;
  SolverConfig solver;
  DiagnosticsConfig diagnostics;
  SimulationConfig sde;
  std::string output = "out";
  std::uint64_t seed = 1;
};

/// Names accepted in `diagnostics.checks`.
const std::vector<std::string>& known_checks();

/// Parses the YAML table format; throws ConfigError listing every violation.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical tree of a config (all fields, defaults filled).
nlohmann::json to_json(const RunConfig& cfg);
/// Canonical YAML echo; parse_config(echo(c)) reproduces c exactly.
std::string echo(const RunConfig& cfg);

}  // namespace lmfg::cli
