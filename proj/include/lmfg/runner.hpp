#pragma once

#include "lmfg/config.hpp"
#include "lmfg/mfg.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lmfg::cli {

/// Unknown command or malformed command-line arguments.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A pipeline failure, with the module, operation and config path prefixed.
class RunError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class CheckStatus { pass, fail, info };
std::string to_string(CheckStatus s);

struct CheckRecord {
  std::string name;
  /// Plain statement of the property being checked.
  std::string property;
  nlohmann::json measured;
  std::string target;
  CheckStatus status = CheckStatus::info;
  /// Hard checks decide the exit status; the rest are informational.
  bool hard = false;
};

struct RunReport {
  std::string command;
  std::vector<CheckRecord> checks;
  nlohmann::json data = nlohmann::json::object();
  nlohmann::json timing = nlohmann::json::object();
  std::vector<std::string> artifacts;
  nlohmann::json config;

  bool hard_failure() const;
  /// 0 iff no hard check failed.
  int exit_code() const { return hard_failure() ? 1 : 0; }
  nlohmann::json to_json() const;
};

struct CommandOptions {
  /// Config file name, quoted in error messages.
  std::string config_path = "<defaults>";
  /// Overrides `output` from the config.
  std::optional<std::string> out;
  /// solve-mfg: uniform | bump | m0.
  std::string seed_profile = "uniform";
  std::optional<std::vector<double>> epsilon_schedule;
  std::optional<std::int64_t> paths;
  std::optional<std::uint64_t> seed;
  /// metric-d0 inputs: binary grid files or CSV point lists "x1,...,xd,weight".
  std::string measure_a, measure_b;
  std::string method = "exact-lp";
  /// check-all: criterion ids to run (empty: all).
  std::vector<int> only;
  bool write_artifacts = true;
};

const std::vector<std::string>& commands();

/// Runs one pipeline and returns its report; writes artifacts and report.json
/// into the output directory unless disabled.
RunReport dispatch(const std::string& command, const RunConfig& cfg, const CommandOptions& opt = {});

// Builders from config sections.
LevyMeasureSpec build_spec(const SpecConfig& s);
Grid build_grid(const GridConfig& g);
ProbabilityField build_m0(const M0Config& m, const Grid& grid);
Coupling build_coupling(const CouplingConfig& c, const Grid& grid);
MFGProblem build_problem(const RunConfig& cfg);

void write_report(const RunReport& report, const std::filesystem::path& path);

}  // namespace lmfg::cli
