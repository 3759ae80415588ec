/// Command-line front end: one subcommand per pipeline.
///
/// Exit codes: 0 all hard checks passed, 1 a hard check failed,
/// 2 configuration or runtime error, CLI11's own codes for usage errors.

#include "lmfg/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<double> parse_schedule(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  if (out.empty()) throw lmfg::cli::UsageError("--epsilon-schedule needs at least one value");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lmfg::cli;
  CLI::App app{"Spectral solvers for fractional mean field games"};
  app.require_subcommand(1);

  std::string config_path, out, seed_profile = "uniform", schedule, a, b, method = "exact-lp";
  std::int64_t paths = 0;
  std::uint64_t seed = 0;
  std::vector<int> only;

  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name);
    if (name != "metric-d0") sub->add_option("--config,-c", config_path, "YAML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out, "output directory (overrides the config)");
    if (name == "solve-mfg") {
      sub->add_option("--seed-profile", seed_profile, "initial flow: uniform | bump | m0");
      sub->add_option("--epsilon-schedule", schedule, "comma-separated mollification widths for local couplings");
    }
    if (name == "simulate-sde") sub->add_option("--paths", paths, "number of Monte Carlo paths");
    if (name == "simulate-sde" || name == "check-all") sub->add_option("--seed", seed, "random seed");
    if (name == "metric-d0") {
      sub->add_option("--a", a, "first measure (.lmfg grid file or .csv point list)")->required()->check(CLI::ExistingFile);
      sub->add_option("--b", b, "second measure")->required()->check(CLI::ExistingFile);
      sub->add_option("--method", method, "exact-lp | grid-lp | sliced | entropic");
    }
    if (name == "check-all") sub->add_option("--only", only, "criterion ids to run");
  }

  CLI11_PARSE(app, argc, argv);
  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  try {
    CommandOptions opt;
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
      opt.config_path = config_path;
    }
    const auto given = [&](const char* flag) {
      const CLI::Option* o = sub->get_option_no_throw(flag);
      return o != nullptr && o->count() > 0;
    };
    if (given("--out")) opt.out = out;
    opt.seed_profile = seed_profile;
    if (!schedule.empty()) opt.epsilon_schedule = parse_schedule(schedule);
    if (given("--paths")) opt.paths = paths;
    if (given("--seed")) opt.seed = seed;
    opt.measure_a = a;
    opt.measure_b = b;
    opt.method = method;
    opt.only = only;

    const RunReport report = dispatch(command, cfg, opt);
    for (const auto& c : report.checks)
      std::cout << '[' << to_string(c.status) << (c.hard ? "" : "*") << "] " << c.name << ": " << c.measured.dump()
                << (c.target.empty() ? "" : "  (target " + c.target + ")") << '\n';
    std::cout << command << ": " << (report.hard_failure() ? "FAILED" : "ok") << " in "
              << report.timing.value("total", 0.0) << " s\n";
    return report.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error in " << config_path << ":\n";
    for (const auto& msg : e.errors()) std::cerr << "  " << msg << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
