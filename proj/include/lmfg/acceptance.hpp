#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lmfg {

/// Outcome of one acceptance criterion; tolerances live in the criterion code.
struct CriterionResult {
  int id = 0;
  std::string name;
  /// Short statement of the property being checked.
  std::string property;
  bool passed = false;
  double seconds = 0.0;
  std::vector<std::pair<std::string, double>> measured;
  std::string target;
  std::string note;  // error text when the criterion threw
};

struct AcceptanceOptions {
  unsigned seed = 1;
};

struct Criterion {
  int id;
  std::string name;
  CriterionResult (*run)(const AcceptanceOptions&);
};

const std::vector<Criterion>& acceptance_criteria();

/// Runs one criterion with timing; exceptions become a failed result.
CriterionResult run_criterion(const Criterion& c, const AcceptanceOptions& opt);
/// All criteria, or only the listed ids.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, const std::vector<int>& only = {});

/// One line: "[PASS] 03 heat-kernel-closed-forms  key=value ...  (target)  1.2 s".
std::string format_line(const CriterionResult& r);

}  // namespace lmfg
