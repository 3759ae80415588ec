/// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
#include <algorithm>
/// Optional arguments select criteria by id.

#include "lmfg/acceptance.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : lmfg::acceptance_criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto r = lmfg::run_criterion(c, {});
    std::cout << lmfg::format_line(r) << std::endl;
    failed += !r.passed;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : std::string("acceptance: all passed"))
            << std::endl;
  return failed ? 1 : 0;
}
