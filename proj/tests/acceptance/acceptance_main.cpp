// Runs the full acceptance suite and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include "wasep/verify.hpp"

#include <iostream>

int main() {
  wasep::VerifyConfig config;
  config.threads = 4;
  int failed = 0;
  for (const wasep::CriterionResult& r : wasep::run_verification(config)) {
    std::cout << wasep::format_result(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (wasep::kCriterionCount - failed) << "/" << wasep::kCriterionCount << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
