#pragma once

// Acceptance suite shared by the `verify` command and the acceptance test.
// Each criterion returns its measured quantities alongside the verdict.

#include "wasep/core.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace wasep {

struct VerifyConfig {
  double rho_minus = 0.2;
  double rho_plus = 0.8;
  double E = -2.0;              // field for single-field criteria (5, 6, 7, 9)
  Index M = 401;
  std::uint64_t seed = 0x5eed;
  int threads = 1;
  std::vector<int> criteria;    // empty runs all
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  std::vector<std::pair<std::string, double>> values;
  std::string note;
};

constexpr int kCriterionCount = 11;

CriterionResult run_criterion(int id, const VerifyConfig& config);

std::vector<CriterionResult> run_verification(const VerifyConfig& config);

/// "PASS|FAIL <id> <title>: key=value ... (<seconds> s)".
std::string format_result(const CriterionResult& result);

/// Smooth random profile: the affine interpolant of its end values plus three sine
/// modes of total amplitude below 0.19 damped by (1 - u^2), clipped to [0.05, 0.95].
/// With `pinned` the end values are rho_+-; otherwise they are uniform on [0.25, 0.75].
std::function<double(double)> random_smooth_function(std::mt19937_64& gen, double rho_minus, double rho_plus,
                                                     bool pinned);

DensityProfile random_smooth_profile(const Grid& grid, std::mt19937_64& gen, double rho_minus, double rho_plus,
                                     bool pinned);


}  // namespace wasep
