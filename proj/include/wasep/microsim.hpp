#pragma once

// Boundary-driven WASEP on sites x = -N+1..N-1 (index x + N - 1), generator
// already sped up by N^2. Bulk jumps right at (N^2/2) e^{E/2N}, left at
// (N^2/2) e^{-E/2N}; reservoirs at x = -+(N-1) with rates (N^2/2) c_-+.

#include "wasep/core.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <random>
#include <vector>

namespace wasep {

struct LatticeConfig {
  int N;
  std::vector<std::uint8_t> occupation;  // 2N - 1 sites

  explicit LatticeConfig(int N);
  LatticeConfig(int N, std::vector<std::uint8_t> occupation);
  static LatticeConfig from_state(int N, std::uint32_t bits);  // bit i is site index i

  int sites() const { return 2 * N - 1; }
  std::uint32_t state() const;
  int particles() const;
};

enum class MoveKind { hop_right, hop_left, create, annihilate };

struct Transition {
  MoveKind kind;
  int site;  // hopping particle's origin, or the reservoir site
  double rate;
};

std::vector<Transition> jump_rates(const LatticeConfig& config, const Params& params, int N);

/// Configuration after applying `move`.
LatticeConfig apply(const LatticeConfig& config, const Transition& move);

/// Product measure with chemical potential phi_-(N-x)/2N + phi_+(N+x)/2N at site x.
double product_measure(const LatticeConfig& config, const Params& params);

struct ExactStationary {
  int N;
  Vec mu;  // indexed by occupation bitmask
};

/// Generator on {0,1}^{2N-1} indexed by occupation bitmask; rows sum to zero.
Eigen::SparseMatrix<double> generator_matrix(const Params& params, int N);

/// Solves mu L = 0, sum mu = 1 by sparse LU. Throws dimension_guard for N > 7.
ExactStationary exact_stationary(const Params& params, int N);

/// Largest |mu(a) r(a->b) - mu(b) r(b->a)| over all enabled transitions.
double detailed_balance_defect(const ExactStationary& exact, const Params& params);

/// Total variation distance from the product of one-site marginals of mu.
double product_fit_distance(const ExactStationary& exact);

/// One-site marginals of mu.
Vec site_marginals(const ExactStationary& exact);

struct EmpiricalDensity {
  double block_width;   // 1/N
  Vec centers;          // x/N
  Vec values;           // occupation of each block
  double mass() const { return block_width * values.sum(); }
};

EmpiricalDensity empirical_density(const LatticeConfig& config, int N);

struct SimParams {
  Params params;
  int N;
  double horizon;               // diffusive time units
  std::uint64_t seed = 0x5eed;
  int n_samples = 1;
  double burn_in = 10.0;        // excluded from time averages
  std::vector<double> observe{};  // times at which the configuration is recorded
};

struct TrajectorySample {
  std::uint64_t seed = 0;
  std::vector<double> observe;
  std::vector<LatticeConfig> snapshots;
  Vec time_average;  // per site over [burn_in, horizon]
  std::uint64_t events = 0;
};

/// Uniform on [0, 1) from the top 53 bits of one draw.
double unit_uniform(std::mt19937_64& gen);

/// Seed of replica k derived from the master seed: splitmix64(master + k).
std::uint64_t replica_seed(std::uint64_t master, int k);

/// Exact trajectory by uniformization, started from the empty lattice.
TrajectorySample ctmc_simulate(const SimParams& sim, std::uint64_t seed);

struct ProfileEstimate {
  Vec u;          // x/N
  Vec mean;       // replica mean of the time-averaged occupation
  Vec std_error;  // replica standard deviation / sqrt(n_samples)
  std::uint64_t events = 0;
};

/// n_samples independent replicas, `threads` at a time.
ProfileEstimate stationary_estimate(const SimParams& sim, int threads = 1);

}  // namespace wasep
