#pragma once

// Dynamical cost of space-time paths. Each time slice of the elliptic problem
// d_t pi = (1/2) pi'' - (chi(pi) (E/2 + H'))', H(+-1) = 0, is integrated once in u:
// chi H' = j - c with j = pi'/2 - (E/2) chi(pi) - int_{-1}^u d_t pi, and c fixed by H(1) = 0.

#include "wasep/core.hpp"

#include <limits>
#include <optional>

namespace wasep {

constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct CostBreakdown {
  double I_T = 0.0;
  double Q = 0.0;
  Mat H;                 // one column per time; empty when I_T is infinite
  Vec slice_cost;        // (1/2) <H', chi H'> per time
  std::optional<double> K_norm_sq;
  std::optional<double> delta_S;  // S_E(pi_T) - S_E(pi_0), filled with K_norm_sq
  double initial_mismatch = 0.0;
  bool degenerate = false;
};

/// (1/2) int dt int (pi')^2 / chi(pi); infinite when chi vanishes where pi' does not.
double energy_Q(const SpacetimePath& path);

/// I_T(path | gamma). Infinite when |pi_0 - gamma| > 1e-6 or the mobility degenerates.
/// With `decompose`, also K = Gamma - H and ||K||^2, Gamma = logit pi - Phi(pi).
CostBreakdown rate_I_T(const SpacetimePath& path, const DensityProfile& gamma, const Params& params,
                       bool decompose = false);

/// The variational functional J_H(pi) for a test function H vanishing at u = +-1,
/// given as one column per time of `path`.
double variational_J_H(const SpacetimePath& path, const DensityProfile& gamma, const Mat& H, const Params& params);

/// |<Gamma', chi Gamma'> - <rho' - E chi, Gamma'>| with Gamma = logit rho - Phi(rho).
double hamilton_jacobi_residual(const DensityProfile& rho, const Params& params);

struct ShiftIdentity {
  double lhs = 0.0;  // S_E(pi_T) - S_E(pi_0)
  double rhs = 0.0;  // int dt <Gamma_t, d_t pi_t>
  double error() const { return std::abs(lhs - rhs); }
};

ShiftIdentity shift_identity_check(const SpacetimePath& path, const Params& params);

/// Constant C with I_1(straight path | rho_bar) <= C ||target - rho_bar||_{C^1}^2:
/// C = (5/2 + |E| (1 + |delta|_inf) / 2)^2 / chi_min, chi_min over both endpoints.
double joining_cost_constant(const DensityProfile& rho_bar, const DensityProfile& target, const Params& params);

/// sup |f| + sup |f'| with fourth-order differences.
double c1_norm(const Vec& f, const Grid& grid);

}  // namespace wasep
