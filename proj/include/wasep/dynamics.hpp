#pragma once

// Hydrodynamics d_t rho + (E/2) d_u chi(rho) = (1/2) d_uu rho with Dirichlet data
// rho_+-, and the relaxation path rho* of the adjoint dynamics built from it.

#include "wasep/core.hpp"
#include "wasep/elgp.hpp"

#include <map>
#include <string>

namespace wasep {

struct PDEConfig {
  Grid grid{401};
  double dt = 0.0;           // 0 selects h^2
  double horizon = 5.0;
  double theta = 1.0;        // implicit weight of the second-order diffusion, in [0.5, 1]
  double output_dt = 0.002;  // snapshot spacing; rounded to a whole number of steps
  int spatial_order = 4;     // 4 adds an explicit fourth-order correction to diffusion and flux

  double step() const { return dt > 0.0 ? dt : grid.spacing() * grid.spacing(); }
};

struct BurgersResult {
  SpacetimePath path;
  bool cfl_warning = false;  // explicit flux outside its stability budget
  int steps = 0;
};

/// Semi-implicit solve from gamma; boundary values are imposed for t > 0.
BurgersResult burgers_solve(const DensityProfile& gamma, const Params& params, const PDEConfig& cfg);

struct AdjointPath {
  SpacetimePath rho_star;  // rho*_t = 1/(1+e^psi) + psi''/(psi'(psi'-E))
  SpacetimePath F;         // hydrodynamic solution from logistic(Phi(gamma))
  Mat psi;                 // logit F, one column per stored time
  ELSolution phi_gamma;    // Phi(gamma)
  std::map<std::string, double> diagnostics;
};

/// Requires E < E0 and gamma in M0 (gamma(+-1) = rho_+-, 0 < gamma < 1).
/// Throws monotonicity_loss if psi' <= max(0, E) at a stored time.
AdjointPath adjoint_path(const DensityProfile& gamma, const Params& params, const PDEConfig& cfg);

struct PDEResidual {
  double sup = 0.0;  // interior nodes, all stored times
  double mean = 0.0;
};

/// Residual of d_t psi = (1/2) psi'' + (1/2) tanh(-psi/2) psi'(psi' - E) on stored snapshots.
PDEResidual transformed_pde_check(const Grid& grid, const std::vector<double>& times, const Mat& psi,
                                  const Params& params);

/// Projection of an arbitrary profile into M0: clip to [delta, 1 - delta] and bend
/// the ends onto rho_+- with exponential ramps of width `width`.
DensityProfile to_M0(const DensityProfile& rho, const Params& params, double delta = 1e-3, double width = 0.05);

bool in_M0(const DensityProfile& rho, const Params& params, double tol = 1e-12);

struct OptimalPathConfig {
  PDEConfig pde;
  int joining_samples = 51;
};

struct OptimalPath {
  SpacetimePath joining;   // rho_bar_E -> rho*_{T1} on [0, 1]
  SpacetimePath reversed;  // rho*_{T1 - t} on [1, 1 + T1]
  SpacetimePath full;
  Index junction = 0;      // column of `full` at t = 1
  double T1 = 0.0;
  bool mollified = false;
  double mollification_error = 0.0;  // L1 distance to the requested profile
  AdjointPath adjoint;
};

/// Straight segment from the stationary profile followed by the time reversal
/// of the adjoint relaxation path ending at rho.
OptimalPath optimal_path(const DensityProfile& rho, const Params& params, const OptimalPathConfig& cfg = {});

/// Straight path rho_bar + s (target - rho_bar) for s in [t0, t0 + 1].
SpacetimePath straight_path(const DensityProfile& from, const DensityProfile& to, int samples, double t0 = 0.0);

}  // namespace wasep
