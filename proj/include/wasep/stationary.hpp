#pragma once

#include "wasep/core.hpp"

#include <optional>

namespace wasep {

struct StationaryDiagnostics {
  double current_residual = 0.0;  // |(1/2) int dr/(E chi - J) - 1|
  double ode_residual = 0.0;      // sup |rho' - E chi(rho) + J|, fourth-order differences
  double endpoint_error = 0.0;    // |rho(1) - rho_+| after integration
  double current_correction = 0.0;  // J change made by the endpoint secant, usually 0
  int substeps = 1;               // RK4 steps per grid cell
};

struct StationaryState {
  Params params;
  double J;
  DensityProfile rho_bar;
  PotentialProfile phi_bar;
  std::optional<double> A_E;  // undefined at E = E0 where J = 0
  StationaryDiagnostics diagnostics;
};

struct AsymmetricConstants {
  double rho_bar_a;
  double A_a;
};

/// (1/2) int_{rho_-}^{rho_+} dr / (E chi(r) - J), for J below the singular value.
double current_integral(const Params& params, double J);

/// Unique J <= 0 with current_integral = 1. Requires E <= E0.
double solve_current(const Params& params);

/// RK4 integration of rho' = E chi(rho) - J from rho(-1) = rho_-.
/// Throws endpoint_mismatch when |rho(1) - rho_+| > tol.
DensityProfile stationary_profile(const Params& params, double J, const Grid& grid,
                                  double tol = 1e-6, StationaryDiagnostics* diag = nullptr);

/// log(-J) + (1/2) int log(1 - E chi / J) / (E chi) dr; closed form at E = 0.
double constant_A_E(const Params& params, double J);

AsymmetricConstants asymmetric_constants(const Params& params);

/// Sup norm of rho' - E chi(rho) + J on the grid.
double stationary_ode_residual(const Params& params, double J, const DensityProfile& rho);

/// Current, profile, potential and A_E in one call. E = 0 and E = E0 use
/// exact profiles; other fields integrate and, if the endpoint misses, refine J
/// by secant steps on rho(1).
StationaryState solve_stationary(const Params& params, const Grid& grid);

}  // namespace wasep
