#pragma once

// Euler-Lagrange map rho -> Phi(rho): the unique phi with phi(+-1) = phi_+-,
// phi' > max(0, E) and phi'' / (phi'(phi' - E)) + 1/(1 + e^phi) = rho.

#include "wasep/core.hpp"

#include <optional>

namespace wasep {

enum class ELBranch { K1, K2, reversible };

const char* to_string(ELBranch branch);

/// Image of a fixed-point operator together with its exact u-derivative.
struct KImage {
  Vec value;
  Vec slope;
};

struct ELSolution {
  DensityProfile rho;
  PotentialProfile phi;
  Vec slope;               // phi' carried by the iteration
  double residual = 0.0;   // sup |phi''/(phi'(phi'-E)) + 1/(1+e^phi) - rho|, fourth-order stencils
  double increment = 0.0;  // sup |K(phi) - phi| at exit
  int iterations = 0;
  double omega = 0.0;      // damping in force at exit
  ELBranch branch = ELBranch::K1;
};

struct ELOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  double omega = 0.5;
  double min_omega = 1e-4;
  const ELSolution* warm_start = nullptr;  // must live on the same grid
};

/// K1 for E <= 0 and K2 for 0 < E < E0, applied to the pair (phi, phi').
KImage apply_operator(const DensityProfile& rho, const Vec& phi, const Vec& slope, const Params& params);

/// K1 with phi' taken from fourth-order differences of phi. Requires E <= 0.
PotentialProfile operator_K1(const DensityProfile& rho, const PotentialProfile& phi, const Params& params);

/// K2 with phi' taken from fourth-order differences of phi. Requires 0 < E < E0.
PotentialProfile operator_K2(const DensityProfile& rho, const PotentialProfile& phi, const Params& params);

/// Damped fixed-point iteration phi <- (1 - w) phi + w K(phi); w halves whenever
/// the increment grows. At E = E0 the affine potential is returned.
ELSolution solve_phi(const DensityProfile& rho, const Params& params, const ELOptions& options = {});

/// Sup norm of the Euler-Lagrange residual of phi, fourth-order differences.
double el_residual(const DensityProfile& rho, const Vec& phi, const Params& params);

struct ShootingResult {
  PotentialProfile phi;
  double slope_left;  // phi'(-1)
  double parameter;   // shooting variable at u = -1
  int bisections;
};

/// Independent solve of the same boundary problem: RK4 on the first-order system
/// (phi, v) with v = (1/E) log((phi' - E)/phi') (v = -1/phi' at E = 0), bisecting
/// on v(-1). `start` seeds the bracket search. Requires E < E0.
ShootingResult shooting_oracle(const DensityProfile& rho, const Params& params, double start = -1.0);

/// Derivative of Phi at rho in direction drho: (a psi')' - c psi = drho, psi(+-1) = 0,
/// a = 1/(phi'(phi'-E)), c = e^phi/(1+e^phi)^2.
Vec linearized_sensitivity(const ELSolution& base, const Vec& drho, const Params& params);

}  // namespace wasep
