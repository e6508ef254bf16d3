#pragma once

#include "wasep/core.hpp"
#include "wasep/elgp.hpp"

#include <map>
#include <optional>
#include <string>

namespace wasep {

struct RateReport {
  double value = 0.0;
  std::optional<PotentialProfile> maximizer;
  Vec maximizer_slope;  // phi' of the maximizer when the solver provides it
  std::map<std::string, double> diagnostics;
};

/// J_E and A_E for a subcritical field (E < E0), computed once per field.
struct FieldConstants {
  double J;
  double A_E;
};

FieldConstants field_constants(const Params& params);

/// G_E(rho, phi) by fourth-order quadrature; phi' from fourth-order differences.
/// Covers E = 0 through the log phi' + 1 limit. Throws domain if phi' <= max(0, E).
double G_E(const DensityProfile& rho, const PotentialProfile& phi, const Params& params, double A_E);
double G_E(const DensityProfile& rho, const PotentialProfile& phi, const Params& params);

/// G_E at E = 0, with A_0 = log((rho_+ - rho_-)/2) + 1.
double G_0(const DensityProfile& rho, const PotentialProfile& phi, const Params& params);

/// max over phi of G_E(rho, phi), attained at Phi(rho). Delegates to S_E0 at E = E0.
RateReport S_E(const DensityProfile& rho, const Params& params, const ELOptions& options = {});

/// Bernoulli relative entropy of rho against the logistic-affine profile of E0.
double S_E0(const DensityProfile& rho, const Params& params);

/// int of the Bernoulli relative entropy of rho against `reference`.
double relative_entropy(const DensityProfile& rho, const Vec& reference);

/// G_a(rho, phi) = int {h(rho) + (1-rho) phi - log(1+e^phi) - A_a}.
double G_a(const DensityProfile& rho, const PotentialProfile& phi, const Params& params);

/// Exact discrete maximizer of G_a over nondecreasing phi with values in
/// [phi_-, phi_+]: weighted isotonic regression of 1 - rho in logistic space.
/// The left boundary value phi_- is attained as a jump at u = -1, so node 0 is free.
RateReport S_a(const DensityProfile& rho, const Params& params);

/// Weights of quadrature4 on the grid (positive for every M >= 3).
Vec quadrature_weights(const Grid& grid);

/// Weighted pool-adjacent-violators fit: nondecreasing z minimizing sum w (z - y)^2.
Vec isotonic_regression(const Vec& y, const Vec& w);

}  // namespace wasep
