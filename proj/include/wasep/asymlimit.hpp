#pragma once

// Sweeps of the strongly asymmetric limit E -> -infinity at fixed rho.
// Each row uses its own grid with M = max(401, 20 |E| + 1) nodes so that the
// boundary layers of Phi(rho), of width ~ 1/|E|, stay resolved.

#include "wasep/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace wasep {

using ProfileFunction = std::function<double(double)>;

/// Node count used for field E in sweeps.
Index sweep_grid_size(double E);

struct GammaLimitRow {
  double E = 0.0;
  Index M = 0;
  double S_E = 0.0;
  double S_a = 0.0;
  double gap = 0.0;      // S_E - S_a
  double A_shift = 0.0;  // A_E - log(-E)
  double A_a = 0.0;
  double jensen = 0.0;   // slope-term defect at Phi(rho), see jensen_defect
  std::string error;     // nonempty when a solver failed; numeric fields are then NaN
};

/// S_E(rho) and S_a(rho) per field. Fields must be negative. Rows run on up to
/// `threads` workers; a failing row records its error and the sweep continues.
std::vector<GammaLimitRow> gamma_limit_sweep(const ProfileFunction& rho, const Params& base,
                                             const std::vector<double>& E_list, int threads = 1);

/// int {(1/E)[x log x - (x - E) log(x - E)] - (A_E - A_a)} du with x = phi' > 0 given
/// on the grid; its limsup is nonpositive as E -> -infinity along phi = Phi(rho).
double jensen_defect(const Vec& slope, const Grid& grid, const Params& params, double A_E);

/// Fixed family of 12 test functions vanishing at u = 1: (1 - u) u^k for k = 0..5
/// and six bumps (1 - ((u - c)/0.25)^2)^2 on |u - c| < 0.25, c = -0.75, -0.5, ..., 0.5.
const std::vector<ProfileFunction>& weak_test_family();

/// int G dphi for phi nondecreasing on the grid with left limit `left` at u = -1:
/// G(-1)(phi_0 - left) + sum G(midpoint) (phi_{i+1} - phi_i).
double stieltjes_integral(const ProfileFunction& G, const PotentialProfile& phi, double left);

/// max over weak_test_family of |int G dphi - int G dpsi|, both with left limit `left`.
double weak_distance(const PotentialProfile& phi, const PotentialProfile& psi, double left);

struct MaximizerRow {
  double E = 0.0;
  Index M = 0;
  double weak_distance = 0.0;
  double l1_distance = 0.0;  // int |Phi_E(rho) - phi_a| du
  double sup_distance = 0.0;
  double layer_width = 0.0;  // measure of {|Phi_E(rho) - phi_a| > 5% of phi_+ - phi_-}
  std::string error;
};

/// Distance between Phi_E(rho) and the maximizer of G_a(rho, .) per field.
std::vector<MaximizerRow> maximizer_convergence(const ProfileFunction& rho, const Params& base,
                                                const std::vector<double>& E_list, int threads = 1);

}  // namespace wasep
