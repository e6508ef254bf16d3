#include "wasep/stationary.hpp"
#include "wasep/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <sstream>

namespace wasep {
namespace {

using boost::math::quadrature::gauss_kronrod;

double max_mobility(const Params& p) {
  return mobility(asymmetric_constants(p).rho_bar_a);
}

// Adaptive Gauss-Kronrod over [rho_-, rho_+], split at 1/2 where chi peaks.
template <typename F>
double integrate_density(const Params& p, F f) {
  const double a = p.rho_minus(), b = p.rho_plus();
  auto gk = [&](double lo, double hi) {
    return gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, 1e-14);
  };
  if (a < 0.5 && 0.5 < b) return gk(a, 0.5) + gk(0.5, b);
  return gk(a, b);
}

// Upper limit (exclusive) of admissible J: the integrand blows up at J = E max chi for E < 0.
double current_ceiling(const Params& p) { return std::min(0.0, p.field() * max_mobility(p)); }

bool is_reversible(const Params& p) {
  return std::abs(p.field() - p.E0()) <= 1e-12 * std::max(1.0, std::abs(p.E0()));
}

Vec rk4_profile(const Params& p, double J, const Grid& grid, int substeps) {
  const double E = p.field();
  auto f = [E, J](double r) { return E * r * (1.0 - r) - J; };
  const double hs = grid.spacing() / substeps;
  Vec rho(grid.size());
  double r = p.rho_minus();
  rho(0) = r;
  for (Index i = 1; i < grid.size(); ++i) {
    for (int s = 0; s < substeps; ++s) {
      const double k1 = f(r);
      const double k2 = f(r + 0.5 * hs * k1);
      const double k3 = f(r + 0.5 * hs * k2);
      const double k4 = f(r + hs * k3);
      r += hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    rho(i) = r;
  }
  return rho;
}

int substeps_for(const Params& p, const Grid& grid) {
  return std::max(4, static_cast<int>(std::ceil(grid.spacing() * (std::abs(p.field()) + 1.0) / 0.01)));
}

}  // namespace

double current_integral(const Params& p, double J) {
  const double E = p.field();
  if (E == 0.0) return 0.5 * (p.rho_plus() - p.rho_minus()) / (-J);
  if (!(J < current_ceiling(p)) && !(E > 0.0 && J == 0.0))
    throw NumericalError(ErrorKind::domain, "current outside the admissible range");
  if (E > 0.0 && J == 0.0) return p.E0() / E;  // (1/2E) int dr / chi = (phi_+ - phi_-) / 2E
  return 0.5 * integrate_density(p, [E, J](double r) { return 1.0 / (E * r * (1.0 - r) - J); });
}

double solve_current(const Params& p) {
  const double E = p.field();
  const double span = p.rho_plus() - p.rho_minus();
  if (E == 0.0) return -0.5 * span;
  if (E > 0.0) {
    if (is_reversible(p)) return 0.0;
    if (E > p.E0())
      throw NumericalError(ErrorKind::bracket_not_found,
                           "no admissible current: field exceeds the reversibility threshold");
  }
  const double top = current_ceiling(p);
  const double lo = top - span;  // denominator >= span, so the integral is at most 1/2
  // Walk toward the singular end until the integral exceeds 1.
  double hi = top - 0.5 * span;
  double g_hi = current_integral(p, hi) - 1.0;
  for (int k = 0; g_hi <= 0.0; ++k) {
    if (k > 200 || top - hi < 1e-15 * std::max(1.0, std::abs(top))) {
      if (E > 0.0) {
        hi = 0.0;
        g_hi = current_integral(p, 0.0) - 1.0;
        if (g_hi > 0.0) break;
      }
      throw NumericalError(ErrorKind::bracket_not_found, "current equation has no sign change");
    }
    hi = top - 0.5 * (top - hi);
    g_hi = current_integral(p, hi) - 1.0;
  }
  const double g_lo = current_integral(p, lo) - 1.0;
  auto g = [&](double J) { return current_integral(p, J) - 1.0; };
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, tol, iters);
  const double ga = std::abs(g(a)), gb = std::abs(g(b));
  return ga <= gb ? a : b;
}

DensityProfile stationary_profile(const Params& p, double J, const Grid& grid, double tol,
                                  StationaryDiagnostics* diag) {
  const int substeps = substeps_for(p, grid);
  Vec rho = rk4_profile(p, J, grid, substeps);
  const double err = std::abs(rho(grid.size() - 1) - p.rho_plus());
  if (diag) {
    diag->substeps = substeps;
    diag->endpoint_error = err;
  }
  if (!(err <= tol)) {
    std::ostringstream os;
    os << "stationary profile misses rho_+ by " << err;
    throw NumericalError(ErrorKind::endpoint_mismatch, os.str(), err);
  }
  rho(grid.size() - 1) = p.rho_plus();
  return DensityProfile(grid, rho.cwiseMax(0.0).cwiseMin(1.0));
}

double constant_A_E(const Params& p, double J) {
  const double E = p.field();
  if (!(J < 0.0)) throw NumericalError(ErrorKind::domain, "A_E needs a strictly negative current");
  if (E == 0.0) return std::log(0.5 * (p.rho_plus() - p.rho_minus())) + 1.0;
  const double integral = integrate_density(p, [E, J](double r) {
    const double x = E * r * (1.0 - r);
    return std::log1p(-x / J) / x;
  });
  return std::log(-J) + 0.5 * integral;
}

AsymmetricConstants asymmetric_constants(const Params& p) {
  double best = p.rho_minus();
  for (double c : {p.rho_plus(), 0.5}) {
    if (c < p.rho_minus() || c > p.rho_plus()) continue;
    if (c * (1.0 - c) > best * (1.0 - best)) best = c;
  }
  return {best, std::log(best * (1.0 - best))};
}

double stationary_ode_residual(const Params& p, double J, const DensityProfile& rho) {
  const Vec& r = rho.values();
  const Vec res = derivative4(r, rho.grid()) - p.field() * mobility(r) + Vec::Constant(r.size(), J);
  return res.cwiseAbs().maxCoeff();
}

StationaryState solve_stationary(const Params& p, const Grid& grid) {
  const double E = p.field();
  StationaryDiagnostics diag;
  const Vec u = grid.nodes();

  if (E == 0.0 || is_reversible(p)) {
    const double J = E == 0.0 ? -0.5 * (p.rho_plus() - p.rho_minus()) : 0.0;
    Vec rho(grid.size()), phi(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
      if (E == 0.0) {
        rho(i) = p.rho_minus() + 0.5 * (p.rho_plus() - p.rho_minus()) * (u(i) + 1.0);
        phi(i) = potential_of_density(rho(i));
      } else {
        phi(i) = 0.5 * p.phi_minus() * (1.0 - u(i)) + 0.5 * p.phi_plus() * (1.0 + u(i));
        rho(i) = density_of_potential(phi(i));
      }
    }
    phi(0) = p.phi_minus();
    phi(grid.size() - 1) = p.phi_plus();
    DensityProfile rho_bar(grid, rho);
    diag.current_residual = std::abs(current_integral(p, J) - 1.0);
    diag.ode_residual = stationary_ode_residual(p, J, rho_bar);
    std::optional<double> A;
    if (J < 0.0) A = constant_A_E(p, J);
    return {p, J, rho_bar, PotentialProfile(grid, phi), A, diag};
  }

  double J = solve_current(p);
  diag.current_residual = std::abs(current_integral(p, J) - 1.0);
  const int substeps = substeps_for(p, grid);
  diag.substeps = substeps;
  Vec rho = rk4_profile(p, J, grid, substeps);
  const Index last = grid.size() - 1;
  double miss = rho(last) - p.rho_plus();

  if (std::abs(miss) > 1e-10) {
    // Secant on the endpoint map J -> rho(1); the step is reported as a correction.
    const double J0 = J;
    double Ja = J, fa = miss;
    double Jb = J - 1e-7 * std::max(1.0, std::abs(J)), fb = rk4_profile(p, Jb, grid, substeps)(last) - p.rho_plus();
    for (int k = 0; k < 50 && std::abs(fb) > 1e-12; ++k) {
      if (fb == fa) break;
      const double Jc = Jb - fb * (Jb - Ja) / (fb - fa);
      Ja = Jb, fa = fb;
      Jb = std::min(Jc, current_ceiling(p) - 1e-15);
      fb = rk4_profile(p, Jb, grid, substeps)(last) - p.rho_plus();
    }
    if (std::abs(fb) < std::abs(miss)) {
      J = Jb;
      rho = rk4_profile(p, J, grid, substeps);
      miss = rho(last) - p.rho_plus();
    }
    diag.current_correction = J - J0;
  }
  diag.endpoint_error = std::abs(miss);
  if (diag.endpoint_error > 1e-6) {
    std::ostringstream os;
    os << "stationary profile misses rho_+ by " << diag.endpoint_error;
    throw NumericalError(ErrorKind::endpoint_mismatch, os.str(), diag.endpoint_error);
  }
  rho(last) = p.rho_plus();
  DensityProfile rho_bar(grid, rho.cwiseMax(0.0).cwiseMin(1.0));
  Vec phi = potential_of_density_clipped(rho_bar.values());
  phi(0) = p.phi_minus();
  phi(last) = p.phi_plus();
  diag.ode_residual = stationary_ode_residual(p, J, rho_bar);
  return {p, J, rho_bar, PotentialProfile(grid, phi), constant_A_E(p, J), diag};
}

}  // namespace wasep
