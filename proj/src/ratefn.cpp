#include "wasep/ratefn.hpp"
#include "wasep/elgp.hpp"
#include "wasep/functionals.hpp"
#include "wasep/numerics.hpp"

#include <algorithm>

namespace wasep {
namespace {

Vec chi_of(const Vec& v) { return v.cwiseProduct(Vec::Ones(v.size()) - v); }

// Gamma = logit rho - Phi(rho), with the solution kept for warm starts.
Vec gamma_potential(const DensityProfile& rho, const Params& p, std::optional<ELSolution>& last) {
  ELOptions opt;
  if (last) opt.warm_start = &*last;
  last = solve_phi(rho, p, opt);
  Vec g = potential_of_density_clipped(rho.values()) - last->phi.values();
  g(0) = 0.0;
  g(g.size() - 1) = 0.0;
  return g;
}

}  // namespace

double energy_Q(const SpacetimePath& path) {
  const Grid& grid = path.grid();
  const Index K = path.steps();
  Vec slice(K);
  for (Index k = 0; k < K; ++k) {
    const Vec pi = path.values().col(k);
    const Vec d = derivative4(pi, grid);
    const Vec chi = chi_of(pi);
    Vec f(pi.size());
    for (Index i = 0; i < pi.size(); ++i) {
      if (chi(i) <= 0.0) {
        if (std::abs(d(i)) > 0.0) return kInfiniteCost;
        f(i) = 0.0;
      } else {
        f(i) = d(i) * d(i) / chi(i);
      }
    }
    slice(k) = 0.5 * quadrature4(f, grid);
  }
  return K == 1 ? 0.0 : time_integral(path.times(), slice);
}

CostBreakdown rate_I_T(const SpacetimePath& path, const DensityProfile& gamma, const Params& p, bool decompose) {
  const Grid& grid = path.grid();
  const Index n = grid.size(), K = path.steps();
  CostBreakdown out;
  out.initial_mismatch = (path.values().col(0) - gamma.values()).cwiseAbs().maxCoeff();
  out.Q = energy_Q(path);
  if (out.initial_mismatch > 1e-6) {
    out.I_T = kInfiniteCost;
    return out;
  }
  if (K < 2) return out;
  for (Index k = 0; k < K; ++k) {
    if (chi_of(path.values().col(k)).minCoeff() <= 0.0) {
      out.degenerate = true;
      out.I_T = kInfiniteCost;
      return out;
    }
  }

  const Mat dt = time_derivative(path.times(), path.values());
  out.H.resize(n, K);
  out.slice_cost.resize(K);
  Mat Hprime(n, K);
  for (Index k = 0; k < K; ++k) {
    const Vec pi = path.values().col(k);
    const Vec chi = chi_of(pi);
    const Vec j = 0.5 * derivative4(pi, grid) - 0.5 * p.field() * chi - cumulative_integral4(dt.col(k), grid);
    const Vec inv = chi.cwiseInverse();
    const double c = quadrature4(j.cwiseProduct(inv), grid) / quadrature4(inv, grid);
    const Vec flux = j - Vec::Constant(n, c);
    Hprime.col(k) = flux.cwiseProduct(inv);
    Vec H = cumulative_integral4(Hprime.col(k), grid);
    H(n - 1) = 0.0;
    out.H.col(k) = H;
    out.slice_cost(k) = 0.5 * quadrature4(flux.cwiseProduct(flux).cwiseProduct(inv), grid);
  }
  out.I_T = time_integral(path.times(), out.slice_cost);

  if (decompose) {
    std::optional<ELSolution> last;
    Vec knorm(K);
    for (Index k = 0; k < K; ++k) {
      const DensityProfile pi = path.profile(k);
      const Vec dG = derivative4(gamma_potential(pi, p, last), grid);
      const Vec dK = dG - Hprime.col(k);
      knorm(k) = quadrature4(dK.cwiseProduct(dK).cwiseProduct(chi_of(pi.values())), grid);
    }
    out.K_norm_sq = time_integral(path.times(), knorm);
    out.delta_S = S_E(path.profile(K - 1), p).value - S_E(path.profile(0), p).value;
  }
  return out;
}

double variational_J_H(const SpacetimePath& path, const DensityProfile& gamma, const Mat& H, const Params& p) {
  const Grid& grid = path.grid();
  const Index K = path.steps();
  if (H.rows() != grid.size() || H.cols() != K)
    throw NumericalError(ErrorKind::invalid_input, "test function shape does not match the path");
  const Mat& pi = path.values();
  const Mat Ht = K > 1 ? time_derivative(path.times(), H) : Mat::Zero(H.rows(), H.cols());
  Vec slice(K);
  for (Index k = 0; k < K; ++k) {
    const Vec h = H.col(k);
    const Vec dh = derivative4(h, grid), d2h = second_derivative4(h, grid);
    const Vec chi = chi_of(pi.col(k));
    const Vec f = -pi.col(k).cwiseProduct(Ht.col(k)) - 0.5 * pi.col(k).cwiseProduct(d2h) -
                  0.5 * p.field() * chi.cwiseProduct(dh) - 0.5 * chi.cwiseProduct(dh.cwiseProduct(dh));
    slice(k) = quadrature4(f, grid) + 0.5 * p.rho_plus() * dh(dh.size() - 1) - 0.5 * p.rho_minus() * dh(0);
  }
  const double ends = quadrature4(pi.col(K - 1).cwiseProduct(H.col(K - 1)), grid) -
                      quadrature4(gamma.values().cwiseProduct(H.col(0)), grid);
  return ends + (K > 1 ? time_integral(path.times(), slice) : 0.0);
}

double hamilton_jacobi_residual(const DensityProfile& rho, const Params& p) {
  const Grid& grid = rho.grid();
  std::optional<ELSolution> none;
  const Vec dG = derivative4(gamma_potential(rho, p, none), grid);
  const Vec chi = chi_of(rho.values());
  const Vec drift = derivative4(rho.values(), grid) - p.field() * chi;
  return std::abs(quadrature4(dG.cwiseProduct(chi.cwiseProduct(dG)), grid) - quadrature4(drift.cwiseProduct(dG), grid));
}

ShiftIdentity shift_identity_check(const SpacetimePath& path, const Params& p) {
  const Grid& grid = path.grid();
  const Index K = path.steps();
  ShiftIdentity out;
  if (K < 2) return out;
  const Mat dt = time_derivative(path.times(), path.values());
  std::optional<ELSolution> last;
  Vec slice(K);
  for (Index k = 0; k < K; ++k) {
    const Vec g = gamma_potential(path.profile(k), p, last);
    slice(k) = quadrature4(g.cwiseProduct(dt.col(k)), grid);
  }
  out.rhs = time_integral(path.times(), slice);
  out.lhs = S_E(path.profile(K - 1), p).value - S_E(path.profile(0), p).value;
  return out;
}

double c1_norm(const Vec& f, const Grid& grid) {
  return f.cwiseAbs().maxCoeff() + derivative4(f, grid).cwiseAbs().maxCoeff();
}

double joining_cost_constant(const DensityProfile& rho_bar, const DensityProfile& target, const Params& p) {
  const double chi_min = std::min(chi_of(rho_bar.values()).minCoeff(), chi_of(target.values()).minCoeff());
  if (!(chi_min > 0.0)) return kInfiniteCost;
  const double sup = (target.values() - rho_bar.values()).cwiseAbs().maxCoeff();
  const double b = 2.5 + 0.5 * std::abs(p.field()) * (1.0 + sup);
  return b * b / chi_min;
}

}  // namespace wasep
