#include "wasep/functionals.hpp"
#include "wasep/numerics.hpp"
#include "wasep/stationary.hpp"

#include <algorithm>

namespace wasep {
namespace {

bool reversible(const Params& p) {
  return std::abs(p.field() - p.E0()) <= 1e-12 * std::max(1.0, std::abs(p.E0()));
}

// h(rho) + (1 - rho) phi - log(1 + e^phi), the part shared by G_E and G_a.
double local_term(double rho, double phi) {
  const double softplus = phi > 0.0 ? phi + std::log1p(std::exp(-phi)) : std::log1p(std::exp(phi));
  return bernoulli_entropy(rho) + (1.0 - rho) * phi - softplus;
}

// (1/E)[x log x - (x - E) log(x - E)], tending to log x + 1 as E -> 0.
double slope_term(double x, double E) {
  if (E == 0.0) return std::log(x) + 1.0;
  return (xlogx(x) - xlogx(x - E)) / E;
}

double G_with_slope(const DensityProfile& rho, const Vec& phi, const Vec& slope, double E, double A) {
  const Index n = phi.size();
  Vec f(n);
  for (Index i = 0; i < n; ++i) {
    if (!(slope(i) > std::max(0.0, E)))
      throw NumericalError(ErrorKind::domain, "trial potential has phi' <= max(0, E)");
    f(i) = local_term(rho[i], phi(i)) + slope_term(slope(i), E) - A;
  }
  return quadrature4(f, rho.grid());
}

void check_grid(const DensityProfile& rho, const PotentialProfile& phi) {
  if (!(rho.grid() == phi.grid())) throw NumericalError(ErrorKind::invalid_input, "profiles live on different grids");
}

}  // namespace

FieldConstants field_constants(const Params& p) {
  if (!(p.field() < p.E0()) || reversible(p))
    throw NumericalError(ErrorKind::invalid_input, "A_E is defined only for E < E0");
  const double J = solve_current(p);
  return {J, constant_A_E(p, J)};
}

double G_E(const DensityProfile& rho, const PotentialProfile& phi, const Params& p, double A_E) {
  check_grid(rho, phi);
  return G_with_slope(rho, phi.values(), derivative4(phi.values(), phi.grid()), p.field(), A_E);
}

double G_E(const DensityProfile& rho, const PotentialProfile& phi, const Params& p) {
  if (p.field() == 0.0) return G_0(rho, phi, p);
  return G_E(rho, phi, p, field_constants(p).A_E);
}

double G_0(const DensityProfile& rho, const PotentialProfile& phi, const Params& p) {
  check_grid(rho, phi);
  const double A0 = std::log(0.5 * (p.rho_plus() - p.rho_minus())) + 1.0;
  return G_with_slope(rho, phi.values(), derivative4(phi.values(), phi.grid()), 0.0, A0);
}

double relative_entropy(const DensityProfile& rho, const Vec& reference) {
  Vec f(reference.size());
  for (Index i = 0; i < f.size(); ++i) f(i) = bernoulli_relative_entropy(rho[i], reference(i));
  return quadrature4(f, rho.grid());
}

double S_E0(const DensityProfile& rho, const Params& p) {
  const Grid& grid = rho.grid();
  Vec ref(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double u = grid.node(i);
    ref(i) = density_of_potential(0.5 * p.phi_minus() * (1.0 - u) + 0.5 * p.phi_plus() * (1.0 + u));
  }
  return relative_entropy(rho, ref);
}

RateReport S_E(const DensityProfile& rho, const Params& p, const ELOptions& options) {
  RateReport report;
  if (reversible(p)) {
    report.value = S_E0(rho, p);
    report.diagnostics["reversible"] = 1.0;
    return report;
  }
  const ELSolution sol = solve_phi(rho, p, options);
  const double A = p.field() == 0.0 ? std::log(0.5 * (p.rho_plus() - p.rho_minus())) + 1.0 : field_constants(p).A_E;
  // The carried slope stays positive on near-flat stretches where differencing phi may not.
  report.value = G_with_slope(rho, sol.phi.values(), sol.slope, p.field(), A);
  report.maximizer = sol.phi;
  report.maximizer_slope = sol.slope;
  report.diagnostics["iterations"] = sol.iterations;
  report.diagnostics["el_residual"] = sol.residual;
  report.diagnostics["fixed_point_increment"] = sol.increment;
  report.diagnostics["omega"] = sol.omega;
  report.diagnostics["A_E"] = A;
  return report;
}

double G_a(const DensityProfile& rho, const PotentialProfile& phi, const Params& p) {
  check_grid(rho, phi);
  const double A_a = asymmetric_constants(p).A_a;
  Vec f(phi.values().size());
  for (Index i = 0; i < f.size(); ++i) f(i) = local_term(rho[i], phi[i]) - A_a;
  return quadrature4(f, rho.grid());
}

Vec quadrature_weights(const Grid& grid) {
  const Index n = grid.size();
  const double h = grid.spacing();
  Vec w = Vec::Constant(n, h);
  if (n < 8) {
    w(0) = w(n - 1) = 0.5 * h;
    return w;
  }
  static constexpr double end[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
  for (int k = 0; k < 4; ++k) w(k) = w(n - 1 - k) = end[k] * h;
  return w;
}

Vec isotonic_regression(const Vec& y, const Vec& w) {
  // Blocks as (weighted mean, weight, length) on a stack.
  std::vector<double> mean, weight;
  std::vector<Index> length;
  for (Index i = 0; i < y.size(); ++i) {
    mean.push_back(y(i));
    weight.push_back(w(i));
    length.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
      const std::size_t b = mean.size() - 1;
      const double W = weight[b - 1] + weight[b];
      mean[b - 1] = (weight[b - 1] * mean[b - 1] + weight[b] * mean[b]) / W;
      weight[b - 1] = W;
      length[b - 1] += length[b];
      mean.pop_back();
      weight.pop_back();
      length.pop_back();
    }
  }
  Vec z(y.size());
  Index i = 0;
  for (std::size_t b = 0; b < mean.size(); ++b)
    for (Index k = 0; k < length[b]; ++k) z(i++) = mean[b];
  return z;
}

RateReport S_a(const DensityProfile& rho, const Params& p) {
  const Grid& grid = rho.grid();
  // Per node, (1 - rho) phi - log(1 + e^phi) is maximized where e^phi/(1+e^phi) = 1 - rho;
  // pooling a block maximizes at the weighted mean of 1 - rho, so the fit runs in that space.
  const Vec y = Vec::Ones(grid.size()) - rho.values();
  const Vec z = isotonic_regression(y, quadrature_weights(grid)).cwiseMax(p.rho_minus()).cwiseMin(p.rho_plus());
  Vec phi(grid.size());
  for (Index i = 0; i < phi.size(); ++i) phi(i) = potential_of_density(z(i));
  RateReport report;
  PotentialProfile maximizer(grid, phi);
  report.value = G_a(rho, maximizer, p);
  report.maximizer = maximizer;
  Index pinned = 0;
  for (Index i = 0; i < z.size(); ++i) pinned += (z(i) == p.rho_minus() || z(i) == p.rho_plus());
  report.diagnostics["clamped_nodes"] = static_cast<double>(pinned);
  report.diagnostics["A_a"] = asymmetric_constants(p).A_a;
  return report;
}

}  // namespace wasep
