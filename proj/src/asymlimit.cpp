#include "wasep/asymlimit.hpp"
#include "wasep/elgp.hpp"
#include "wasep/functionals.hpp"
#include "wasep/numerics.hpp"
#include "wasep/stationary.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace wasep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs job(k) for k < n on up to `threads` workers.
template <class Job>
void parallel_rows(std::size_t n, int threads, Job job) {
  const int workers = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t k = next++; k < n; k = next++) job(k);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

void require_negative(const std::vector<double>& E_list) {
  for (double E : E_list)
    if (!(E < 0.0)) throw NumericalError(ErrorKind::invalid_input, "asymmetric sweeps need E < 0");
}

double slope_term(double x, double E) { return (xlogx(x) - xlogx(x - E)) / E; }

}  // namespace

Index sweep_grid_size(double E) {
  return std::max<Index>(401, static_cast<Index>(std::ceil(20.0 * std::abs(E))) + 1);
}

double jensen_defect(const Vec& d, const Grid& grid, const Params& p, double A_E) {
  if (d.size() != grid.size()) throw NumericalError(ErrorKind::invalid_input, "slope does not match the grid");
  const double E = p.field();
  const double A_a = asymmetric_constants(p).A_a;
  Vec f(d.size());
  for (Index i = 0; i < f.size(); ++i) {
    if (!(d(i) > 0.0)) throw NumericalError(ErrorKind::domain, "trial potential is not increasing");
    f(i) = slope_term(d(i), E) - (A_E - A_a);
  }
  return quadrature4(f, grid);
}

std::vector<GammaLimitRow> gamma_limit_sweep(const ProfileFunction& rho, const Params& base,
                                             const std::vector<double>& E_list, int threads) {
  require_negative(E_list);
  std::vector<GammaLimitRow> rows(E_list.size());
  parallel_rows(E_list.size(), threads, [&](std::size_t k) {
    GammaLimitRow& row = rows[k];
    row.E = E_list[k];
    row.M = sweep_grid_size(row.E);
    try {
      const Params p = base.with_field(row.E);
      const Grid grid(row.M);
      const DensityProfile r = DensityProfile::from_function(grid, rho);
      const FieldConstants fc = field_constants(p);
      const RateReport se = S_E(r, p);
      row.S_E = se.value;
      row.S_a = S_a(r, p).value;
      row.gap = row.S_E - row.S_a;
      row.A_a = asymmetric_constants(p).A_a;
      row.A_shift = fc.A_E - std::log(-row.E);
      row.jensen = jensen_defect(se.maximizer_slope, grid, p, fc.A_E);
    } catch (const std::exception& e) {
      row.S_E = row.S_a = row.gap = row.A_shift = row.A_a = row.jensen = kNaN;
      row.error = e.what();
    }
  });
  return rows;
}

const std::vector<ProfileFunction>& weak_test_family() {
  static const std::vector<ProfileFunction> family = [] {
    std::vector<ProfileFunction> f;
    for (int k = 0; k <= 5; ++k) f.emplace_back([k](double u) { return (1.0 - u) * std::pow(u, k); });
    for (int j = 0; j < 6; ++j) {
      const double c = -0.75 + 0.25 * j;
      f.emplace_back([c](double u) {
        const double s = (u - c) / 0.25;
        return std::abs(s) < 1.0 ? (1.0 - s * s) * (1.0 - s * s) : 0.0;
      });
    }
    return f;
  }();
  return family;
}

double stieltjes_integral(const ProfileFunction& G, const PotentialProfile& phi, double left) {
  const Grid& grid = phi.grid();
  const Vec& v = phi.values();
  double s = G(-1.0) * (v(0) - left);
  for (Index i = 0; i + 1 < v.size(); ++i) s += G(0.5 * (grid.node(i) + grid.node(i + 1))) * (v(i + 1) - v(i));
  return s;
}

double weak_distance(const PotentialProfile& phi, const PotentialProfile& psi, double left) {
  double worst = 0.0;
  for (const auto& G : weak_test_family())
    worst = std::max(worst, std::abs(stieltjes_integral(G, phi, left) - stieltjes_integral(G, psi, left)));
  return worst;
}

std::vector<MaximizerRow> maximizer_convergence(const ProfileFunction& rho, const Params& base,
                                                const std::vector<double>& E_list, int threads) {
  require_negative(E_list);
  std::vector<MaximizerRow> rows(E_list.size());
  parallel_rows(E_list.size(), threads, [&](std::size_t k) {
    MaximizerRow& row = rows[k];
    row.E = E_list[k];
    row.M = sweep_grid_size(row.E);
    try {
      const Params p = base.with_field(row.E);
      const Grid grid(row.M);
      const DensityProfile r = DensityProfile::from_function(grid, rho);
      const PotentialProfile phi_E = solve_phi(r, p).phi;
      const PotentialProfile phi_a = *S_a(r, p).maximizer;
      const Vec diff = (phi_E.values() - phi_a.values()).cwiseAbs();
      const double band = 0.05 * (p.phi_plus() - p.phi_minus());
      row.weak_distance = weak_distance(phi_E, phi_a, p.phi_minus());
      row.l1_distance = quadrature4(diff, grid);
      row.sup_distance = diff.maxCoeff();
      row.layer_width = grid.spacing() * static_cast<double>((diff.array() > band).count());
    } catch (const std::exception& e) {
      row.weak_distance = row.l1_distance = row.sup_distance = row.layer_width = kNaN;
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace wasep
