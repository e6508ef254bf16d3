#include "wasep/dynamics.hpp"
#include "wasep/numerics.hpp"
#include "wasep/stationary.hpp"

#include <algorithm>
#include <sstream>

namespace wasep {
namespace {

// Constant tridiagonal system (I - c L) x = b on the interior, L the 3-point Laplacian,
// factored once.
class ImplicitDiffusion {
 public:
  ImplicitDiffusion(Index m, double c) : cprime_(m), denom_(m), c_(c) {
    const double off = -c, diag = 1.0 + 2.0 * c;
    double prev = 0.0;
    for (Index i = 0; i < m; ++i) {
      denom_(i) = diag - (i > 0 ? off * prev : 0.0);
      cprime_(i) = off / denom_(i);
      prev = cprime_(i);
    }
  }

  // Solves in place; b already contains the Dirichlet contributions.
  void solve(Vec& b) const {
    const Index m = b.size();
    const double off = -c_;
    b(0) /= denom_(0);
    for (Index i = 1; i < m; ++i) b(i) = (b(i) - off * b(i - 1)) / denom_(i);
    for (Index i = m - 2; i >= 0; --i) b(i) -= cprime_(i) * b(i + 1);
  }

 private:
  Vec cprime_;
  Vec denom_;
  double c_;
};

double max_abs(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

BurgersResult burgers_solve(const DensityProfile& gamma, const Params& p, const PDEConfig& cfg) {
  const Grid& grid = cfg.grid;
  if (!(gamma.grid() == grid)) throw NumericalError(ErrorKind::invalid_input, "initial profile not on the PDE grid");
  if (!(cfg.theta >= 0.5 && cfg.theta <= 1.0)) throw NumericalError(ErrorKind::invalid_input, "theta must lie in [0.5, 1]");
  if (!(cfg.horizon > 0.0)) throw NumericalError(ErrorKind::invalid_input, "horizon must be positive");
  const Index n = grid.size(), m = n - 2;
  const double h = grid.spacing(), dt = cfg.step(), E = p.field();
  const double r = 0.5 * dt / (h * h);
  const bool fourth = cfg.spatial_order == 4;

  const int steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / dt)));
  const double step = cfg.horizon / steps;
  const int stride = std::max(1, static_cast<int>(std::llround(cfg.output_dt / step)));
  const double c = cfg.theta * 0.5 * step / (h * h);
  const ImplicitDiffusion solver(m, c);

  BurgersResult result{SpacetimePath(grid, {0.0}, gamma.values())};
  result.cfl_warning = step * std::abs(E) / (2.0 * h) > 1.0 || (1.0 - cfg.theta) * r > 0.5 || (fourth && r > 1.5);

  std::vector<double> times{0.0};
  std::vector<Vec> snaps{gamma.values()};
  Vec rho = gamma.values();
  Vec b(m);
  for (int k = 1; k <= steps; ++k) {
    const Vec chi = rho.cwiseProduct(Vec::Ones(n) - rho);
    const Vec flux = fourth ? derivative4(chi, grid) : derivative(chi, grid);
    Vec explicit_part = -0.5 * E * flux;
    const Vec lap2 = [&] {
      Vec l = Vec::Zero(n);
      l.segment(1, m) = (rho.segment(0, m) - 2.0 * rho.segment(1, m) + rho.segment(2, m)) / (h * h);
      return l;
    }();
    if (cfg.theta < 1.0) explicit_part += 0.5 * (1.0 - cfg.theta) * lap2;
    if (fourth) explicit_part += 0.5 * (second_derivative4(rho, grid) - lap2);

    b = rho.segment(1, m) + step * explicit_part.segment(1, m);
    b(0) += c * p.rho_minus();
    b(m - 1) += c * p.rho_plus();
    solver.solve(b);
    rho.segment(1, m) = b;
    rho(0) = p.rho_minus();
    rho(n - 1) = p.rho_plus();

    if (k % stride == 0 || k == steps) {
      times.push_back(k * step);
      snaps.push_back(rho);
    }
  }
  Mat values(n, static_cast<Index>(snaps.size()));
  for (std::size_t j = 0; j < snaps.size(); ++j) values.col(static_cast<Index>(j)) = snaps[j].cwiseMax(0.0).cwiseMin(1.0);
  result.path = SpacetimePath(grid, std::move(times), std::move(values));
  result.steps = steps;
  return result;
}

bool in_M0(const DensityProfile& rho, const Params& p, double tol) {
  const Vec& v = rho.values();
  return std::abs(v(0) - p.rho_minus()) <= tol && std::abs(v(v.size() - 1) - p.rho_plus()) <= tol &&
         v.minCoeff() > 0.0 && v.maxCoeff() < 1.0;
}

DensityProfile to_M0(const DensityProfile& rho, const Params& p, double delta, double width) {
  const Grid& grid = rho.grid();
  Vec v = rho.values().cwiseMax(delta).cwiseMin(1.0 - delta);
  const double left = p.rho_minus() - v(0), right = p.rho_plus() - v(v.size() - 1);
  for (Index i = 0; i < v.size(); ++i) {
    const double u = grid.node(i);
    v(i) += left * std::exp(-(u + 1.0) / width) + right * std::exp(-(1.0 - u) / width);
  }
  v(0) = p.rho_minus();
  v(v.size() - 1) = p.rho_plus();
  return DensityProfile(grid, v.cwiseMax(delta).cwiseMin(1.0 - delta));
}

AdjointPath adjoint_path(const DensityProfile& gamma, const Params& p, const PDEConfig& cfg) {
  if (!(p.field() < p.E0())) throw NumericalError(ErrorKind::invalid_input, "adjoint path needs E < E0");
  if (!in_M0(gamma, p, 1e-9)) throw NumericalError(ErrorKind::invalid_input, "adjoint path needs gamma in M0");
  const Grid& grid = cfg.grid;
  const Index n = grid.size();
  const double E = p.field();

  ELSolution phi = solve_phi(gamma, p);
  Vec G = density_of_potential(phi.phi.values());
  G(0) = p.rho_minus();
  G(n - 1) = p.rho_plus();
  BurgersResult hydro = burgers_solve(DensityProfile(grid, G), p, cfg);
  const SpacetimePath& F = hydro.path;
  const Index K = F.steps();

  Mat psi(n, K), star(n, K);
  double margin = std::numeric_limits<double>::infinity(), boundary_error = 0.0;
  Index clipped = 0;
  for (Index k = 0; k < K; ++k) {
    Index ck = 0;
    Vec s = potential_of_density_clipped(F.values().col(k), &ck);
    clipped += ck;
    s(0) = p.phi_minus();
    s(n - 1) = p.phi_plus();
    const Vec d1 = derivative4(s, grid), d2 = second_derivative4(s, grid);
    for (Index i = 0; i < n; ++i) {
      const double gap = d1(i) - std::max(0.0, E);
      margin = std::min(margin, gap);
      if (!(gap > 0.0)) {
        std::ostringstream os;
        os << "psi lost monotonicity at t=" << F.times()[k] << ", u=" << grid.node(i);
        throw NumericalError(ErrorKind::monotonicity_loss, os.str(), gap);
      }
      star(i, k) = density_of_potential(-s(i)) + d2(i) / (d1(i) * (d1(i) - E));
    }
    boundary_error = std::max({boundary_error, std::abs(star(0, k) - p.rho_minus()),
                               std::abs(star(n - 1, k) - p.rho_plus())});
    star(0, k) = p.rho_minus();
    star(n - 1, k) = p.rho_plus();
    psi.col(k) = s;
  }

  const double lo = star.minCoeff(), hi = star.maxCoeff();
  if (!(lo > 0.0 && hi < 1.0)) {
    std::ostringstream os;
    os << "adjoint profile left (0, 1): range [" << lo << ", " << hi << "]";
    throw NumericalError(ErrorKind::domain, os.str());
  }
  const double delta = std::min(gamma.values().minCoeff(), 1.0 - gamma.values().maxCoeff());
  const double floor = std::min({p.rho_minus(), 1.0 - p.rho_plus(), delta});
  const double ceil = std::max({p.rho_plus(), 1.0 - p.rho_minus(), 1.0 - delta});

  AdjointPath out{SpacetimePath(grid, F.times(), star), F, psi, phi, {}};
  out.diagnostics["initial_error"] = max_abs(star.col(0) - gamma.values());
  out.diagnostics["boundary_error"] = boundary_error;
  out.diagnostics["gradient_margin"] = margin;
  out.diagnostics["bounds_violation"] = std::max({0.0, floor - lo, hi - ceil});
  out.diagnostics["clipped_nodes"] = static_cast<double>(clipped);
  out.diagnostics["cfl_warning"] = hydro.cfl_warning ? 1.0 : 0.0;
  out.diagnostics["steps"] = hydro.steps;
  return out;
}

PDEResidual transformed_pde_check(const Grid& grid, const std::vector<double>& times, const Mat& psi,
                                  const Params& p) {
  const Mat dt = time_derivative(times, psi);
  const Index n = grid.size(), K = psi.cols();
  PDEResidual out;
  double total = 0.0;
  for (Index k = 0; k < K; ++k) {
    const Vec s = psi.col(k);
    const Vec d1 = derivative4(s, grid), d2 = second_derivative4(s, grid);
    for (Index i = 1; i + 1 < n; ++i) {
      const double rhs = 0.5 * d2(i) + 0.5 * std::tanh(-0.5 * s(i)) * d1(i) * (d1(i) - p.field());
      const double r = std::abs(dt(i, k) - rhs);
      out.sup = std::max(out.sup, r);
      total += r;
    }
  }
  out.mean = total / static_cast<double>(K * (n - 2));
  return out;
}

SpacetimePath straight_path(const DensityProfile& from, const DensityProfile& to, int samples, double t0) {
  if (samples < 2) throw NumericalError(ErrorKind::invalid_input, "straight path needs two samples");
  const Index n = from.grid().size();
  std::vector<double> times(samples);
  Mat values(n, samples);
  for (int k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / (samples - 1);
    times[k] = t0 + s;
    values.col(k) = from.values() + s * (to.values() - from.values());
  }
  return SpacetimePath(from.grid(), std::move(times), std::move(values));
}

OptimalPath optimal_path(const DensityProfile& rho, const Params& p, const OptimalPathConfig& cfg) {
  const Grid& grid = cfg.pde.grid;
  DensityProfile target = rho;
  bool mollified = false;
  double error = 0.0;
  if (!in_M0(rho, p, 1e-9)) {
    target = to_M0(rho, p);
    mollified = true;
    error = quadrature4((target.values() - rho.values()).cwiseAbs(), grid);
  }
  AdjointPath adj = adjoint_path(target, p, cfg.pde);
  const SpacetimePath& star = adj.rho_star;
  const Index K = star.steps();
  const double T1 = star.horizon();

  const DensityProfile rho_bar = solve_stationary(p, grid).rho_bar;
  SpacetimePath joining = straight_path(rho_bar, star.profile(K - 1), cfg.joining_samples, 0.0);
  SpacetimePath reversed = star.reversed().shifted(1.0);

  std::vector<double> times = joining.times();
  times.insert(times.end(), reversed.times().begin() + 1, reversed.times().end());
  Mat values(grid.size(), joining.steps() + K - 1);
  values << joining.values(), reversed.values().rightCols(K - 1);
  SpacetimePath full(grid, std::move(times), std::move(values));

  return {joining, reversed, full, joining.steps() - 1, T1, mollified, error, std::move(adj)};
}

}  // namespace wasep
