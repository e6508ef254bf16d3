#include "wasep/elgp.hpp"
#include "wasep/numerics.hpp"

#include <algorithm>
#include <sstream>

namespace wasep {
namespace {

bool reversible(const Params& p) {
  return std::abs(p.field() - p.E0()) <= 1e-12 * std::max(1.0, std::abs(p.E0()));
}

// 1 / (1 + e^phi), overflow-safe.
double vacancy(double phi) { return density_of_potential(-phi); }

Vec affine_potential(const Grid& grid, const Params& p) {
  Vec phi(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double u = grid.node(i);
    phi(i) = 0.5 * p.phi_minus() * (1.0 - u) + 0.5 * p.phi_plus() * (1.0 + u);
  }
  phi(0) = p.phi_minus();
  phi(grid.size() - 1) = p.phi_plus();
  return phi;
}

void require_subcritical(const Params& p) {
  if (!(p.field() < p.E0()))
    throw NumericalError(ErrorKind::invalid_input, "Euler-Lagrange problem needs E < E0");
}

}  // namespace

const char* to_string(ELBranch branch) {
  switch (branch) {
    case ELBranch::K1: return "K1";
    case ELBranch::K2: return "K2";
    case ELBranch::reversible: return "E0-closed-form";
  }
  return "unknown";
}

KImage apply_operator(const DensityProfile& rho, const Vec& phi, const Vec& slope, const Params& p) {
  const Grid& grid = rho.grid();
  const Index n = grid.size();
  const double E = p.field();
  const bool first = E <= 0.0;
  require_subcritical(p);

  Vec R(n);
  for (Index i = 0; i < n; ++i)
    R(i) = (rho[i] - vacancy(phi(i))) * (first ? slope(i) - E : slope(i));
  const Vec I = cumulative_integral4(R, grid);
  const Vec e = (I.array() - I.maxCoeff()).exp().matrix();  // log-space shift cancels in the ratio
  const Vec W = cumulative_integral4(e, grid);
  const double total = W(n - 1);

  KImage out;
  if (first) {
    const double span = p.phi_plus() - p.phi_minus();
    out.value = Vec::Constant(n, p.phi_minus()) + (span / total) * W;
    out.slope = (span / total) * e;
  } else {
    const double span = p.phi_plus() - p.phi_minus() - 2.0 * E;
    out.value = Vec::Constant(n, p.phi_minus()) + E * (grid.nodes() + Vec::Ones(n)) + (span / total) * W;
    out.slope = Vec::Constant(n, E) + (span / total) * e;
  }
  out.value(0) = p.phi_minus();
  out.value(n - 1) = p.phi_plus();
  return out;
}

PotentialProfile operator_K1(const DensityProfile& rho, const PotentialProfile& phi, const Params& p) {
  if (p.field() > 0.0) throw NumericalError(ErrorKind::invalid_input, "K1 needs E <= 0");
  return PotentialProfile(rho.grid(), apply_operator(rho, phi.values(), derivative4(phi.values(), rho.grid()), p).value);
}

PotentialProfile operator_K2(const DensityProfile& rho, const PotentialProfile& phi, const Params& p) {
  if (!(p.field() > 0.0)) throw NumericalError(ErrorKind::invalid_input, "K2 needs 0 < E < E0");
  return PotentialProfile(rho.grid(), apply_operator(rho, phi.values(), derivative4(phi.values(), rho.grid()), p).value);
}

double el_residual(const DensityProfile& rho, const Vec& phi, const Params& p) {
  const Grid& grid = rho.grid();
  const Vec d1 = derivative4(phi, grid);
  const Vec d2 = second_derivative4(phi, grid);
  double worst = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    const double r = d2(i) / (d1(i) * (d1(i) - p.field())) + vacancy(phi(i)) - rho[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

ELSolution solve_phi(const DensityProfile& rho, const Params& p, const ELOptions& opt) {
  const Grid& grid = rho.grid();
  const Index n = grid.size();
  const double E = p.field();

  if (reversible(p)) {
    ELSolution s{rho, PotentialProfile(grid, affine_potential(grid, p)), Vec::Constant(n, p.E0())};
    s.residual = el_residual(rho, s.phi.values(), p);
    s.branch = ELBranch::reversible;
    return s;
  }
  require_subcritical(p);

  Vec phi, slope;
  if (opt.warm_start && opt.warm_start->phi.grid() == grid) {
    phi = opt.warm_start->phi.values();
    slope = opt.warm_start->slope;
  } else {
    phi = affine_potential(grid, p);
    slope = Vec::Constant(n, p.E0());
  }

  double omega = opt.omega;
  double previous = std::numeric_limits<double>::infinity();
  double best = previous;
  int it = 0;
  double increment = previous;
  for (; it < opt.max_iter; ++it) {
    const KImage k = apply_operator(rho, phi, slope, p);
    increment = (k.value - phi).cwiseAbs().maxCoeff();
    best = std::min(best, increment);
    if (increment <= opt.tol) {
      phi = k.value;
      slope = k.slope;
      break;
    }
    if (increment > previous) omega = std::max(0.5 * omega, opt.min_omega);
    previous = increment;
    phi = (1.0 - omega) * phi + omega * k.value;
    slope = (1.0 - omega) * slope + omega * k.slope;
  }
  if (!(increment <= opt.tol)) {
    std::ostringstream os;
    os << "fixed-point iteration did not converge in " << opt.max_iter << " steps, best increment " << best;
    throw NumericalError(ErrorKind::no_convergence, os.str(), best);
  }

  ELSolution s{rho, PotentialProfile(grid, phi), slope};
  s.residual = el_residual(rho, phi, p);
  s.increment = increment;
  s.iterations = it + 1;
  s.omega = omega;
  s.branch = E <= 0.0 ? ELBranch::K1 : ELBranch::K2;
  return s;
}

namespace {

// Trajectory of the first-order system for one value of the shooting variable.
struct Shot {
  bool blown = false;  // v reached 0, i.e. phi' became infinite
  Vec phi;
};

class Shooter {
 public:
  Shooter(const DensityProfile& rho, const Params& p) : grid_(rho.grid()), E_(p.field()), phi0_(p.phi_minus()) {
    const Index n = grid_.size();
    rho_node_ = rho.values();
    rho_mid_.resize(n - 1);
    for (Index i = 0; i + 1 < n; ++i)
      rho_mid_(i) = std::clamp(interpolate_cubic(grid_, rho_node_, grid_.node(i) + 0.5 * grid_.spacing()), 0.0, 1.0);
  }

  // phi' as a function of the shooting variable; NaN once v >= 0.
  double slope(double v) const {
    if (!(v < 0.0)) return NAN;
    if (E_ == 0.0) return -1.0 / v;
    return -E_ / std::expm1(E_ * v);
  }

  Shot run(double s) const {
    const Index n = grid_.size();
    const double h = grid_.spacing();
    Shot shot;
    shot.phi.resize(n);
    double phi = phi0_, v = s;
    shot.phi(0) = phi;
    auto rhs_v = [](double r, double ph) { return r - vacancy(ph); };
    for (Index i = 0; i + 1 < n; ++i) {
      const double r0 = rho_node_(i), rm = rho_mid_(i), r1 = rho_node_(i + 1);
      const double a1 = slope(v), b1 = rhs_v(r0, phi);
      const double a2 = slope(v + 0.5 * h * b1), b2 = rhs_v(rm, phi + 0.5 * h * a1);
      const double a3 = slope(v + 0.5 * h * b2), b3 = rhs_v(rm, phi + 0.5 * h * a2);
      const double a4 = slope(v + h * b3), b4 = rhs_v(r1, phi + h * a3);
      if (!std::isfinite(a1 + a2 + a3 + a4)) {
        shot.blown = true;
        return shot;
      }
      phi += h * (a1 + 2 * a2 + 2 * a3 + a4) / 6.0;
      v += h * (b1 + 2 * b2 + 2 * b3 + b4) / 6.0;
      if (!std::isfinite(phi)) {
        shot.blown = true;
        return shot;
      }
      shot.phi(i + 1) = phi;
    }
    return shot;
  }

 private:
  Grid grid_;
  double E_;
  double phi0_;
  Vec rho_node_;
  Vec rho_mid_;
};

}  // namespace

ShootingResult shooting_oracle(const DensityProfile& rho, const Params& p, double start) {
  require_subcritical(p);
  if (!(start < 0.0)) throw NumericalError(ErrorKind::invalid_input, "shooting start must be negative");
  const Shooter shooter(rho, p);
  const double target = p.phi_plus();
  const Index last = rho.grid().size() - 1;
  auto over = [&](const Shot& s) { return s.blown || s.phi(last) > target; };

  double lo = start, hi = start;
  Shot shot = shooter.run(start);
  if (over(shot)) {
    for (int k = 0;; ++k) {
      if (k > 200) throw NumericalError(ErrorKind::bracket_not_found, "shooting: no undershooting start");
      hi = lo;
      lo *= 2.0;
      if (!over(shooter.run(lo))) break;
    }
  } else {
    for (int k = 0;; ++k) {
      if (k > 1100) throw NumericalError(ErrorKind::bracket_not_found, "shooting: no overshooting start");
      lo = hi;
      hi *= 0.5;
      if (over(shooter.run(hi))) break;
    }
  }

  int count = 0;
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lo) && count < 400) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (over(shooter.run(mid)) ? hi : lo) = mid;
    ++count;
  }
  Shot best = shooter.run(lo);
  double s = lo;
  const Shot upper = shooter.run(hi);
  if (!upper.blown && std::abs(upper.phi(last) - target) < std::abs(best.phi(last) - target)) {
    best = upper;
    s = hi;
  }
  if (best.blown) throw NumericalError(ErrorKind::bracket_not_found, "shooting: trajectory blew up");
  best.phi(last) = target;
  return {PotentialProfile(rho.grid(), best.phi), shooter.slope(s), s, count};
}

Vec linearized_sensitivity(const ELSolution& base, const Vec& drho, const Params& p) {
  const Grid& grid = base.phi.grid();
  const Index n = grid.size();
  if (drho.size() != n) throw NumericalError(ErrorKind::invalid_input, "direction size does not match grid");
  const Vec& phi = base.phi.values();
  const double h = grid.spacing(), E = p.field();

  Vec a(n - 1);
  for (Index i = 0; i + 1 < n; ++i) {
    const double d = (phi(i + 1) - phi(i)) / h;
    a(i) = 1.0 / (d * (d - E));
  }
  const Index m = n - 2;
  Vec sub(m), diag(m), super(m), rhs(m);
  for (Index k = 0; k < m; ++k) {
    const Index i = k + 1;
    const double ep = std::exp(-std::abs(phi(i)));
    const double c = ep / ((1.0 + ep) * (1.0 + ep));
    sub(k) = a(i - 1) / (h * h);
    super(k) = a(i) / (h * h);
    diag(k) = -(a(i - 1) + a(i)) / (h * h) - c;
    rhs(k) = drho(i);
  }
  Vec psi = Vec::Zero(n);
  psi.segment(1, m) = solve_tridiagonal(sub, diag, super, rhs);
  return psi;
}

}  // namespace wasep
