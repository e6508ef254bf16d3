#include "wasep/dynamics.hpp"
#include "wasep/functionals.hpp"
#include "wasep/numerics.hpp"
#include "wasep/ratefn.hpp"
#include "wasep/stationary.hpp"
#include "wasep/verify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wasep;

namespace {

const Params kField(-2.0, 0.2, 0.8);

std::vector<double> uniform_times(int K, double t0, double t1) {
  std::vector<double> t(K);
  for (int k = 0; k < K; ++k) t[k] = t0 + (t1 - t0) * k / (K - 1.0);
  return t;
}

// pi(t, u) = base(u) + s(t) (1 - u^2) (a + b u), smooth in both variables.
SpacetimePath bump_path(const DensityProfile& base, double a, double b, int K, double T,
                        double (*s)(double)) {
  const Grid& g = base.grid();
  const std::vector<double> t = uniform_times(K, 0.0, T);
  Mat v(g.size(), K);
  for (int k = 0; k < K; ++k)
    for (Index i = 0; i < g.size(); ++i) {
      const double u = g.node(i);
      v(i, k) = base[i] + s(t[k]) * (1.0 - u * u) * (a + b * u);
    }
  return SpacetimePath(g, t, v);
}

double ramp(double t) { return t; }
double smooth_ramp(double t) { return std::sin(M_PI * t / 2.0); }

}  // namespace

TEST(RateFn, EnergyOfConstantPaths) {
  const Grid g(401);
  const DensityProfile rho_bar = solve_stationary(kField, g).rho_bar;
  const SpacetimePath still(g, uniform_times(11, 0.0, 2.0), rho_bar.values().replicate(1, 11));
  const Vec d = derivative4(rho_bar.values(), g);
  const Vec f = d.cwiseProduct(d).cwiseQuotient(mobility(rho_bar.values()));
  EXPECT_NEAR(energy_Q(still), 2.0 * 0.5 * quadrature4(f, g), 1e-12);

  const SpacetimePath flat(g, uniform_times(5, 0.0, 1.0), Mat::Constant(401, 5, 0.5));
  EXPECT_EQ(energy_Q(flat), 0.0);
}

TEST(RateFn, EnergyMatchesAdaptiveQuadrature) {
  const Grid g(401);
  auto pi = [](double t, double u) { return 0.5 + 0.2 * u + 0.1 * t * std::sin(2.0 * u); };
  auto dpi = [](double t, double u) { return 0.2 + 0.2 * t * std::cos(2.0 * u); };
  const std::vector<double> times = uniform_times(401, 0.0, 1.0);
  Mat v(401, 401);
  for (int k = 0; k < 401; ++k)
    for (Index i = 0; i < 401; ++i) v(i, k) = pi(times[k], g.node(i));
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double oracle = GK::integrate([&](double t) {
    return GK::integrate([&](double u) {
      const double r = pi(t, u), d = dpi(t, u);
      return 0.5 * d * d / (r * (1.0 - r));
    }, -1.0, 1.0, 10, 1e-13);
  }, 0.0, 1.0, 10, 1e-13);
  EXPECT_NEAR(energy_Q(SpacetimePath(g, times, v)) / oracle, 1.0, 1e-5);
}

TEST(RateFn, HydrodynamicPathsCostNothing) {
  PDEConfig cfg;
  cfg.grid = Grid(201);
  cfg.horizon = 1.0;
  const DensityProfile gamma = DensityProfile::from_function(cfg.grid, [](double u) {
    return 0.5 + 0.3 * u + 0.1 * std::cos(M_PI * u / 2.0);
  });
  const BurgersResult hydro = burgers_solve(gamma, kField, cfg);
  const CostBreakdown c = rate_I_T(hydro.path, gamma, kField);
  EXPECT_GE(c.I_T, 0.0);
  EXPECT_LE(c.I_T, 1e-6);
  EXPECT_GT(c.Q, 0.0);
  // Along hydrodynamics S_E decreases by exactly the chain-rule integral.
  EXPECT_LE(shift_identity_check(hydro.path, kField).error(), 1e-3);
}

TEST(RateFn, InitialMismatchAndDegenerateMobility) {
  const Grid g(51);
  const DensityProfile rho_bar = solve_stationary(kField, g).rho_bar;
  const SpacetimePath p = bump_path(rho_bar, 0.1, 0.0, 11, 1.0, ramp);
  const DensityProfile other(g, Vec::Constant(51, 0.5));
  EXPECT_EQ(rate_I_T(p, other, kField).I_T, kInfiniteCost);

  Mat v = Mat::Constant(51, 3, 0.5);
  v.col(2).head(11).setZero();  // chi = 0 at node 10 while pi' does not vanish there
  const SpacetimePath deg(g, {0.0, 0.5, 1.0}, v);
  const CostBreakdown c = rate_I_T(deg, deg.profile(0), kField);
  EXPECT_TRUE(c.degenerate);
  EXPECT_EQ(c.I_T, kInfiniteCost);
  EXPECT_EQ(energy_Q(deg), kInfiniteCost);
}

TEST(RateFn, DualityAndAttainment) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Grid g(201);
  const DensityProfile rho_bar = solve_stationary(kField, g).rho_bar;
  const SpacetimePath path = bump_path(rho_bar, 0.15, -0.1, 101, 1.0, smooth_ramp);
  const CostBreakdown c = rate_I_T(path, rho_bar, kField);
  ASSERT_TRUE(std::isfinite(c.I_T));
  EXPECT_GT(c.I_T, 0.0);

  EXPECT_EQ(variational_J_H(path, rho_bar, Mat::Zero(201, 101), kField), 0.0);
  EXPECT_NEAR(variational_J_H(path, rho_bar, c.H, kField), c.I_T, 1e-4);

  for (int trial = 0; trial < 10; ++trial) {
    const double a = U(gen), b = U(gen), w = 2.0 * U(gen);
    Mat H(201, 101);
    for (Index k = 0; k < 101; ++k)
      for (Index i = 0; i < 201; ++i) {
        const double u = g.node(i), t = path.times()[k];
        H(i, k) = (1.0 - u * u) * (a + b * u) * std::cos(w * t);
      }
    EXPECT_LE(variational_J_H(path, rho_bar, H, kField), c.I_T + 1e-6);
    // The quadratic functional is maximized at c.H: perturbations in any direction cost.
    EXPECT_LE(variational_J_H(path, rho_bar, c.H + 0.1 * H, kField), c.I_T + 1e-6);
  }
  EXPECT_THROW(variational_J_H(path, rho_bar, Mat::Zero(201, 5), kField), NumericalError);
}

TEST(RateFn, TimeShiftCovariance) {
  const Grid g(101);
  const DensityProfile rho_bar = solve_stationary(kField, g).rho_bar;
  const SpacetimePath path = bump_path(rho_bar, 0.1, 0.05, 51, 1.0, smooth_ramp);
  const double base = rate_I_T(path, rho_bar, kField).I_T;
  for (double dt : {-3.0, 0.5, 10.0}) {
    EXPECT_NEAR(rate_I_T(path.shifted(dt), rho_bar, kField).I_T, base, 1e-12 * (1.0 + base));
  }
}

TEST(RateFn, PathCostDominatesQuasiPotentialIncrement) {
  const Grid g(201);
  const DensityProfile rho_bar = solve_stationary(kField, g).rho_bar;
  for (auto s : {ramp, smooth_ramp}) {
    for (auto [a, b] : {std::pair{0.1, 0.0}, std::pair{-0.1, 0.2}, std::pair{0.2, -0.1}}) {
      const SpacetimePath path = bump_path(rho_bar, a, b, 101, 1.0, s);
      const CostBreakdown c = rate_I_T(path, rho_bar, kField, true);
      const double S_end = S_E(path.profile(100), kField).value;
      EXPECT_GE(c.I_T, S_end - 1e-3);
      ASSERT_TRUE(c.K_norm_sq && c.delta_S);
      EXPECT_NEAR(*c.delta_S, S_end, 1e-6);
      EXPECT_NEAR(c.I_T, *c.delta_S + 0.5 * *c.K_norm_sq, 1e-3);
      EXPECT_GE(*c.K_norm_sq, 0.0);
    }
  }
}

TEST(RateFn, JoiningBound) {
  const Grid g(201);
  const DensityProfile rho_bar = solve_stationary(kField, g).rho_bar;
  for (double a : {0.02, 0.05, 0.1}) {
    const DensityProfile target = DensityProfile::from_function(g, [&](double u) {
      return interpolate_linear(g, rho_bar.values(), u) + a * (1.0 - u * u);
    });
    const SpacetimePath path = straight_path(rho_bar, target, 51);
    const double I = rate_I_T(path, rho_bar, kField).I_T;
    const double c1 = c1_norm(target.values() - rho_bar.values(), g);
    EXPECT_LE(I, joining_cost_constant(rho_bar, target, kField) * c1 * c1);
  }
}

TEST(RateFn, HamiltonJacobiIdentity) {
  const Grid g(401);
  const StationaryState s = solve_stationary(kField, g);
  EXPECT_LE(hamilton_jacobi_residual(s.rho_bar, kField), 1e-10);
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    const DensityProfile rho = random_smooth_profile(g, gen, 0.2, 0.8, true);
    EXPECT_LE(hamilton_jacobi_residual(rho, kField), 1e-4);
  }
  auto residual_at = [](Index M) {
    const Grid gm(M);
    const DensityProfile rho = DensityProfile::from_function(gm, [](double u) {
      return 0.5 + 0.3 * u + 0.1 * std::sin(M_PI * (u + 1.0));
    });
    return hamilton_jacobi_residual(rho, kField);
  };
  const double a = residual_at(101), b = residual_at(201), c = residual_at(401);
  EXPECT_GT(a / b, 3.0);
  EXPECT_GT(b / c, 3.0);
}

TEST(RateFn, ShiftIdentity) {
  const Grid g(201);
  const DensityProfile rho_bar = solve_stationary(kField, g).rho_bar;
  const SpacetimePath still(g, uniform_times(5, 0.0, 1.0), rho_bar.values().replicate(1, 5));
  const ShiftIdentity zero = shift_identity_check(still, kField);
  EXPECT_LE(std::abs(zero.lhs), 1e-10);
  EXPECT_LE(std::abs(zero.rhs), 1e-10);

  OptimalPathConfig cfg;
  cfg.pde.grid = g;
  cfg.pde.horizon = 1.0;
  cfg.pde.output_dt = 0.01;
  const DensityProfile target = DensityProfile::from_function(g, [&](double u) {
    return interpolate_linear(g, rho_bar.values(), u) + 0.1 * std::cos(M_PI * u / 2.0);
  });
  const OptimalPath op = optimal_path(target, kField, cfg);
  const ShiftIdentity rev = shift_identity_check(op.reversed, kField);
  EXPECT_LE(rev.error(), 1e-3);
  EXPECT_GT(rev.lhs, 0.0);
}

TEST(RateFn, C1Norm) {
  const Grid g(201);
  const Vec f = g.nodes().unaryExpr([](double u) { return std::sin(u); });
  EXPECT_NEAR(c1_norm(f, g), std::sin(1.0) + 1.0, 1e-8);
}
