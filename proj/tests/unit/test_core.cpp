#include "wasep/core.hpp"
#include "wasep/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wasep;

namespace {

Vec sample(const Grid& grid, double (*f)(double)) { return grid.nodes().unaryExpr(f); }

}  // namespace

TEST(Params, DerivedPotentialsAndThreshold) {
  const Params p(-2.0, 0.2, 0.8);
  EXPECT_DOUBLE_EQ(p.phi_minus(), std::log(0.25));
  EXPECT_DOUBLE_EQ(p.phi_plus(), std::log(4.0));
  EXPECT_NEAR(p.E0(), std::log(4.0), 1e-15);
  EXPECT_GT(p.E0(), 0.0);
  EXPECT_EQ(p.with_field(1.0).field(), 1.0);
}

TEST(Params, RejectsUnorderedOrDegenerateReservoirs) {
  EXPECT_THROW(Params(0.0, 0.8, 0.2), NumericalError);
  EXPECT_THROW(Params(0.0, 0.0, 0.5), NumericalError);
  EXPECT_THROW(Params(0.0, 0.5, 1.0), NumericalError);
  EXPECT_THROW(Params(NAN, 0.2, 0.8), NumericalError);
  try {
    Params(0.0, 0.5, 0.5);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(Grid, SpacingAndStrictlyIncreasingNodes) {
  EXPECT_THROW(Grid(2), NumericalError);
  const Grid g(401);
  EXPECT_DOUBLE_EQ(g.spacing(), 2.0 / 400.0);
  const Vec x = g.nodes();
  EXPECT_EQ(x(0), -1.0);
  EXPECT_EQ(x(400), 1.0);
  for (Index i = 1; i < x.size(); ++i) EXPECT_GT(x(i), x(i - 1));
}

TEST(Profiles, DensityValuesMustLieInUnitInterval) {
  const Grid g(5);
  EXPECT_NO_THROW(DensityProfile(g, Vec::LinSpaced(5, 0.0, 1.0)));
  EXPECT_THROW(DensityProfile(g, Vec::Constant(5, 1.1)), NumericalError);
  EXPECT_THROW(DensityProfile(g, Vec::Constant(4, 0.5)), NumericalError);
}

TEST(Profiles, SpacetimePathRequiresIncreasingTimes) {
  const Grid g(5);
  EXPECT_THROW(SpacetimePath(g, {0.0, 0.0}, Mat::Constant(5, 2, 0.5)), NumericalError);
  const SpacetimePath path(g, {0.0, 0.5, 2.0}, Mat::Constant(5, 3, 0.5));
  EXPECT_DOUBLE_EQ(path.horizon(), 2.0);
  const SpacetimePath s = path.shifted(3.0);
  EXPECT_DOUBLE_EQ(s.times().front(), 3.0);
  const SpacetimePath r = path.reversed();
  EXPECT_DOUBLE_EQ(r.times()[1], 1.5);
}

TEST(Quadrature, Examples) {
  for (Index M : {3, 8, 401}) {
    const Grid g(M);
    EXPECT_NEAR(quadrature(Vec::Ones(M), g), 2.0, 1e-14);
    EXPECT_NEAR(quadrature4(Vec::Ones(M), g), 2.0, 1e-14);
    EXPECT_NEAR(quadrature(g.nodes(), g), 0.0, 1e-14);
  }
  const Grid g(401);
  const Vec u2 = g.nodes().array().square();
  EXPECT_NEAR(quadrature(u2, g), 2.0 / 3.0, 1e-4);
  EXPECT_NEAR(quadrature4(u2, g), 2.0 / 3.0, 1e-12);
}

TEST(Quadrature, LinearAndMonotone) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Grid g(101);
  for (int t = 0; t < 20; ++t) {
    Vec a(101), b(101);
    for (Index i = 0; i < 101; ++i) {
      a(i) = U(gen);
      b(i) = a(i) + 0.5 * (U(gen) + 1.0);
    }
    const double c = U(gen);
    EXPECT_NEAR(quadrature(a + c * b, g), quadrature(a, g) + c * quadrature(b, g), 1e-13);
    EXPECT_LE(quadrature(a, g), quadrature(b, g));
    EXPECT_LE(quadrature4(a, g), quadrature4(b, g));
  }
}

TEST(Derivative, Examples) {
  const Grid g(401);
  EXPECT_LT(derivative(Vec::Constant(401, 3.0), g).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((derivative(g.nodes(), g) - Vec::Ones(401)).cwiseAbs().maxCoeff(), 1e-12);
  const Vec s = sample(g, [](double u) { return std::sin(u); });
  const Vec c = sample(g, [](double u) { return std::cos(u); });
  EXPECT_LT(sup_distance(derivative(s, g), c), 1e-4);
  EXPECT_LT(sup_distance(derivative4(s, g), c), 1e-9);
  EXPECT_LT(sup_distance(second_derivative4(s, g), -s), 1e-7);
}

TEST(Derivative, IntegralOfDerivativeIsIncrement) {
  for (Index M : {51, 101, 201}) {
    const Grid g(M);
    const Vec f = sample(g, [](double u) { return std::exp(u) * std::sin(2.0 * u); });
    const double err = std::abs(quadrature(derivative(f, g), g) - (f(M - 1) - f(0)));
    EXPECT_LT(err, 20.0 * g.spacing() * g.spacing());
  }
}

TEST(Numerics, CumulativeIntegralOrder) {
  double prev = 0.0;
  for (Index M : {41, 81, 161}) {
    const Grid g(M);
    const Vec f = sample(g, [](double u) { return std::cos(3.0 * u); });
    const Vec F = sample(g, [](double u) { return (std::sin(3.0 * u) + std::sin(3.0)) / 3.0; });
    const double err = sup_distance(cumulative_integral4(f, g), F);
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 12.0);
    }
    prev = err;
  }
}

TEST(Numerics, TridiagonalSolve) {
  const Index n = 6;
  Vec sub = Vec::Constant(n, -1.0), diag = Vec::Constant(n, 3.0), super = Vec::Constant(n, -1.0);
  const Vec x = Vec::LinSpaced(n, 1.0, 2.0);
  Vec rhs = diag.cwiseProduct(x);
  for (Index i = 0; i < n; ++i) {
    if (i > 0) rhs(i) += sub(i) * x(i - 1);
    if (i + 1 < n) rhs(i) += super(i) * x(i + 1);
  }
  EXPECT_LT(sup_distance(solve_tridiagonal(sub, diag, super, rhs), x), 1e-14);
  diag(0) = 0.0;
  EXPECT_THROW(solve_tridiagonal(sub, diag, super, rhs), NumericalError);
}

TEST(Numerics, TimeDerivativeExactForQuadratics) {
  const std::vector<double> t{0.0, 0.1, 0.3, 0.35, 0.7};
  Mat v(1, 5);
  for (int k = 0; k < 5; ++k) v(0, k) = t[k] * t[k] - t[k];
  const Mat d = time_derivative(t, v);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(d(0, k), 2.0 * t[k] - 1.0, 1e-12);
  EXPECT_NEAR(time_integral(t, Vec::Ones(5)), 0.7, 1e-15);
}

TEST(Elementary, MobilityExamples) {
  EXPECT_EQ(mobility(0.0), 0.0);
  EXPECT_DOUBLE_EQ(mobility(0.5), 0.25);
  EXPECT_NEAR(mobility(0.2), 0.16, 1e-15);
  EXPECT_THROW(mobility(1.5), NumericalError);
}

TEST(Elementary, LogisticLogitPair) {
  EXPECT_DOUBLE_EQ(density_of_potential(0.0), 0.5);
  EXPECT_NEAR(potential_of_density(0.8), std::log(4.0), 1e-15);
  EXPECT_NEAR(potential_of_density(0.8), 1.386294, 1e-6);
  double prev = -INFINITY;
  for (int k = 1; k <= 9; ++k) {
    const double r = 0.1 * k;
    const double phi = potential_of_density(r);
    EXPECT_GT(phi, prev);
    prev = phi;
    EXPECT_NEAR(density_of_potential(phi), r, 1e-12);
  }
  EXPECT_EQ(density_of_potential(1e4), 1.0);
  EXPECT_EQ(density_of_potential(-1e4), 0.0);
  EXPECT_THROW(potential_of_density(0.0), NumericalError);
}

TEST(Elementary, ClippedLogitCountsClippedNodes) {
  Vec r(4);
  r << 0.0, 0.3, 1.0, 0.7;
  Index clipped = 0;
  const Vec phi = potential_of_density_clipped(r, &clipped);
  EXPECT_EQ(clipped, 2);
  EXPECT_TRUE(phi.allFinite());
  EXPECT_NEAR(phi(0), std::log(kClipEpsilon), 1e-6);
}

TEST(Elementary, EntropyConventions) {
  EXPECT_EQ(xlogx(0.0), 0.0);
  EXPECT_EQ(bernoulli_entropy(1.0), 0.0);
  EXPECT_NEAR(bernoulli_relative_entropy(0.3, 0.3), 0.0, 1e-15);
  EXPECT_GT(bernoulli_relative_entropy(0.3, 0.6), 0.0);
  EXPECT_NEAR(bernoulli_relative_entropy(1.0, 0.8), -std::log(0.8), 1e-15);
}

TEST(Elementary, Interpolation) {
  const Grid g(11);
  const Vec cubic = sample(g, [](double u) { return u * u * u - u; });
  EXPECT_NEAR(interpolate_cubic(g, cubic, 0.137), std::pow(0.137, 3) - 0.137, 1e-14);
  EXPECT_NEAR(interpolate_linear(g, g.nodes(), -0.55), -0.55, 1e-15);
  EXPECT_NEAR(interpolate_linear(g, g.nodes(), 1.0), 1.0, 1e-15);
}
