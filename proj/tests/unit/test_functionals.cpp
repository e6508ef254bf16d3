#include "wasep/elgp.hpp"
#include "wasep/functionals.hpp"
#include "wasep/numerics.hpp"
#include "wasep/stationary.hpp"
#include "wasep/verify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wasep;

namespace {

const Params kBase(0.0, 0.2, 0.8);
const Grid kGrid(401);

double local(double r, double phi) { return bernoulli_entropy(r) + (1.0 - r) * phi - std::log1p(std::exp(phi)); }

double slope_term(double x, double E) {
  return E == 0.0 ? std::log(x) + 1.0 : (xlogx(x) - xlogx(x - E)) / E;
}

template <typename F>
double integrate(F f) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0, 12, 1e-14);
}

// Smooth trial pair with phi' > 0 everywhere and the correct boundary values.
struct TrialPair {
  double rho(double u) const { return 0.5 + 0.2 * std::sin(2.0 * u); }
  double phi(double u) const { return mid + E0 * u + 0.3 * (1.0 - u * u); }
  double dphi(double u) const { return E0 - 0.6 * u; }
  double mid, E0;
};

PotentialProfile sample_phi(const Grid& g, const TrialPair& t) {
  return PotentialProfile(g, g.nodes().unaryExpr([&](double u) { return t.phi(u); }));
}

// Random potential in F_E: affine part plus a small interior bump keeping phi' > max(0, E) + 0.1.
PotentialProfile random_potential(std::mt19937_64& gen, const Params& p) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double a = 0.15 * U(gen) * (p.E0() - std::max(0.0, p.field()) - 0.1);
  const double k = std::floor(1.0 + 3.0 * (U(gen) + 1.0) / 2.0);
  const double mid = 0.5 * (p.phi_minus() + p.phi_plus());
  return PotentialProfile(kGrid, kGrid.nodes().unaryExpr([&](double u) {
    return mid + p.E0() * u + a * std::sin(k * M_PI * (u + 1.0) / 2.0) / k;
  }));
}

// Exact maximum of sum_i w_i f_i(phi_i) over nondecreasing phi on an L-level lattice.
double monotone_lattice_max(const DensityProfile& rho, const Params& p, int L) {
  const Vec w = quadrature_weights(rho.grid());
  const double A_a = asymmetric_constants(p).A_a;
  std::vector<double> best(L, 0.0);
  for (Index i = 0; i < rho.grid().size(); ++i) {
    double run = -INFINITY;
    for (int l = 0; l < L; ++l) {
      const double phi = p.phi_minus() + (p.phi_plus() - p.phi_minus()) * l / (L - 1.0);
      run = std::max(run, best[l]);
      best[l] = run + w(i) * (local(rho[i], phi) - A_a);
    }
  }
  return *std::max_element(best.begin(), best.end());
}

}  // namespace

TEST(Functionals, StationaryPairHasZeroValue) {
  for (double E : {-10.0, -1.0, 0.0, 0.9 * kBase.E0()}) {
    const Params p = kBase.with_field(E);
    const StationaryState s = solve_stationary(p, kGrid);
    EXPECT_LE(std::abs(G_E(s.rho_bar, s.phi_bar, p)), 1e-6) << "E=" << E;
    const RateReport r = S_E(s.rho_bar, p);
    EXPECT_LE(r.value, 1e-6) << "E=" << E;
    EXPECT_GE(r.value, -1e-8);
  }
}

TEST(Functionals, StationaryTrialGivesRelativeEntropy) {
  std::mt19937_64 gen(7);
  for (double E : {-4.0, 0.5}) {
    const Params p = kBase.with_field(E);
    const StationaryState s = solve_stationary(p, kGrid);
    for (int t = 0; t < 5; ++t) {
      const DensityProfile rho = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
      EXPECT_NEAR(G_E(rho, s.phi_bar, p), relative_entropy(rho, s.rho_bar.values()), 1e-6);
    }
  }
}

TEST(Functionals, GEMatchesAdaptiveQuadrature) {
  for (double E : {-3.0, 0.4}) {
    const Params p = kBase.with_field(E);
    const TrialPair t{0.5 * (p.phi_minus() + p.phi_plus()), p.E0()};
    const DensityProfile rho = DensityProfile::from_function(kGrid, [&](double u) { return t.rho(u); });
    const double A = field_constants(p).A_E;
    const double oracle = integrate([&](double u) { return local(t.rho(u), t.phi(u)) + slope_term(t.dphi(u), E) - A; });
    EXPECT_NEAR(G_E(rho, sample_phi(kGrid, t), p, A), oracle, 1e-6) << "E=" << E;
  }
}

TEST(Functionals, GZeroIsTheContinuousLimit) {
  const TrialPair t{0.5 * (kBase.phi_minus() + kBase.phi_plus()), kBase.E0()};
  const DensityProfile rho = DensityProfile::from_function(kGrid, [&](double u) { return t.rho(u); });
  const PotentialProfile phi = sample_phi(kGrid, t);
  const double g0 = G_0(rho, phi, kBase);
  const double A0 = std::log(0.3) + 1.0;
  EXPECT_NEAR(g0, integrate([&](double u) { return local(t.rho(u), t.phi(u)) + std::log(t.dphi(u)) + 1.0 - A0; }), 1e-6);
  for (double E : {-1e-4, 1e-4}) {
    const Params p = kBase.with_field(E);
    EXPECT_LE(std::abs(G_E(rho, phi, p, field_constants(p).A_E) - g0), 1e-3) << "E=" << E;
  }
  const StationaryState s = solve_stationary(kBase, kGrid);
  EXPECT_LE(std::abs(G_0(s.rho_bar, s.phi_bar, kBase)), 1e-6);
}

TEST(Functionals, GERejectsPotentialsOutsideTheDomain) {
  const PotentialProfile flat(kGrid, Vec::Zero(401));
  const DensityProfile rho(kGrid, Vec::Constant(401, 0.5));
  try {
    G_E(rho, flat, kBase.with_field(-1.0));
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}

TEST(Functionals, RelativeEntropyLowerBound) {
  std::mt19937_64 gen(11);
  for (double E : {-10.0, -2.0, 0.0, 0.9 * kBase.E0()}) {
    const Params p = kBase.with_field(E);
    const StationaryState s = solve_stationary(p, kGrid);
    for (int t = 0; t < 20; ++t) {
      const DensityProfile rho = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
      const double S = S_E(rho, p).value;
      EXPECT_GE(S, relative_entropy(rho, s.rho_bar.values()) - 1e-8) << "E=" << E;
      EXPECT_TRUE(std::isfinite(S));
    }
  }
}

TEST(Functionals, MaximalityProbe) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Params p = kBase.with_field(-2.0);
  const double A = field_constants(p).A_E;
  const DensityProfile rho = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
  const RateReport r = S_E(rho, p);
  const double top = G_E(rho, *r.maximizer, p, A);
  for (int t = 0; t < 10; ++t) {
    const double a = U(gen), b = U(gen);
    const Vec eta = kGrid.nodes().unaryExpr([&](double u) {
      return (1.0 - u * u) * (a + b * u);
    });
    const PotentialProfile moved(kGrid, r.maximizer->values() + 1e-2 * eta);
    EXPECT_LE(G_E(rho, moved, p, A), top + 1e-8);
  }
}

TEST(Functionals, ConcavityInThePotential) {
  std::mt19937_64 gen(17);
  for (double E : {-5.0, 0.0, 0.5}) {
    const Params p = kBase.with_field(E);
    const double A = E == 0.0 ? std::log(0.3) + 1.0 : field_constants(p).A_E;
    for (int t = 0; t < 10; ++t) {
      const DensityProfile rho = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
      const PotentialProfile a = random_potential(gen, p), b = random_potential(gen, p);
      const PotentialProfile mid(kGrid, 0.5 * (a.values() + b.values()));
      EXPECT_GE(G_E(rho, mid, p, A), 0.5 * (G_E(rho, a, p, A) + G_E(rho, b, p, A)) - 1e-12);
      EXPECT_GE(G_a(rho, mid, p), 0.5 * (G_a(rho, a, p) + G_a(rho, b, p)) - 1e-12);
    }
  }
}

TEST(Functionals, ConvexityInTheDensity) {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Params p = kBase.with_field(-2.0);
  double largest = 0.0;
  for (int t = 0; t < 10; ++t) {
    const DensityProfile a = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
    const DensityProfile b = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
    const double l = U(gen);
    const DensityProfile m(kGrid, l * a.values() + (1.0 - l) * b.values());
    const double Sa = S_E(a, p).value, Sb = S_E(b, p).value;
    EXPECT_LE(S_E(m, p).value, l * Sa + (1.0 - l) * Sb + 1e-6);
    largest = std::max({largest, Sa, Sb});
  }
  RecordProperty("largest_S_E", std::to_string(largest));
}

TEST(Functionals, ReversibleFunctional) {
  const Params p = kBase.with_field(kBase.E0());
  const StationaryState s = solve_stationary(p, kGrid);
  EXPECT_LE(std::abs(S_E0(s.rho_bar, p)), 1e-14);
  const DensityProfile full(kGrid, Vec::Ones(401));
  const Vec minus_log = -s.rho_bar.values().array().log().matrix();
  EXPECT_NEAR(S_E0(full, p), quadrature4(minus_log, kGrid), 1e-14);

  const TrialPair t{0.0, 0.0};
  const DensityProfile rho = DensityProfile::from_function(kGrid, [&](double u) { return t.rho(u); });
  const double oracle = integrate([&](double u) {
    const double ref = density_of_potential(0.5 * p.phi_minus() * (1.0 - u) + 0.5 * p.phi_plus() * (1.0 + u));
    return bernoulli_relative_entropy(t.rho(u), ref);
  });
  EXPECT_NEAR(S_E0(rho, p), oracle, 1e-8);
  EXPECT_NEAR(S_E(rho, p).value, S_E0(rho, p), 1e-15);
}

TEST(Functionals, AsymmetricConstantTrial) {
  std::mt19937_64 gen(23);
  const AsymmetricConstants ac = asymmetric_constants(kBase);
  const PotentialProfile c(kGrid, Vec::Constant(401, potential_of_density(ac.rho_bar_a)));
  const DensityProfile flat(kGrid, Vec::Constant(401, ac.rho_bar_a));
  EXPECT_NEAR(G_a(flat, c, kBase), 0.0, 1e-14);
  EXPECT_NEAR(S_a(flat, kBase).value, 0.0, 1e-14);
  for (int t = 0; t < 20; ++t) {
    const DensityProfile rho = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
    const double bound = relative_entropy(rho, Vec::Constant(401, ac.rho_bar_a));
    EXPECT_NEAR(G_a(rho, c, kBase), bound, 1e-12);
    EXPECT_GE(S_a(rho, kBase).value, bound - 1e-12);
  }
}

TEST(Functionals, AsymmetricPointwiseMaximizer) {
  // rho decreasing keeps logit((1 - rho)/rho) increasing and inside (phi_-, phi_+).
  const DensityProfile rho = DensityProfile::from_function(kGrid, [](double u) { return 0.5 - 0.2 * u; });
  const RateReport r = S_a(rho, kBase);
  const Vec star = rho.values().unaryExpr([](double x) { return std::log((1.0 - x) / x); });
  EXPECT_LT(sup_distance(r.maximizer->values(), star), 1e-12);
  const double A_a = asymmetric_constants(kBase).A_a;
  const double oracle = integrate([&](double u) {
    const double x = 0.5 - 0.2 * u;
    return local(x, std::log((1.0 - x) / x)) - A_a;
  });
  EXPECT_NEAR(r.value, oracle, 1e-8);
}

TEST(Functionals, AsymmetricMaximizerIsAMonotoneStaircase) {
  std::mt19937_64 gen(29);
  for (int t = 0; t < 10; ++t) {
    const DensityProfile rho = random_smooth_profile(kGrid, gen, 0.2, 0.8, false);
    const Vec phi = S_a(rho, kBase).maximizer->values();
    for (Index i = 1; i < 401; ++i) EXPECT_GE(phi(i), phi(i - 1));
    EXPECT_GE(phi.minCoeff(), kBase.phi_minus());
    EXPECT_LE(phi.maxCoeff(), kBase.phi_plus());
  }
}

TEST(Functionals, AsymmetricMaximumMatchesMonotoneDynamicProgram) {
  std::mt19937_64 gen(31);
  const Grid coarse(21);
  for (int t = 0; t < 10; ++t) {
    const DensityProfile rho = random_smooth_profile(coarse, gen, 0.2, 0.8, false);
    const double pav = S_a(rho, kBase).value;
    const double lattice = monotone_lattice_max(rho, kBase, 20001);
    EXPECT_GE(pav, lattice - 1e-12);
    EXPECT_LE(pav - lattice, 1e-6);
  }
}

TEST(Functionals, IsotonicRegression) {
  Vec y(3), w = Vec::Ones(3);
  y << 3.0, 1.0, 2.0;
  EXPECT_LT(sup_distance(isotonic_regression(y, w), Vec::Constant(3, 2.0)), 1e-15);
  y << 1.0, 3.0, 2.0;
  w << 1.0, 1.0, 3.0;
  Vec expect(3);
  expect << 1.0, 2.25, 2.25;
  EXPECT_LT(sup_distance(isotonic_regression(y, w), expect), 1e-15);
  const Vec inc = Vec::LinSpaced(5, 0.0, 1.0);
  EXPECT_EQ(isotonic_regression(inc, Vec::Ones(5)), inc);
}

TEST(Functionals, QuadratureWeights) {
  for (Index M : {3, 7, 8, 21, 401}) {
    const Grid g(M);
    const Vec w = quadrature_weights(g);
    EXPECT_GT(w.minCoeff(), 0.0);
    EXPECT_NEAR(w.sum(), 2.0, 1e-13);
    const Vec f = g.nodes().unaryExpr([](double u) { return std::exp(u); });
    EXPECT_NEAR(w.dot(f), quadrature4(f, g), 1e-13);
  }
}
