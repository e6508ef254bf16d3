#include "wasep/asymlimit.hpp"
#include "wasep/functionals.hpp"
#include "wasep/numerics.hpp"
#include "wasep/stationary.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wasep;

namespace {

const Params kBase(-2.0, 0.2, 0.8);
const std::vector<double> kSweep{-3.0, -10.0, -30.0, -100.0, -300.0};

double sine_profile(double u) { return 0.5 + 0.3 * std::sin(M_PI * u); }
double half(double) { return 0.5; }
double falling(double u) { return 0.5 - 0.3 * u; }

const std::vector<ProfileFunction>& family() {
  static const std::vector<ProfileFunction> f{
      sine_profile, half, [](double u) { return 0.5 + 0.25 * u; }, falling,
      [](double u) { return 0.4 + 0.2 * std::cos(2.0 * M_PI * u); }};
  return f;
}

}  // namespace

TEST(AsymLimit, GridSizeFollowsTheLayerWidth) {
  EXPECT_EQ(sweep_grid_size(-3.0), 401);
  EXPECT_EQ(sweep_grid_size(-20.0), 401);
  EXPECT_EQ(sweep_grid_size(-100.0), 2001);
  EXPECT_EQ(sweep_grid_size(-300.0), 6001);
}

TEST(AsymLimit, AuxiliaryConstantConverges) {
  const auto rows = gamma_limit_sweep(half, kBase, kSweep, 4);
  double prev = INFINITY;
  for (const GammaLimitRow& r : rows) {
    ASSERT_TRUE(r.error.empty()) << r.error;
    EXPECT_DOUBLE_EQ(r.A_a, std::log(0.25));
    const double err = std::abs(r.A_shift - r.A_a);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LE(prev / std::abs(std::log(0.25)), 0.01);
}

TEST(AsymLimit, StationaryAsymmetricProfileIsTheCommonMinimizer) {
  const auto rows = gamma_limit_sweep(half, kBase, kSweep, 4);
  double prev = INFINITY;
  for (const GammaLimitRow& r : rows) {
    EXPECT_NEAR(r.S_a, 0.0, 1e-14);
    EXPECT_GT(r.S_E, 0.0);
    EXPECT_LT(r.S_E, prev);
    prev = r.S_E;
  }
  EXPECT_LT(prev, 0.01);
}

// One sweep per profile of the family, shared by every check below.
TEST(AsymLimit, FamilySweep) {
  std::vector<double> inf_E(kSweep.size(), INFINITY);
  double inf_a = INFINITY;
  for (std::size_t k = 0; k < family().size(); ++k) {
    SCOPED_TRACE("profile " + std::to_string(k));
    const ProfileFunction& f = family()[k];
    const auto rows = gamma_limit_sweep(f, kBase, kSweep, 4);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const GammaLimitRow& r = rows[j];
      ASSERT_TRUE(r.error.empty()) << r.error;
      EXPECT_NEAR(r.gap, r.S_E - r.S_a, 1e-15);

      // Constant-sequence liminf: S_E(rho) >= G_a(rho, phi) for a fixed smooth increasing trial.
      const Grid g(r.M);
      const DensityProfile rho = DensityProfile::from_function(g, f);
      const PotentialProfile trial(g, g.nodes().unaryExpr([](double u) {
        return kBase.E0() * std::tanh(2.0 * u) / std::tanh(2.0);
      }));
      EXPECT_GE(r.S_E, G_a(rho, trial, kBase)) << "E=" << r.E;

      if (j > 0) {
        EXPECT_LT(std::abs(r.gap), std::abs(rows[j - 1].gap)) << "E=" << r.E;
        EXPECT_LT(r.jensen, rows[j - 1].jensen) << "E=" << r.E;
      }
      inf_E[j] = std::min(inf_E[j], r.S_E);
    }
    EXPECT_LE(rows.back().jensen, 0.05);
    inf_a = std::min(inf_a, rows.back().S_a);
  }
  // inf of S_a over the family is 0, attained at the constant 1/2 profile. Near E = -3 the
  // affine member is almost stationary, so only the tail of the sweep is monotone.
  EXPECT_NEAR(inf_a, 0.0, 1e-14);
  EXPECT_LT(inf_E[4] - inf_a, inf_E[3] - inf_a);
  EXPECT_LT(inf_E[3] - inf_a, inf_E[2] - inf_a);
  EXPECT_LT(inf_E[4] - inf_a, 0.01);
}

TEST(AsymLimit, FailingRowsAreRecordedAndTheSweepContinues) {
  const ProfileFunction invalid = [](double u) { return u > 0.5 ? 1.5 : 0.5; };
  const auto rows = gamma_limit_sweep(invalid, kBase, {-3.0, -10.0}, 2);
  ASSERT_EQ(rows.size(), 2u);
  for (const GammaLimitRow& r : rows) {
    EXPECT_FALSE(r.error.empty());
    EXPECT_TRUE(std::isnan(r.S_E));
    EXPECT_TRUE(std::isnan(r.gap));
  }
  EXPECT_THROW(gamma_limit_sweep(half, kBase, {-3.0, 0.5}), NumericalError);
}

TEST(AsymLimit, SweepIsIndependentOfThreadCount) {
  const auto a = gamma_limit_sweep(sine_profile, kBase, {-3.0, -10.0, -30.0}, 1);
  const auto b = gamma_limit_sweep(sine_profile, kBase, {-3.0, -10.0, -30.0}, 3);
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a[j].S_E, b[j].S_E);
    EXPECT_EQ(a[j].S_a, b[j].S_a);
    EXPECT_EQ(a[j].M, b[j].M);
  }
}

TEST(AsymLimit, WeakTestFamily) {
  const auto& fam = weak_test_family();
  ASSERT_EQ(fam.size(), 12u);
  for (const ProfileFunction& G : fam) {
    EXPECT_NEAR(G(1.0), 0.0, 1e-15);
    EXPECT_TRUE(std::isfinite(G(-1.0)));
  }
}

TEST(AsymLimit, StieltjesIntegral) {
  const Grid g(2001);
  const PotentialProfile affine(g, g.nodes());
  const ProfileFunction one = [](double) { return 1.0; };
  EXPECT_NEAR(stieltjes_integral(one, affine, -3.0), 1.0 - (-3.0), 1e-12);
  // int (1 - u) du over [-1, 1] = 2, plus the jump of size 1 at u = -1 weighted by G(-1) = 2.
  const ProfileFunction G = [](double u) { return 1.0 - u; };
  EXPECT_NEAR(stieltjes_integral(G, affine, -2.0), 2.0 + 2.0, 1e-12);
  EXPECT_EQ(weak_distance(affine, affine, -1.0), 0.0);
  const PotentialProfile lifted(g, g.nodes().array() + 0.1);
  EXPECT_NEAR(weak_distance(affine, lifted, -1.0), weak_distance(lifted, affine, -1.0), 1e-15);
  EXPECT_GT(weak_distance(affine, lifted, -1.0), 0.0);
}

TEST(AsymLimit, MaximizersConvergeWeakly) {
  for (const ProfileFunction& f : {ProfileFunction(half), ProfileFunction(sine_profile)}) {
    const auto rows = maximizer_convergence(f, kBase, kSweep, 4);
    for (std::size_t j = 1; j < rows.size(); ++j) {
      ASSERT_TRUE(rows[j].error.empty()) << rows[j].error;
      EXPECT_LT(rows[j].weak_distance, rows[j - 1].weak_distance);
      EXPECT_LT(rows[j].l1_distance, rows[j - 1].l1_distance);
      EXPECT_LT(rows[j].layer_width, rows[j - 1].layer_width);
    }
    // The layers keep phi_E(1) = phi_+ while the limit may jump, so the sup distance does not shrink.
    EXPECT_GT(rows.back().sup_distance, 0.5);
  }
}

TEST(AsymLimit, MonotoneProfileConvergesPointwise) {
  // rho decreasing: the limit maximizer is continuous and pinned inside (phi_-, phi_+).
  const auto rows = maximizer_convergence(falling, kBase, kSweep, 4);
  for (std::size_t j = 1; j < rows.size(); ++j) EXPECT_LT(rows[j].sup_distance, rows[j - 1].sup_distance);
  EXPECT_EQ(rows.back().layer_width, 0.0);
  EXPECT_LT(rows.back().sup_distance, 0.02);
}
