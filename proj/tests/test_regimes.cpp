#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dgl/regimes.hpp"

namespace dgl {
namespace {

// Roots of B x^2 - A x + C by the textbook formula, kept separate from the library's stable form.
std::pair<double, double> QuadraticRoots(double a, double b, double c) {
  const double disc = a * a - 4 * b * c;
  return {(a + std::sqrt(disc)) / (2 * b), (a - std::sqrt(disc)) / (2 * b)};
}

TEST(Regimes, AnnulusRoots) {
  const auto r = classify_regime(ModelParams::nldgl(0.0, 0.0, 3.0), 0.1);
  EXPECT_EQ(r.case_label, RegimeCase::SupercriticalAnnulus);
  const auto [r1, r2] = QuadraticRoots(2.0, 2.0, 0.05);
  ASSERT_TRUE(r.r1 && r.r2);
  EXPECT_NEAR(*r.r1, r1, 1e-12);
  EXPECT_NEAR(*r.r2, r2, 1e-12);
  EXPECT_NEAR(*r.r1, 0.974342, 1e-6);
  EXPECT_NEAR(*r.r2, 0.025658, 1e-6);
  // Vieta.
  EXPECT_NEAR(*r.r1 + *r.r2, r.constants.a / r.constants.b, 1e-14);
  EXPECT_NEAR(*r.r1 * *r.r2, r.constants.c / r.constants.b, 1e-14);
  EXPECT_LT(*r.r2, *r.r1);
}

TEST(Regimes, Constants) {
  const auto k = riccati_constants(ModelParams::nldgl(0.0, 1.0, 2.0), 1.0);
  EXPECT_EQ(k.a, 1.0);
  EXPECT_NEAR(k.b, 2.0 * std::sqrt(2.0), 1e-15);
  EXPECT_EQ(k.c, 1.0);
  EXPECT_LT(k.d, 0.0);
  EXPECT_FALSE(k.k);
}

TEST(Regimes, SubcriticalHasNoRoots) {
  const auto r = classify_regime(ModelParams::nldgl(0.0, 0.5, 2.0), 1.0);
  EXPECT_EQ(r.case_label, RegimeCase::SubcriticalForcing);
  EXPECT_FALSE(r.r1);
  EXPECT_FALSE(r.r2);
}

TEST(Regimes, CriticalBoundary) {
  // (delta - 1)^3 = 8 at delta = 3, beta = 0, ||g||^2 = 1.
  const auto p = ModelParams::nldgl(0.0, 0.0, 3.0);
  EXPECT_EQ(classify_regime(p, 1.0).case_label, RegimeCase::Critical);
  EXPECT_EQ(classify_regime(p, std::nextafter(1.0, 2.0)).case_label, RegimeCase::SubcriticalForcing);
  EXPECT_EQ(classify_regime(p, std::nextafter(1.0, 0.0)).case_label, RegimeCase::SupercriticalAnnulus);
}

TEST(Regimes, DeltaAtMostOneRejected) {
  EXPECT_THROW(classify_regime(ModelParams::nldgl(0, 0, 1.0), 0.1), HypothesisError);
  EXPECT_THROW(riccati_constants(ModelParams::nldgl(0, 0, 0.5), 0.1), HypothesisError);
}

TEST(Regimes, RestrictedBallAndEntryTime) {
  // delta = 2, beta = 0: restricted radius^2 = 1/2, delta0 = 1 - 2 ||v0||^2.
  const auto r = classify_regime(ModelParams::nldgl(0.0, 0.0, 2.0), 0.01, 0.25, 1.0);
  EXPECT_DOUBLE_EQ(r.restricted_radius_sq, 0.5);
  ASSERT_TRUE(r.delta0);
  EXPECT_DOUBLE_EQ(*r.delta0, 0.5);
  ASSERT_TRUE(r.rho_sq_nldgl);
  EXPECT_DOUBLE_EQ(*r.rho_sq_nldgl, 0.02);
  ASSERT_TRUE(r.entry_time_nldgl);
  EXPECT_NEAR(*r.entry_time_nldgl, std::log((1.0 - 0.02) / (0.1 * 0.02)) / 0.5, 1e-12);
  EXPECT_EQ(r.entry_time, r.entry_time_nldgl);

  const auto outside = classify_regime(ModelParams::nldgl(0.0, 0.0, 2.0), 0.01, 0.75);
  EXPECT_FALSE(outside.delta0);
  EXPECT_FALSE(outside.notes.empty());
}

TEST(Regimes, LdglEntryTimeLog3) {
  // rate 1, R^2 = 1, rho^2 = 0.25, rho_tilde^2 = 0.5: log((1 - 0.25)/(0.5 - 0.25)) = log 3.
  const auto r = classify_regime(ModelParams::ldgl(0.0, 0.0, 2.0), 0.25, std::nullopt, 1.0, 2.0);
  ASSERT_TRUE(r.entry_time_ldgl);
  EXPECT_NEAR(*r.entry_time_ldgl, std::log(3.0), 1e-14);
  EXPECT_EQ(r.entry_time, r.entry_time_ldgl);
}

TEST(Regimes, EntryTimeUndefinedInsideBall) {
  const auto r = classify_regime(ModelParams::ldgl(0.0, 0.0, 2.0), 0.25, std::nullopt, 0.1);
  EXPECT_FALSE(r.entry_time_ldgl);
  const auto z = classify_regime(ModelParams::ldgl(0.0, 0.0, 2.0), 0.0, std::nullopt, 1.0);
  EXPECT_FALSE(z.entry_time_ldgl);
}

TEST(Regimes, NonEscapingRadii) {
  const auto r = classify_regime(ModelParams::nldgl(0.0, 0.0, 3.0), 0.1, std::nullopt, 0.5);
  const double rho1 = 2.0 * 0.0625 + 0.1 / 2.0;
  ASSERT_TRUE(r.nonescape_rho1);
  EXPECT_NEAR(*r.nonescape_rho1, rho1, 1e-15);
  EXPECT_NEAR(*r.nonescape_r0_sq_printed, rho1 * 0.1 / 2.0, 1e-15);
  EXPECT_NEAR(*r.nonescape_r0_sq_alt, rho1 / 2.0, 1e-15);
}

TEST(Regimes, RootsMonotoneInForcing) {
  double prev_r1 = std::numeric_limits<double>::infinity(), prev_r2 = 0.0;
  for (double g2 : {0.01, 0.05, 0.1, 0.3, 0.9}) {
    const auto r = classify_regime(ModelParams::nldgl(0.0, 0.0, 3.0), g2);
    ASSERT_TRUE(r.r1);
    EXPECT_LT(*r.r1, prev_r1);
    EXPECT_GT(*r.r2, prev_r2);
    prev_r1 = *r.r1;
    prev_r2 = *r.r2;
  }
}

TEST(Closeness, Constants) {
  const auto p2 = ModelParams::ldgl(0.0, 0.0, 2.0);
  const auto c = closeness_constants(p2, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(*c.c_limsup, 2.0);
  EXPECT_DOUBLE_EQ(*c.c_uniform, 3.0);

  const auto c1 = closeness_constants(ModelParams::ldgl(0.0, 0.0, 1.0), 1.0, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(*c1.c_finite_horizon, 5.0);

  const auto ch = closeness_constants(ModelParams::ldgl(0.0, 0.0, 0.5), 1.0, 1.0, 1.0, 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(*ch.c_finite_horizon, e + 4.0 * (e - 1.0), 1e-14);
  EXPECT_NEAR(*ch.c_finite_horizon, 9.5914, 1e-4);

  EXPECT_THROW(closeness_constants(ModelParams::ldgl(0.0, 0.0, 0.5), 1.0, 1.0, 1.0), HypothesisError);
}

TEST(Envelopes, GronwallAndBernoulli) {
  EXPECT_DOUBLE_EQ(gronwall_bound_ldgl(2.0, 1.0, 4.0, 0.0), 4.0);
  EXPECT_NEAR(gronwall_bound_ldgl(2.0, 1.0, 4.0, 60.0), 1.0, 1e-12);

  const auto r = classify_regime(ModelParams::nldgl(0.0, 0.0, 3.0), 0.1);
  const auto& k = r.constants;
  EXPECT_DOUBLE_EQ(bernoulli_envelope(k, *r.r2, 0.5, 0.0), 0.5);
  EXPECT_NEAR(bernoulli_envelope(k, *r.r2, 0.5, 40.0), *r.r2, 1e-12);
  EXPECT_EQ(bernoulli_envelope(k, *r.r2, *r.r2, 3.0), *r.r2);
  // The envelope solves w' = -A w + B w^2 + C; check by central differences.
  for (double t : {0.1, 0.5, 2.0}) {
    const double h = 1e-5;
    const double w = bernoulli_envelope(k, *r.r2, 0.5, t);
    const double dw = (bernoulli_envelope(k, *r.r2, 0.5, t + h) - bernoulli_envelope(k, *r.r2, 0.5, t - h)) / (2 * h);
    EXPECT_NEAR(dw, -k.a * w + k.b * w * w + k.c, 1e-7);
  }
}

}  // namespace
}  // namespace dgl
