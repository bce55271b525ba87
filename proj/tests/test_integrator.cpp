#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dgl/integrator.hpp"
#include "dgl/regimes.hpp"

namespace dgl {
namespace {

IntegratorOptions Tight(double stride = 0.1) {
  IntegratorOptions o;
  o.tolerances = Tolerances::oracle();
  o.sample_stride = stride;
  return o;
}

TEST(SampleGrid, IncludesHorizon) {
  const auto g = ode::sample_grid(1.0, 0.1);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 1.0, 1e-15);
  EXPECT_EQ(ode::sample_grid(0.95, 0.1).size(), 10u);
}

TEST(Adaptive, ZeroSolutionStaysZero) {
  const auto tr = integrate_adaptive(LatticeState::window(8), ModelParams::ldgl(0.5, 0.5, 2.0), Forcing::zero(), 5.0,
                                     IntegratorOptions{});
  EXPECT_EQ(tr.status, RunStatus::Completed);
  EXPECT_FALSE(tr.blowup_time);
  for (double c : tr.chi) EXPECT_EQ(c, 0.0);
  EXPECT_EQ(tr.times.size(), 51u);
}

TEST(Adaptive, LinearDecayClosedForm) {
  // Single isolated site with alpha = beta = 0 and no nonlinearity: u' = (1 - delta - 2) u.
  ModelParams p{0.0, 0.0, 2.0, 0.0, 0.0};
  const auto tr = integrate_adaptive(LatticeState(0, {Complex(1.0, 0.0)}), p, Forcing::zero(), 3.0, Tight());
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    EXPECT_NEAR(tr.chi[i], std::exp(-6.0 * tr.times[i]), 1e-9) << tr.times[i];
}

TEST(Adaptive, MatchesRk4Reference) {
  const auto p = ModelParams::nldgl(0.7, 0.4, 1.5);
  const auto g = Forcing::single_site(0, 0.3);
  LatticeState u0 = LatticeState::window(20);
  u0[0] = Complex(0.6, 0.2);
  u0[1] = Complex(-0.3, 0.4);
  const auto a = integrate_adaptive(u0, p, g, 5.0, Tight());
  const auto r = integrate_reference_rk4(u0, p, g, 5.0, 1e-3, 0.1);
  ASSERT_EQ(a.chi.size(), r.chi.size());
  for (std::size_t i = 0; i < a.chi.size(); ++i) EXPECT_NEAR(a.chi[i], r.chi[i], 1e-8);
}

TEST(Adaptive, GronwallBoundLdgl) {
  const double delta = 2.0, g2 = 1.0, chi0 = 4.0;
  const auto tr = integrate_adaptive(LatticeState::unit(0, 64, 2.0), ModelParams::ldgl(0.5, 0.5, delta),
                                     Forcing::single_site(0, g2), 20.0, Tight());
  ASSERT_EQ(tr.status, RunStatus::Completed);
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    EXPECT_LE(tr.chi[i], gronwall_bound_ldgl(delta, g2, chi0, tr.times[i]) * (1 + 1e-6));
}

TEST(Adaptive, SelfConvergence) {
  const auto p = ModelParams::ldgl(0.3, 0.8, 1.2);
  const auto g = Forcing::single_site(0, 0.5);
  const auto u0 = LatticeState::unit(0, 32, 0.8);
  IntegratorOptions loose;
  loose.tolerances = {1e-9, 1e-9};
  IntegratorOptions tight;
  tight.tolerances = {1e-12, 1e-12};
  const auto a = integrate_adaptive(u0, p, g, 10.0, loose);
  const auto b = integrate_adaptive(u0, p, g, 10.0, tight);
  EXPECT_LE(std::sqrt(norm2(a.final_state - b.final_state)), 1e-6);
}

TEST(Adaptive, PureDiffusionIsMonotone) {
  // delta = 1, no nonlinearity, no forcing: d||u||^2/dt = -2 sum |u_{n+1}-u_n|^2 <= 0.
  ModelParams p{0.0, 0.0, 1.0, 0.0, 0.0};
  LatticeState u0 = LatticeState::window(16);
  u0[0] = 1.0;
  u0[3] = Complex(0.0, -2.0);
  const auto tr = integrate_adaptive(u0, p, Forcing::zero(), 10.0, Tight());
  for (std::size_t i = 1; i < tr.chi.size(); ++i) EXPECT_LE(tr.chi[i], tr.chi[i - 1] * (1 + 1e-12));
}

TEST(Adaptive, BlowUpDetected) {
  // gamma = -1 flips the cubic term; above |u| = 1 an isolated site grows without bound.
  ModelParams p{0.0, 0.0, 0.0, -1.0, 0.0};
  IntegratorOptions o;
  o.blowup_threshold = 1e6;
  const auto tr = integrate_adaptive(LatticeState(0, {Complex(1.5)}), p, Forcing::zero(), 10.0, o);
  EXPECT_EQ(tr.status, RunStatus::BlowUp);
  ASSERT_TRUE(tr.blowup_time);
  EXPECT_LT(*tr.blowup_time, 10.0);
  EXPECT_LT(tr.times.back(), *tr.blowup_time);
}

TEST(Adaptive, Deterministic) {
  const auto p = ModelParams::nldgl(0.2, 0.9, 2.5);
  const auto g = Forcing::single_site(1, 0.2);
  const auto u0 = LatticeState::unit(0, 40, Complex(0.5, 0.5));
  const auto a = integrate_adaptive(u0, p, g, 8.0, IntegratorOptions{});
  const auto b = integrate_adaptive(u0, p, g, 8.0, IntegratorOptions{});
  EXPECT_EQ(a.chi, b.chi);
  EXPECT_EQ(a.final_state, b.final_state);
}

TEST(Adaptive, RejectsBadArguments) {
  const auto u0 = LatticeState::unit(0, 4);
  EXPECT_THROW(integrate_adaptive(u0, ModelParams{}, Forcing::zero(), 0.0, IntegratorOptions{}),
               std::invalid_argument);
  IntegratorOptions bad;
  bad.tolerances.abs = 0.0;
  EXPECT_THROW(integrate_adaptive(u0, ModelParams{}, Forcing::zero(), 1.0, bad), std::invalid_argument);
  EXPECT_THROW(integrate_adaptive(u0, ModelParams{}, Forcing::single_site(9, 1.0), 1.0, IntegratorOptions{}),
               std::invalid_argument);
}

TEST(Riccati, ClosedForms) {
  // w' = -w, w(0) = 1.
  const auto dec = integrate_riccati(1.0, 0.0, 0.0, 1.0, 1.0);
  EXPECT_NEAR(dec.w.back(), std::exp(-1.0), 1e-6);
  for (std::size_t i = 0; i < dec.w.size(); ++i) EXPECT_NEAR(dec.w[i], std::exp(-dec.times[i]), 1e-6);
  EXPECT_FALSE(dec.blowup_time);

  // w' = w^2, w(0) = 1: w = 1/(1-t), blows up at t = 1.
  const auto blow = integrate_riccati(0.0, 1.0, 0.0, 1.0, 2.0);
  ASSERT_TRUE(blow.blowup_time);
  EXPECT_NEAR(*blow.blowup_time, 1.0, 0.01);
  for (std::size_t i = 0; i < blow.w.size(); ++i)
    if (blow.times[i] <= 0.9) {
      EXPECT_NEAR(blow.w[i], 1.0 / (1.0 - blow.times[i]), 1e-6);
    }
}

TEST(Riccati, ConvergesToSmallRoot) {
  const auto k = riccati_constants(ModelParams::nldgl(0.0, 0.0, 3.0), 0.1);
  const auto w = integrate_riccati(k.a, k.b, k.c, 0.5, 20.0);
  EXPECT_NEAR(w.w.back(), 0.025658, 1e-4);
}

TEST(Rk4, StrideMustDivide) {
  EXPECT_THROW(integrate_reference_rk4(LatticeState::unit(0, 2), ModelParams{}, Forcing::zero(), 1.0, 0.03, 0.1),
               std::invalid_argument);
}

}  // namespace
}  // namespace dgl
