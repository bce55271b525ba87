#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dgl/identities.hpp"
#include "dgl/lattice.hpp"

namespace dgl {
namespace {

LatticeState RandomState(std::mt19937_64& rng, int first, int size, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<Complex> v(static_cast<std::size_t>(size));
  for (auto& z : v) z = {nd(rng), nd(rng)};
  return LatticeState(first, v);
}

// Written out per system from the model equations, independent of evaluate_rhs.
std::vector<Complex> HandLdgl(const std::vector<Complex>& u, const std::vector<Complex>& g, double a, double b,
                              double d) {
  const std::size_t n = u.size();
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex up = i + 1 < n ? u[i + 1] : 0.0;
    const Complex um = i > 0 ? u[i - 1] : 0.0;
    out[i] = (1.0 - d) * u[i] + Complex(1.0, a) * ((up + um) - 2.0 * u[i]) -
             Complex(1.0, b) * ((1.0 * std::norm(u[i])) * u[i] + (0.0 * std::norm(u[i])) * (up + um)) + g[i];
  }
  return out;
}

std::vector<Complex> HandNldgl(const std::vector<Complex>& u, const std::vector<Complex>& g, double a, double b,
                               double d) {
  const std::size_t n = u.size();
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex up = i + 1 < n ? u[i + 1] : 0.0;
    const Complex um = i > 0 ? u[i - 1] : 0.0;
    out[i] = (1.0 - d) * u[i] + Complex(1.0, a) * ((up + um) - 2.0 * u[i]) -
             Complex(1.0, b) * ((0.0 * std::norm(u[i])) * u[i] + (0.5 * std::norm(u[i])) * (up + um)) + g[i];
  }
  return out;
}

TEST(DiscreteLaplacian, UnitImpulse) {
  const auto lap = discrete_laplacian(LatticeState::unit(0, 2));
  EXPECT_EQ(lap.first(), -3);
  EXPECT_EQ(lap.size(), 7u);
  EXPECT_EQ(lap.at(-1), Complex(1.0));
  EXPECT_EQ(lap.at(0), Complex(-2.0));
  EXPECT_EQ(lap.at(1), Complex(1.0));
  EXPECT_EQ(lap.at(2), Complex(0.0));
}

TEST(DiscreteLaplacian, ConstantInteriorVanishes) {
  LatticeState s(-5, std::vector<Complex>(11, Complex(2.0, -1.0)));
  const auto lap = discrete_laplacian(s);
  for (int n = -4; n <= 4; ++n) EXPECT_EQ(lap.at(n), Complex(0.0));
  EXPECT_EQ(lap.at(-5), Complex(-2.0, 1.0));
  EXPECT_EQ(lap.at(-6), Complex(2.0, -1.0));
}

TEST(DiscreteLaplacian, EmptyThrows) { EXPECT_THROW(discrete_laplacian(LatticeState{}), std::invalid_argument); }

TEST(DiscreteLaplacian, SelfAdjointNegativeBounded) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    const auto u = RandomState(rng, -20, 41);
    const auto v = RandomState(rng, -20, 41);
    const auto lu = discrete_laplacian(u), lv = discrete_laplacian(v);
    const double scale = std::sqrt(norm2(lu) * norm2(v)) + std::sqrt(norm2(u) * norm2(lv));
    EXPECT_LE(std::abs(inner(lu, v) - inner(u, lv)), 1e-12 * scale);
    const Complex luu = inner(lu, u);
    EXPECT_LE(luu.real(), 0.0);
    EXPECT_NEAR(luu.real(), -dirichlet_energy(u), 1e-12 * dirichlet_energy(u));
    EXPECT_LE(std::sqrt(norm2(lu)), 4.0 * std::sqrt(norm2(u)));
  }
}

TEST(DiscreteLaplacian, AlternatingStateRatio) {
  // ||L a||^2 = 16(2N+1) - 12 for a_n = (-1)^n on [-N, N].
  for (int n : {1, 10, 100, 256}) {
    const auto a = alternating_state(n);
    const double ratio_sq = norm2(discrete_laplacian(a)) / norm2(a);
    EXPECT_NEAR(ratio_sq, 16.0 - 12.0 / (2.0 * n + 1.0), 1e-12);
  }
  EXPECT_GE(std::sqrt(16.0 - 12.0 / 513.0), 3.99);
}

TEST(Norms, Embeddings) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const auto u = RandomState(rng, -30, 61, 0.3);
    const Norms nm = norms(u);
    const double l2 = std::sqrt(nm.l2_sq);
    const double l4 = std::pow(nm.l4_quartic, 0.25);
    EXPECT_LE(nm.linf, l4 * (1 + 1e-15));
    EXPECT_LE(l4, l2 * (1 + 1e-15));
  }
  const Norms e = norms(LatticeState::unit(3, 5, Complex(0.0, -2.0)));
  EXPECT_EQ(e.l2_sq, 4.0);
  EXPECT_EQ(e.l4_quartic, 16.0);
  EXPECT_EQ(e.linf, 2.0);
}

TEST(LatticeState, ArithmeticOnUnionOfWindows) {
  LatticeState a(-1, {1.0, 2.0});
  LatticeState b(3, {Complex(0, 1)});
  const auto d = a - b;
  EXPECT_EQ(d.first(), -1);
  EXPECT_EQ(d.size(), 5u);
  EXPECT_EQ(d.at(3), Complex(0, -1));
  EXPECT_EQ(d.at(0), Complex(2.0));
  EXPECT_EQ(norm2(d), 6.0);
}

TEST(Rhs, ZeroStateGivesForcing) {
  const auto g = Forcing::single_site(0, 0.25);
  const auto f = rhs_combined(LatticeState::window(3), ModelParams::nldgl(0.3, 0.7, 2.0), g);
  for (int n = -3; n <= 3; ++n) EXPECT_EQ(f.at(n), n == 0 ? Complex(0.5) : Complex(0.0));
}

TEST(Rhs, MatchesHandCodedSystemsBitwise) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    const auto u = RandomState(rng, -8, 17);
    const Forcing g(RandomState(rng, -8, 17, 0.5));
    const double a = ud(rng), b = ud(rng), d = ud(rng) - 1.0;
    const std::vector<Complex> uv(u.values().begin(), u.values().end());
    const std::vector<Complex> gv(g.state.values().begin(), g.state.values().end());

    const auto fl = rhs_combined(u, ModelParams::ldgl(a, b, d), g);
    const auto hl = HandLdgl(uv, gv, a, b, d);
    const auto fn = rhs_combined(u, ModelParams::nldgl(a, b, d), g);
    const auto hn = HandNldgl(uv, gv, a, b, d);
    for (std::size_t i = 0; i < uv.size(); ++i) {
      EXPECT_EQ(fl.values()[i], hl[i]);
      EXPECT_EQ(fn.values()[i], hn[i]);
    }
  }
}

TEST(Rhs, ForcingOutsideWindowRejected) {
  const auto g = Forcing::single_site(10, 1.0);
  EXPECT_THROW(rhs_combined(LatticeState::window(3), ModelParams{}, g), std::invalid_argument);
}

TEST(Lipschitz, RatioBelowBoundOnBalls) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (double radius : {0.5, 1.0, 2.0}) {
    for (const bool local : {true, false}) {
      const auto p = local ? ModelParams::ldgl(0.4, 1.3, 2.0) : ModelParams::nldgl(0.4, 1.3, 2.0);
      const double bound = lipschitz_bound(p, radius);
      double worst = 0.0;
      for (int k = 0; k < 300; ++k) {
        auto u = RandomState(rng, -10, 21);
        auto v = RandomState(rng, -10, 21);
        u *= Complex(radius * ud(rng) / std::sqrt(norm2(u)));
        v *= Complex(radius * ud(rng) / std::sqrt(norm2(v)));
        const double num = std::sqrt(norm2(nonlinear_term(u, p) - nonlinear_term(v, p)));
        const double den = std::sqrt(norm2(u - v));
        worst = std::max(worst, num / den);
      }
      EXPECT_LE(worst, bound) << "R=" << radius << " local=" << local;
      EXPECT_GT(worst, 0.0);
    }
  }
}

TEST(Balance, UnitStateLdgl) {
  // e_0, delta=2, gamma=1: -2 - 2*2 - 2 = -8.
  const auto chk = balance_residual(LatticeState::unit(0, 4), ModelParams::ldgl(0.0, 0.0, 2.0), Forcing::zero());
  EXPECT_EQ(chk.terms.gain_loss, -2.0);
  EXPECT_EQ(chk.terms.dirichlet, 4.0);
  EXPECT_EQ(chk.terms.local_quartic, 2.0);
  EXPECT_EQ(chk.terms.nonlocal_cubic, 0.0);
  EXPECT_EQ(chk.terms.total, -8.0);
  EXPECT_LE(chk.residual, 1e-15);
}

TEST(Balance, RandomDraws) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const auto u = RandomState(rng, -15, 31, 0.1 + ud(rng));
    const Forcing g(RandomState(rng, -15, 31, ud(rng)));
    for (const bool local : {true, false}) {
      const double a = 2 * ud(rng), b = 2 * ud(rng), d = 4 * ud(rng) - 1;
      const auto p = local ? ModelParams::ldgl(a, b, d) : ModelParams::nldgl(a, b, d);
      const auto chk = balance_residual(u, p, g);
      EXPECT_LE(chk.residual, 1e-10 * std::max(1.0, std::abs(chk.terms.total)));
      EXPECT_GE(chk.terms.dirichlet, 0.0);
      EXPECT_GE(chk.terms.local_quartic, 0.0);
    }
  }
}

TEST(Forcing, SingleSiteHitsTarget) {
  for (double t : {0.0, 0.01, 0.1, 1.0, 2.0}) {
    const auto g = Forcing::single_site(0, t);
    EXPECT_NEAR(g.norm2, t, 1e-12 * std::max(1.0, t));
    EXPECT_EQ(g.norm2, norm2(g.state));
  }
  EXPECT_THROW(Forcing::single_site(0, -1.0), std::invalid_argument);
}

TEST(IdentityCheck, SmallRun) {
  const auto rep = run_identity_check(20, 16, 1);
  EXPECT_LE(rep.max_self_adjoint_residual, 1e-12);
  EXPECT_LE(rep.max_negativity_residual, 1e-12);
  EXPECT_LE(rep.max_positive_part, 0.0);
  EXPECT_LE(rep.max_operator_ratio, 4.0);
  EXPECT_LE(rep.max_balance_residual_ldgl, 1e-10);
  EXPECT_LE(rep.max_balance_residual_nldgl, 1e-10);
  EXPECT_NEAR(rep.alternating_ratio, std::sqrt(16.0 - 12.0 / 33.0), 1e-12);
}

}  // namespace
}  // namespace dgl
