#pragma once

// Randomized residuals of the discrete Laplacian identities and the energy
// balance. Used by the identity_check experiment and the acceptance driver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "dgl/lattice.hpp"

namespace dgl {

struct IdentityCheckReport {
  std::size_t draws = 0;
  int half_width = 0;
  std::uint64_t seed = 0;
  double max_self_adjoint_residual = 0.0;  ///< |(Lu,v) - (u,Lv)| / (||Lu|| ||v|| + ||u|| ||Lv||)
  double max_negativity_residual = 0.0;    ///< |(Lu,u) + D(u)| / max(D(u), tiny), D = dirichlet energy
  double max_positive_part = 0.0;          ///< max Re(Lu,u) / ||u||^2, should be <= 0
  double max_operator_ratio = 0.0;         ///< max ||Lu|| / ||u|| over the random states
  double alternating_ratio = 0.0;          ///< ||L a|| / ||a|| for a_n = (-1)^n
  double max_balance_residual_ldgl = 0.0;  ///< |2 Re(F(u),u) - total| / max(1, |total|)
  double max_balance_residual_nldgl = 0.0;
};

/// (-1)^n on the symmetric window.
inline LatticeState alternating_state(int half_width) {
  auto s = LatticeState::window(half_width);
  for (int n = s.first(); n <= s.last(); ++n) s[n] = (n % 2 == 0) ? 1.0 : -1.0;
  return s;
}

namespace detail {

inline LatticeState random_state(std::mt19937_64& rng, int half_width, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto s = LatticeState::window(half_width);
  for (auto& v : s.values()) v = Complex(scale * normal(rng), scale * normal(rng));
  return s;
}

}  // namespace detail

/// Draws `draws` random states (and, for the balance, random coefficients and forcing)
/// on [-half_width, half_width] and records the worst relative residuals.
inline IdentityCheckReport run_identity_check(std::size_t draws, int half_width, std::uint64_t seed) {
  if (half_width < 1) throw std::invalid_argument("identity check needs half_width >= 1");
  IdentityCheckReport rep;
  rep.draws = draws;
  rep.half_width = half_width;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t i = 0; i < draws; ++i) {
    const double scale = 0.05 + 1.5 * unit(rng);
    const LatticeState u = detail::random_state(rng, half_width, scale);
    const LatticeState v = detail::random_state(rng, half_width, 1.0);
    const LatticeState lu = discrete_laplacian(u);
    const LatticeState lv = discrete_laplacian(v);
    const double nu = std::sqrt(norm2(u)), nv = std::sqrt(norm2(v));
    const double nlu = std::sqrt(norm2(lu)), nlv = std::sqrt(norm2(lv));

    const double sa = std::abs(inner(lu, v) - inner(u, lv)) / (nlu * nv + nu * nlv);
    rep.max_self_adjoint_residual = std::max(rep.max_self_adjoint_residual, sa);

    const Complex luu = inner(lu, u);
    const double dir = dirichlet_energy(u);
    rep.max_negativity_residual =
        std::max(rep.max_negativity_residual, std::abs(luu + dir) / std::max(dir, 1e-300));
    rep.max_positive_part = std::max(rep.max_positive_part, luu.real() / (nu * nu));
    rep.max_operator_ratio = std::max(rep.max_operator_ratio, nlu / nu);

    ModelParams p;
    p.alpha = 2.0 * unit(rng);
    p.beta = 2.0 * unit(rng);
    p.delta = -1.0 + 5.0 * unit(rng);
    const Forcing g(detail::random_state(rng, half_width, unit(rng)));
    for (const bool local : {true, false}) {
      const ModelParams q = local ? ModelParams::ldgl(p.alpha, p.beta, p.delta)
                                  : ModelParams::nldgl(p.alpha, p.beta, p.delta);
      const BalanceCheck chk = balance_residual(u, q, g);
      const double rel = chk.residual / std::max(1.0, std::abs(chk.terms.total));
      double& slot = local ? rep.max_balance_residual_ldgl : rep.max_balance_residual_nldgl;
      slot = std::max(slot, rel);
    }
  }
  const LatticeState a = alternating_state(half_width);
  rep.alternating_ratio = std::sqrt(norm2(discrete_laplacian(a)) / norm2(a));
  return rep;
}

}  // namespace dgl
