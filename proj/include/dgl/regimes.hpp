#pragma once

// Closed-form constants of the dissipative regime delta > 1: the Riccati
// coefficients bounding chi(t) = ||v(t)||^2 for the non-local lattice, their
// roots, absorbing/non-escaping radii, entry times, and the constants of the
// epsilon^3 closeness estimates.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dgl/errors.hpp"
#include "dgl/lattice.hpp"

namespace dgl {

/// Coefficients of  chi' + A chi - B chi^2 - C <= 0.
struct RiccatiConstants {
  double a = 0.0;  ///< delta - 1
  double b = 0.0;  ///< 2 sqrt(1 + beta^2)
  double c = 0.0;  ///< ||g||^2 / (delta - 1)
  double d = 0.0;  ///< discriminant A^2 - 4BC
  std::optional<double> k;  ///< sqrt(D) when D > 0
};

inline RiccatiConstants riccati_constants(const ModelParams& p, double g_norm2) {
  if (!(p.delta > 1.0)) throw HypothesisError("Riccati constants need delta > 1 (got " + std::to_string(p.delta) + ")");
  if (!(g_norm2 >= 0.0)) throw std::invalid_argument("||g||^2 must be non-negative");
  RiccatiConstants r;
  r.a = p.delta - 1.0;
  r.b = 2.0 * p.phase_modulus();
  r.c = g_norm2 / r.a;
  r.d = r.a * r.a - 4.0 * r.b * r.c;
  if (r.d > 0.0) r.k = std::sqrt(r.d);
  return r;
}

enum class RegimeCase {
  SubcriticalForcing,    ///< (delta-1)^3 < 8 sqrt(1+beta^2) ||g||^2
  SupercriticalAnnulus,  ///< (delta-1)^3 > 8 sqrt(1+beta^2) ||g||^2
  Critical,              ///< equality
};

inline const char* to_string(RegimeCase c) {
  switch (c) {
    case RegimeCase::SubcriticalForcing: return "SubcriticalForcing";
    case RegimeCase::SupercriticalAnnulus: return "SupercriticalAnnulus";
    case RegimeCase::Critical: return "Critical";
  }
  return "unknown";
}

struct RegimeReport {
  RiccatiConstants constants;
  RegimeCase case_label = RegimeCase::Critical;
  std::optional<double> r1;  ///< larger root of A x - B x^2 - C
  std::optional<double> r2;  ///< smaller root; the attracting level of the envelope
  double restricted_radius_sq = 0.0;  ///< (delta-1) / (2 sqrt(1+beta^2))
  std::optional<double> delta0;       ///< (delta-1) - 2 sqrt(1+beta^2) ||v0||^2
  double rho_sq_ldgl = 0.0;           ///< ||g||^2 / (delta-1)^2
  std::optional<double> rho_sq_nldgl;  ///< ||g||^2 / (delta0 (delta-1))
  double absorb_margin = 1.1;          ///< rho_tilde^2 = absorb_margin * rho^2
  std::optional<double> nonescape_rho1;
  std::optional<double> nonescape_r0_sq_printed;  ///< rho1 ||g||^2 / (delta-1), as printed
  std::optional<double> nonescape_r0_sq_alt;      ///< rho1 / (delta-1)
  std::optional<double> entry_time_ldgl;
  std::optional<double> entry_time_nldgl;
  std::optional<double> entry_time;  ///< the one matching the parameter preset
  std::vector<std::string> notes;
};

namespace detail {

/// (1/rate) log((R^2 - rho^2) / (rho_tilde^2 - rho^2)); empty when the ball already lies inside.
inline std::optional<double> entry_time(double rate, double big_r_sq, double rho_sq, double rho_tilde_sq) {
  if (!(rate > 0.0) || !(rho_tilde_sq > rho_sq) || !(big_r_sq > rho_tilde_sq)) return std::nullopt;
  return std::log((big_r_sq - rho_sq) / (rho_tilde_sq - rho_sq)) / rate;
}

}  // namespace detail

/// Classifies (delta, beta, ||g||^2) and evaluates every radius that applies.
/// `v0_norm2` enables the restricted-ball quantities; `capture_radius` (an l2
/// radius R, not squared) enables entry times and the non-escaping radii.
inline RegimeReport classify_regime(const ModelParams& p, double g_norm2, std::optional<double> v0_norm2 = {},
                                    std::optional<double> capture_radius = {}, double absorb_margin = 1.1) {
  if (!(absorb_margin > 1.0)) throw HypothesisError("absorb_margin must exceed 1");
  RegimeReport r;
  r.constants = riccati_constants(p, g_norm2);
  r.absorb_margin = absorb_margin;
  const auto& k = r.constants;

  const double lhs = k.a * k.a * k.a;
  const double rhs = 8.0 * p.phase_modulus() * g_norm2;
  r.case_label = lhs < rhs   ? RegimeCase::SubcriticalForcing
                 : lhs > rhs ? RegimeCase::SupercriticalAnnulus
                             : RegimeCase::Critical;
  if (r.case_label == RegimeCase::SupercriticalAnnulus) {
    const double sd = std::sqrt(std::max(k.d, 0.0));
    r.r1 = (k.a + sd) / (2.0 * k.b);
    // Small root through the product of roots; no cancellation.
    r.r2 = k.c == 0.0 ? 0.0 : 2.0 * k.c / (k.a + sd);
  }

  r.restricted_radius_sq = k.a / k.b;
  r.rho_sq_ldgl = g_norm2 / (k.a * k.a);

  if (v0_norm2) {
    if (*v0_norm2 < r.restricted_radius_sq) {
      r.delta0 = k.a - k.b * *v0_norm2;
      r.rho_sq_nldgl = g_norm2 / (*r.delta0 * k.a);
    } else {
      r.notes.emplace_back("||v0||^2 is outside the restricted ball; no restricted absorbing set");
    }
  }

  if (capture_radius) {
    const double big_r = *capture_radius;
    const double big_r_sq = big_r * big_r;
    r.nonescape_rho1 = k.b * big_r_sq * big_r_sq + g_norm2 / k.a;
    r.nonescape_r0_sq_printed = *r.nonescape_rho1 * g_norm2 / k.a;
    r.nonescape_r0_sq_alt = *r.nonescape_rho1 / k.a;

    r.entry_time_ldgl = detail::entry_time(k.a, big_r_sq, r.rho_sq_ldgl, absorb_margin * r.rho_sq_ldgl);
    if (!r.entry_time_ldgl) r.notes.emplace_back("L-DGL entry time undefined: R^2 <= rho_tilde^2 or rho = 0");
    if (r.delta0) {
      r.entry_time_nldgl =
          detail::entry_time(*r.delta0, big_r_sq, *r.rho_sq_nldgl, absorb_margin * *r.rho_sq_nldgl);
      if (!r.entry_time_nldgl) r.notes.emplace_back("NL-DGL entry time undefined: R^2 <= rho_tilde^2 or rho = 0");
    }
    r.entry_time = p.mu != 0.0 ? r.entry_time_nldgl : r.entry_time_ldgl;
  }
  return r;
}

/// Constants C, C1 (delta > 1) and C2 (delta <= 1, horizon T_f) of the closeness estimates.
struct ClosenessConstants {
  std::optional<double> c_uniform;
  std::optional<double> c_limsup;  ///< multiplies epsilon^3 once
  std::optional<double> c_finite_horizon;
};

inline ClosenessConstants closeness_constants(const ModelParams& p, double c0, double cu0, double cv0,
                                              std::optional<double> t_final = {}) {
  if (!(c0 >= 0.0) || !(cu0 >= 0.0) || !(cv0 >= 0.0))
    throw std::invalid_argument("closeness constants need c0, cu0, cv0 >= 0");
  ClosenessConstants out;
  const double cubes = cu0 * cu0 * cu0 + cv0 * cv0 * cv0;
  const double one_beta = 1.0 + p.beta;
  if (p.delta > 1.0) {
    out.c_limsup = one_beta * cubes / (p.delta - 1.0);
    out.c_uniform = c0 + *out.c_limsup;
    return out;
  }
  if (!t_final) throw HypothesisError("closeness constants for delta <= 1 need a finite horizon T_f");
  const double tf = *t_final;
  if (!(tf > 0.0)) throw std::invalid_argument("T_f must be positive");
  if (p.delta == 1.0) {
    out.c_finite_horizon = c0 + 2.0 * one_beta * cubes * tf;
  } else {
    const double growth = std::exp(2.0 * (1.0 - p.delta) * tf);
    out.c_finite_horizon = c0 * growth + one_beta / (1.0 - p.delta) * cubes * (growth - 1.0);
  }
  return out;
}

/// chi(0) e^{-(delta-1)t} + ||g||^2/(delta-1)^2 (1 - e^{-(delta-1)t}) for the local lattice.
inline double gronwall_bound_ldgl(double delta, double g_norm2, double chi0, double t) {
  const double a = delta - 1.0;
  const double decay = std::exp(-a * t);
  return chi0 * decay + g_norm2 / (a * a) * (1.0 - decay);
}

/// Upper envelope R2 + [(psi0 - B/K) e^{Kt} + B/K]^{-1}, psi0 = 1/(chi0 - R2),
/// valid in the annulus regime for chi0 <= R1. chi0 == R2 gives R2.
inline double bernoulli_envelope(const RiccatiConstants& k, double r2, double chi0, double t) {
  if (!k.k) throw HypothesisError("Bernoulli envelope needs D > 0");
  const double kk = *k.k;
  const double z0 = chi0 - r2;
  if (z0 == 0.0) return r2;
  const double psi0 = 1.0 / z0;
  const double denom = (psi0 - k.b / kk) * std::exp(kk * t) + k.b / kk;
  if (std::isinf(denom)) return r2;
  return r2 + 1.0 / denom;
}

}  // namespace dgl
