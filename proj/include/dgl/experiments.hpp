#pragma once

// Verification studies built on the lattice integrator: closeness of the local
// and non-local semiflows, tail decay, attractor sampling with the Hausdorff
// semi-distance, and the regime/envelope probes for the non-local lattice.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dgl/errors.hpp"
#include "dgl/integrator.hpp"
#include "dgl/lattice.hpp"
#include "dgl/parallel.hpp"
#include "dgl/regimes.hpp"

namespace dgl {

enum class SystemTag { LDGL, NLDGL };

inline const char* to_string(SystemTag t) { return t == SystemTag::LDGL ? "LDGL" : "NLDGL"; }

inline ModelParams system_params(SystemTag tag, const ModelParams& p) {
  return tag == SystemTag::LDGL ? ModelParams::ldgl(p.alpha, p.beta, p.delta)
                                : ModelParams::nldgl(p.alpha, p.beta, p.delta);
}

// ---------------------------------------------------------------------------
// Distances

inline double l2_distance(const LatticeState& a, const LatticeState& b) { return std::sqrt(norm2(a - b)); }

inline double linf_distance(const LatticeState& a, const LatticeState& b) { return norms(a - b).linf; }

// ---------------------------------------------------------------------------
// Initial data for the closeness hypotheses

struct InitialFamily {
  double epsilon = 0.1;
  double c0 = 1.0;
  double cu0 = 1.0;
  double cv0 = 1.0;
  LatticeState u_profile;        ///< phi, unit l2 norm
  LatticeState perturb_profile;  ///< psi, unit l2 norm
};

struct InitialPair {
  LatticeState u0;
  LatticeState v0;
};

/// e_0 on the symmetric window.
inline LatticeState default_u_profile(int half_width) { return LatticeState::unit(0, half_width); }

/// (e_1 - e_0)/sqrt(2). Partly opposes e_0, so u0 + c eps^3 psi stays inside the ball of radius eps.
inline LatticeState default_perturb_profile(int half_width) {
  auto s = LatticeState::window(half_width);
  const double h = 1.0 / std::numbers::sqrt2;
  s[0] = -h;
  s[1] = h;
  return s;
}

/// Rescales a profile whose norm is within 1e-9 of one; anything else is rejected.
inline LatticeState normalized_profile(const LatticeState& p, const char* name) {
  const double nrm = std::sqrt(norm2(p));
  if (!(std::abs(nrm - 1.0) <= 1e-9))
    throw std::invalid_argument(std::string(name) + " must have unit l2 norm (got " + std::to_string(nrm) + ")");
  return Complex(1.0 / nrm) * p;
}

/// u0 = cu0 eps phi and v0 = u0 + c0 eps^3 psi, on the union of the profile windows.
/// Throws HypothesisError when ||v0|| > cv0 eps.
inline InitialPair make_initial_family(double epsilon, double c0, double cu0, double cv0,
                                       const LatticeState& u_profile, const LatticeState& perturb_profile) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (!(c0 >= 0.0) || !(cu0 >= 0.0) || !(cv0 >= 0.0))
    throw std::invalid_argument("c0, cu0, cv0 must be non-negative");
  const LatticeState phi = normalized_profile(u_profile, "u_profile");
  const LatticeState psi = normalized_profile(perturb_profile, "perturb_profile");
  const int lo = std::min(phi.first(), psi.first());
  const auto size = static_cast<std::size_t>(std::max(phi.last(), psi.last()) - lo + 1);

  InitialPair out;
  out.u0 = (Complex(cu0 * epsilon) * phi).rewindowed(lo, size);
  const double eps3 = epsilon * epsilon * epsilon;
  out.v0 = (out.u0 + Complex(c0 * eps3) * psi).rewindowed(lo, size);

  const double v_norm = std::sqrt(norm2(out.v0));
  const double v_cap = cv0 * epsilon;
  if (v_norm > v_cap * (1.0 + 1e-12))
    throw HypothesisError("||v0|| = " + std::to_string(v_norm) + " exceeds C_v0 * eps = " + std::to_string(v_cap));
  return out;
}

inline InitialPair make_initial_family(const InitialFamily& f) {
  return make_initial_family(f.epsilon, f.c0, f.cu0, f.cv0, f.u_profile, f.perturb_profile);
}

// ---------------------------------------------------------------------------
// Closeness of the two semiflows

struct ClosenessReport {
  double epsilon = 0.0;
  double sup_distance_l2 = 0.0;
  double sup_distance_linf = 0.0;
  double tail_window_limsup = 0.0;  ///< max ||Delta|| over the trailing 20% of samples
  double bound_used = 0.0;          ///< C eps^3 (delta > 1) or C2 eps^3 (delta <= 1, T_f = horizon)
  bool pass = false;                ///< sup_distance_l2 <= bound_used (1 + 1e-3)
  bool linf_pass = false;
  ClosenessConstants constants;
  std::vector<double> times;
  std::vector<double> dist_l2;
  std::vector<double> dist_linf;
  std::optional<std::string> diagnostic;
};

/// Index of the first sample in the trailing 20% of `count` samples.
inline std::size_t trailing_start(std::size_t count) {
  if (count == 0) return 0;
  const auto start = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(count)));
  return std::min(start, count - 1);
}

/// Integrates u under the local and v under the non-local lattice (alpha, beta,
/// delta from `params`; gamma and mu are ignored) and measures ||u(t) - v(t)||.
inline ClosenessReport run_closeness(const InitialFamily& family, const ModelParams& params, const Forcing& forcing,
                                     double horizon, IntegratorOptions opts, unsigned threads = 1) {
  const InitialPair pair = make_initial_family(family);
  ClosenessReport rep;
  rep.epsilon = family.epsilon;
  rep.constants = closeness_constants(params, family.c0, family.cu0, family.cv0, horizon);
  const double eps3 = family.epsilon * family.epsilon * family.epsilon;
  rep.bound_used = (params.delta > 1.0 ? *rep.constants.c_uniform : *rep.constants.c_finite_horizon) * eps3;

  opts.snapshot_every = 1;
  Trajectory traj[2];
  parallel_for(2, threads, [&](std::size_t i) {
    const auto sys = system_params(i == 0 ? SystemTag::LDGL : SystemTag::NLDGL, params);
    traj[i] = integrate_adaptive(i == 0 ? pair.u0 : pair.v0, sys, forcing, horizon, opts);
  });

  const std::size_t count = std::min(traj[0].snapshots.size(), traj[1].snapshots.size());
  rep.times.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const LatticeState diff = traj[0].snapshots[i] - traj[1].snapshots[i];
    const Norms nm = norms(diff);
    rep.times.push_back(traj[0].snapshot_times[i]);
    rep.dist_l2.push_back(std::sqrt(nm.l2_sq));
    rep.dist_linf.push_back(nm.linf);
    rep.sup_distance_l2 = std::max(rep.sup_distance_l2, rep.dist_l2.back());
    rep.sup_distance_linf = std::max(rep.sup_distance_linf, nm.linf);
  }
  for (std::size_t i = trailing_start(count); i < count; ++i)
    rep.tail_window_limsup = std::max(rep.tail_window_limsup, rep.dist_l2[i]);

  if (traj[0].status != RunStatus::Completed || traj[1].status != RunStatus::Completed) {
    rep.pass = rep.linf_pass = false;
    rep.diagnostic = std::string("integration stopped early: L-DGL ") + to_string(traj[0].status) + ", NL-DGL " +
                     to_string(traj[1].status);
    return rep;
  }
  rep.pass = rep.sup_distance_l2 <= rep.bound_used * (1.0 + 1e-3);
  rep.linf_pass = rep.sup_distance_linf <= rep.bound_used * (1.0 + 1e-3);
  return rep;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs >= 2 paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Tail mass

/// sum_{|n| > 2k} |u_n|^2 over the stored window.
inline double tail_mass(const LatticeState& s, int k) {
  if (k < 0) throw std::invalid_argument("tail_mass: k must be non-negative");
  const long cut = 2L * k;
  double acc = 0.0;
  for (int n = s.first(); n <= s.last() && !s.empty(); ++n)
    if (std::labs(static_cast<long>(n)) > cut) acc += std::norm(s.at(n));
  return acc;
}

struct TailReport {
  double xi = 0.0;
  std::vector<int> k_values;  ///< ascending
  std::vector<double> sample_times;  ///< trailing sample instants
  std::vector<std::vector<double>> tail_masses;  ///< [time][k]
  std::optional<int> min_k_passing;
  std::optional<double> time_of_entry;
  bool hypotheses_hold = true;
  std::vector<std::string> notes;
};

inline TailReport run_tail_study(const ModelParams& params, const Forcing& forcing, const LatticeState& initial,
                                 double horizon, double xi, std::vector<int> k_grid, IntegratorOptions opts) {
  if (!(params.delta > 1.0)) throw HypothesisError("tail study needs delta > 1");
  if (!(xi > 0.0)) throw std::invalid_argument("xi must be positive");
  if (k_grid.empty()) throw std::invalid_argument("k grid must not be empty");
  for (int k : k_grid)
    if (k < 0) throw std::invalid_argument("k grid values must be non-negative");
  std::sort(k_grid.begin(), k_grid.end());
  k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());

  TailReport rep;
  rep.xi = xi;
  rep.k_values = k_grid;
  if (params.mu != 0.0) {
    const auto regime = classify_regime(params, forcing.norm2, norm2(initial));
    if (!regime.delta0) {
      rep.hypotheses_hold = false;
      rep.notes.emplace_back("initial data outside the restricted ball; exploratory run");
    }
  }

  opts.snapshot_every = 1;
  const Trajectory traj = integrate_adaptive(initial, params, forcing, horizon, opts);
  if (traj.status != RunStatus::Completed)
    throw NumericalError(std::string("tail study integration stopped: ") + to_string(traj.status));

  const std::size_t count = traj.snapshots.size();
  const std::size_t start = trailing_start(count);
  for (std::size_t i = start; i < count; ++i) {
    rep.sample_times.push_back(traj.snapshot_times[i]);
    std::vector<double> row;
    row.reserve(k_grid.size());
    for (int k : k_grid) row.push_back(tail_mass(traj.snapshots[i], k));
    rep.tail_masses.push_back(std::move(row));
  }
  for (std::size_t j = 0; j < k_grid.size() && !rep.min_k_passing; ++j) {
    bool ok = true;
    for (const auto& row : rep.tail_masses) ok = ok && row[j] <= xi;
    if (ok) rep.min_k_passing = k_grid[j];
  }
  if (rep.min_k_passing) {
    // Earliest sample after which the bound holds at every later sample.
    std::optional<double> entry;
    for (std::size_t i = count; i-- > 0;) {
      if (tail_mass(traj.snapshots[i], *rep.min_k_passing) > xi) break;
      entry = traj.snapshot_times[i];
    }
    rep.time_of_entry = entry;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Attractor sampling and the Hausdorff semi-distance

struct SamplingPlan {
  double transient_cut = 20.0;
  double stride = 0.5;
  double horizon = 40.0;
};

struct AttractorSample {
  std::vector<LatticeState> points;
  std::vector<double> times;
  std::vector<std::size_t> seed_index;
  double transient_cut = 0.0;
  double stride = 0.0;
  SystemTag system_tag = SystemTag::LDGL;
  /// Largest distance between the last two snapshots of a seed, plus the integrator's absolute tolerance.
  double sampling_tolerance = 0.0;
  std::optional<double> entry_time;
  std::vector<std::string> warnings;
};

/// Post-transient snapshots of every seed trajectory, pooled in seed order.
inline AttractorSample sample_attractor(SystemTag tag, const ModelParams& params, const Forcing& forcing,
                                        const std::vector<LatticeState>& seeds, const SamplingPlan& plan,
                                        IntegratorOptions opts, unsigned threads = 1, double absorb_margin = 1.1) {
  if (!(params.delta > 1.0)) throw HypothesisError("attractor sampling needs delta > 1");
  if (seeds.empty()) throw std::invalid_argument("attractor sampling needs at least one seed");
  if (!(plan.stride > 0.0) || !(plan.horizon > plan.transient_cut) || !(plan.transient_cut >= 0.0))
    throw std::invalid_argument("sampling plan needs stride > 0 and 0 <= transient_cut < horizon");

  const ModelParams sys = system_params(tag, params);
  AttractorSample out;
  out.system_tag = tag;
  out.transient_cut = plan.transient_cut;
  out.stride = plan.stride;

  double max_seed_sq = 0.0;
  for (const auto& s : seeds) max_seed_sq = std::max(max_seed_sq, norm2(s));
  const auto regime = classify_regime(sys, forcing.norm2, max_seed_sq, std::sqrt(max_seed_sq), absorb_margin);
  if (tag == SystemTag::NLDGL && !regime.delta0)
    throw HypothesisError("NL-DGL seeds must lie inside the restricted ball ||v0||^2 < " +
                          std::to_string(regime.restricted_radius_sq));
  out.entry_time = regime.entry_time;
  if (out.entry_time && plan.transient_cut < *out.entry_time)
    out.warnings.push_back("transient_cut " + std::to_string(plan.transient_cut) + " is below the entry time " +
                           std::to_string(*out.entry_time));

  opts.sample_stride = plan.stride;
  opts.snapshot_every = 1;
  std::vector<Trajectory> runs(seeds.size());
  parallel_for(seeds.size(), threads,
               [&](std::size_t i) { runs[i] = integrate_adaptive(seeds[i], sys, forcing, plan.horizon, opts); });

  double tol = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto& r = runs[i];
    if (r.status != RunStatus::Completed)
      throw NumericalError(std::string("seed ") + std::to_string(i) + " trajectory stopped: " + to_string(r.status));
    for (std::size_t j = 0; j < r.snapshots.size(); ++j) {
      if (r.snapshot_times[j] > plan.transient_cut) {
        out.points.push_back(r.snapshots[j]);
        out.times.push_back(r.snapshot_times[j]);
        out.seed_index.push_back(i);
      }
    }
    const std::size_t m = r.snapshots.size();
    if (m >= 2) tol = std::max(tol, l2_distance(r.snapshots[m - 1], r.snapshots[m - 2]));
  }
  if (out.points.empty()) throw std::invalid_argument("no snapshots after the transient cut");
  out.sampling_tolerance = tol + opts.tolerances.abs;
  return out;
}

/// dist(A, B) = sup_{a in A} inf_{b in B} ||a - b||_{l2}, evaluated over all pairs.
/// Per pair the squared distance is accumulated in increasing site order as
/// dr*dr + di*di; partial sums that already exceed the running minimum are abandoned.
inline double hausdorff_semidistance(const std::vector<LatticeState>& a, const std::vector<LatticeState>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Hausdorff semi-distance of an empty cloud");
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  for (const auto* cloud : {&a, &b})
    for (const auto& p : *cloud)
      if (!p.empty()) lo = std::min(lo, p.first()), hi = std::max(hi, p.last());
  if (lo > hi) return 0.0;
  const auto width = static_cast<std::size_t>(hi - lo + 1);

  auto flatten = [&](const std::vector<LatticeState>& cloud) {
    std::vector<double> flat(cloud.size() * width * 2);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      for (std::size_t j = 0; j < width; ++j) {
        const Complex v = cloud[i].at(lo + static_cast<int>(j));
        flat[(i * width + j) * 2] = v.real();
        flat[(i * width + j) * 2 + 1] = v.imag();
      }
    return flat;
  };
  const auto fa = flatten(a);
  const auto fb = flatten(b);

  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double* x = &fa[i * width * 2];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double* y = &fb[k * width * 2];
      double s = 0.0;
      for (std::size_t j = 0; j < width && s < best; ++j) {
        const double dr = x[2 * j] - y[2 * j];
        const double di = x[2 * j + 1] - y[2 * j + 1];
        s += dr * dr + di * di;
      }
      best = std::min(best, s);
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

inline double hausdorff_semidistance(const AttractorSample& a, const AttractorSample& b) {
  return hausdorff_semidistance(a.points, b.points);
}

// ---------------------------------------------------------------------------
// Congruence of the sampled attractors

struct CongruenceRow {
  double epsilon = 0.0;
  double dist_v_to_u = 0.0;  ///< dist(A_v, A_u)
  double dist_u_to_v = 0.0;  ///< dist(A_u, A_v), reported only
  double sampling_tolerance = 0.0;
  double bound = 0.0;  ///< C1 eps^3 + 2 * sampling tolerance
  bool pass = false;
  std::size_t points_u = 0;
  std::size_t points_v = 0;
};

struct CongruenceReport {
  RegimeCase case_label = RegimeCase::Critical;
  double c_limsup = 0.0;
  std::vector<CongruenceRow> rows;
  bool non_increasing = true;  ///< along decreasing epsilon, within 2 * sampling tolerance
  bool pass = false;
  std::vector<std::string> warnings;
};

/// For each epsilon: seeds e^{2 pi i k / phases} u0 and e^{2 pi i k / phases} v0 from the
/// family template, sampled attractors of both lattices, and dist(A_v, A_u).
inline CongruenceReport run_congruence(const ModelParams& params, const Forcing& forcing,
                                       const std::vector<double>& epsilon_grid, const InitialFamily& family_template,
                                       const SamplingPlan& plan, const IntegratorOptions& opts, int phases = 4,
                                       unsigned threads = 1) {
  if (!(params.delta > 1.0)) throw HypothesisError("congruence needs delta > 1");
  if (epsilon_grid.empty()) throw std::invalid_argument("epsilon grid must not be empty");
  if (phases < 1) throw std::invalid_argument("phases must be >= 1");

  CongruenceReport rep;
  const auto regime = classify_regime(ModelParams::nldgl(params.alpha, params.beta, params.delta), forcing.norm2);
  rep.case_label = regime.case_label;
  rep.c_limsup = *closeness_constants(params, family_template.c0, family_template.cu0, family_template.cv0).c_limsup;

  // Seeds are built and checked up front so hypothesis errors surface before any integration.
  std::vector<std::vector<LatticeState>> seeds_u(epsilon_grid.size()), seeds_v(epsilon_grid.size());
  for (std::size_t e = 0; e < epsilon_grid.size(); ++e) {
    InitialFamily fam = family_template;
    fam.epsilon = epsilon_grid[e];
    const InitialPair pair = make_initial_family(fam);
    for (const auto* s : {&pair.u0, &pair.v0})
      if (!(norm2(*s) < regime.restricted_radius_sq))
        throw HypothesisError("seed with ||.||^2 = " + std::to_string(norm2(*s)) +
                              " lies outside the restricted ball of radius^2 " +
                              std::to_string(regime.restricted_radius_sq));
    for (int k = 0; k < phases; ++k) {
      const Complex rot = std::polar(1.0, 2.0 * std::numbers::pi * k / phases);
      seeds_u[e].push_back(rot * pair.u0);
      seeds_v[e].push_back(rot * pair.v0);
    }
  }

  rep.rows.resize(epsilon_grid.size());
  std::vector<std::vector<std::string>> warnings(epsilon_grid.size());
  parallel_for(epsilon_grid.size(), threads, [&](std::size_t e) {
    const auto au = sample_attractor(SystemTag::LDGL, params, forcing, seeds_u[e], plan, opts);
    const auto av = sample_attractor(SystemTag::NLDGL, params, forcing, seeds_v[e], plan, opts);
    auto& row = rep.rows[e];
    row.epsilon = epsilon_grid[e];
    row.dist_v_to_u = hausdorff_semidistance(av, au);
    row.dist_u_to_v = hausdorff_semidistance(au, av);
    row.sampling_tolerance = std::max(au.sampling_tolerance, av.sampling_tolerance);
    const double eps3 = row.epsilon * row.epsilon * row.epsilon;
    row.bound = rep.c_limsup * eps3 + 2.0 * row.sampling_tolerance;
    row.pass = row.dist_v_to_u <= row.bound;
    row.points_u = au.points.size();
    row.points_v = av.points.size();
    for (const auto* s : {&au, &av})
      for (const auto& w : s->warnings) warnings[e].push_back("eps=" + std::to_string(row.epsilon) + ": " + w);
  });
  for (auto& w : warnings) rep.warnings.insert(rep.warnings.end(), w.begin(), w.end());

  std::vector<const CongruenceRow*> by_eps;
  for (const auto& r : rep.rows) by_eps.push_back(&r);
  std::stable_sort(by_eps.begin(), by_eps.end(),
                   [](const CongruenceRow* x, const CongruenceRow* y) { return x->epsilon > y->epsilon; });
  for (std::size_t i = 1; i < by_eps.size(); ++i) {
    const double noise = 2.0 * std::max(by_eps[i]->sampling_tolerance, by_eps[i - 1]->sampling_tolerance);
    if (by_eps[i]->dist_v_to_u > by_eps[i - 1]->dist_v_to_u + noise) rep.non_increasing = false;
  }
  rep.pass = rep.non_increasing;
  for (const auto& r : rep.rows) rep.pass = rep.pass && r.pass;
  return rep;
}

// ---------------------------------------------------------------------------
// Regime and envelope probes for the non-local lattice

struct RegimeProbe {
  double chi0 = 0.0;
  RunStatus status = RunStatus::Completed;
  std::optional<double> chi_blowup_time;
  std::optional<double> w_blowup_time;
  /// Empirical: chi(t) <= chi(0) at every sample (to 1e-12 relative).
  bool chi_nonincreasing = true;
  double max_excess_over_chi0 = 0.0;
  /// Empirical, annulus case with R2 < chi0 <= R1: chi stays in (R2, chi0].
  std::optional<bool> stays_in_annulus;
  double terminal_chi = 0.0;
  std::optional<double> terminal_minus_r2;
  /// Asserted: chi(t) <= w(t) (1 + 1e-6) up to the blow-up of w.
  bool envelope_ok = true;
  double max_envelope_ratio = 0.0;
  std::size_t envelope_samples = 0;
  /// Asserted in the annulus case (chi0 <= R1): chi <= Bernoulli envelope (1 + 1e-6).
  std::optional<bool> bernoulli_ok;
  std::vector<double> times;
  std::vector<double> chi;
  std::vector<double> w;  ///< Riccati envelope, ends at its blow-up
};

struct RegimeVerification {
  RegimeReport regime;
  double g_norm2 = 0.0;
  std::vector<RegimeProbe> probes;
  bool asserted_pass = true;  ///< every envelope (and Bernoulli) assertion holds
};

inline constexpr double kEnvelopeSlack = 1e-6;

/// Integrates the non-local lattice from sqrt(chi0) * profile for each chi0 and
/// compares chi(t) with the Riccati envelope w(t) seeded at chi0.
inline RegimeVerification run_regime_verification(const ModelParams& params, const Forcing& forcing,
                                                  const std::vector<double>& chi0_grid, double horizon,
                                                  const LatticeState& profile, const IntegratorOptions& opts,
                                                  unsigned threads = 1) {
  const ModelParams sys = ModelParams::nldgl(params.alpha, params.beta, params.delta);
  RegimeVerification out;
  out.g_norm2 = forcing.norm2;
  out.regime = classify_regime(sys, forcing.norm2);
  const LatticeState phi = normalized_profile(profile, "reference profile");
  const auto& k = out.regime.constants;
  const bool annulus = out.regime.case_label == RegimeCase::SupercriticalAnnulus;

  out.probes.resize(chi0_grid.size());
  parallel_for(chi0_grid.size(), threads, [&](std::size_t i) {
    const double chi0 = chi0_grid[i];
    if (!(chi0 >= 0.0)) throw std::invalid_argument("chi0 values must be non-negative");
    RegimeProbe& pr = out.probes[i];
    pr.chi0 = chi0;
    const Trajectory traj = integrate_adaptive(Complex(std::sqrt(chi0)) * phi, sys, forcing, horizon, opts);
    RiccatiOptions ro;
    ro.sample_stride = opts.sample_stride;
    ro.blowup_threshold = opts.blowup_threshold;
    const ScalarTrajectory env = integrate_riccati(k.a, k.b, k.c, chi0, horizon, ro);

    pr.status = traj.status;
    pr.chi_blowup_time = traj.blowup_time;
    pr.w_blowup_time = env.blowup_time;
    pr.terminal_chi = traj.chi.empty() ? chi0 : traj.chi.back();
    pr.times = traj.times;
    pr.chi = traj.chi;
    pr.w = env.w;

    for (double c : traj.chi) pr.max_excess_over_chi0 = std::max(pr.max_excess_over_chi0, c - chi0);
    pr.chi_nonincreasing = pr.max_excess_over_chi0 <= 1e-12 * std::max(1.0, chi0);

    const std::size_t m = std::min(traj.chi.size(), env.w.size());
    pr.envelope_samples = m;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = env.w[j];
      if (traj.chi[j] > w * (1.0 + kEnvelopeSlack)) pr.envelope_ok = false;
      if (w > 0.0) pr.max_envelope_ratio = std::max(pr.max_envelope_ratio, traj.chi[j] / w);
    }

    if (annulus) {
      const double r1 = *out.regime.r1, r2 = *out.regime.r2;
      pr.terminal_minus_r2 = std::abs(pr.terminal_chi - r2);
      if (chi0 > r2 && chi0 <= r1) {
        bool inside = true;
        for (double c : traj.chi) inside = inside && c > r2 && c <= chi0 * (1.0 + 1e-12);
        pr.stays_in_annulus = inside;
      }
      if (chi0 <= r1) {
        bool ok = true;
        for (std::size_t j = 0; j < traj.chi.size(); ++j) {
          const double env_b = bernoulli_envelope(k, r2, chi0, traj.times[j]);
          ok = ok && traj.chi[j] <= env_b * (1.0 + kEnvelopeSlack);
        }
        pr.bernoulli_ok = ok;
      }
    }
  });
  for (const auto& pr : out.probes) out.asserted_pass = out.asserted_pass && pr.envelope_ok && pr.bernoulli_ok.value_or(true);
  return out;
}

}  // namespace dgl
