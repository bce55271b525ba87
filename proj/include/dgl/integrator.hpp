#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgl/dopri.hpp"
#include "dgl/lattice.hpp"

namespace dgl {

enum class RunStatus { Completed, BlowUp, StepUnderflow };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::BlowUp: return "blowup";
    case RunStatus::StepUnderflow: return "step_underflow";
  }
  return "unknown";
}

struct Tolerances {
  double abs = 1e-8;
  double rel = 1e-6;

  static constexpr Tolerances standard() { return {1e-8, 1e-6}; }
  /// Tighter pair used wherever a result is compared against an analytic bound.
  static constexpr Tolerances oracle() { return {1e-10, 1e-8}; }
};

struct IntegratorOptions {
  Tolerances tolerances = Tolerances::standard();
  double sample_stride = 0.1;
  double blowup_threshold = 1e8;  ///< on chi = ||u||^2
  /// Keep a snapshot every `snapshot_every` samples (0: none).
  std::size_t snapshot_every = 0;
  double min_step = 1e-14;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> chi;  ///< ||u(t)||^2 at each sample
  std::vector<LatticeState> snapshots;
  std::vector<double> snapshot_times;
  std::optional<double> blowup_time;
  RunStatus status = RunStatus::Completed;
  double t_end = 0.0;       ///< time of final_state
  LatticeState final_state;  ///< last accepted state
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

struct ScalarTrajectory {
  std::vector<double> times;
  std::vector<double> w;
  std::optional<double> blowup_time;
};

namespace detail {

inline void check_run_args(double horizon, const Tolerances& tol, double stride) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(tol.abs > 0.0) || !(tol.rel > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (!(stride > 0.0)) throw std::invalid_argument("sample stride must be positive");
}

inline RunStatus to_status(ode::StopReason r) {
  switch (r) {
    case ode::StopReason::Completed: return RunStatus::Completed;
    case ode::StopReason::BlowUp: return RunStatus::BlowUp;
    case ode::StopReason::StepUnderflow:
    case ode::StopReason::StepLimit: return RunStatus::StepUnderflow;
  }
  return RunStatus::StepUnderflow;
}

}  // namespace detail

/// Adaptive Dormand-Prince integration of the combined lattice on the window of `initial`.
/// Samples fall on k * sample_stride. Stops early on blow-up or step underflow; the
/// trajectory then ends at the last valid sample and `final_state` is the last accepted state.
inline Trajectory integrate_adaptive(const LatticeState& initial, const ModelParams& params,
                                     const Forcing& forcing, double horizon, const IntegratorOptions& opts) {
  detail::check_run_args(horizon, opts.tolerances, opts.sample_stride);
  if (initial.empty()) throw std::invalid_argument("integrate_adaptive: empty initial window");

  const int first = initial.first();
  const auto g = aligned_forcing(forcing, first, initial.size());
  std::vector<Complex> y(initial.values().begin(), initial.values().end());

  Trajectory traj;
  const auto grid = ode::sample_grid(horizon, opts.sample_stride);
  traj.times.reserve(grid.size());
  traj.chi.reserve(grid.size());
  std::size_t sample_index = 0;

  auto rhs = [&](double, std::span<const Complex> u, std::span<Complex> out) { evaluate_rhs(u, g, params, out); };
  auto on_sample = [&](double t, std::span<const Complex> u) {
    traj.times.push_back(t);
    traj.chi.push_back(norm2(u));
    if (opts.snapshot_every > 0 && sample_index % opts.snapshot_every == 0) {
      traj.snapshots.emplace_back(first, std::vector<Complex>(u.begin(), u.end()));
      traj.snapshot_times.push_back(t);
    }
    ++sample_index;
  };
  auto measure = [](std::span<const Complex> u) { return norm2(u); };

  ode::StepControl ctl;
  ctl.abs_tol = opts.tolerances.abs;
  ctl.rel_tol = opts.tolerances.rel;
  ctl.min_step = opts.min_step;
  const auto stats = ode::dopri5<Complex>(y, 0.0, horizon, rhs, ctl, grid, on_sample, measure, opts.blowup_threshold);

  traj.status = detail::to_status(stats.reason);
  traj.blowup_time = stats.blowup_time;
  traj.t_end = stats.t_end;
  traj.accepted_steps = stats.accepted;
  traj.rejected_steps = stats.rejected;
  if (traj.status == RunStatus::BlowUp && stats.blowup_time && *stats.blowup_time == 0.0) {
    traj.final_state = initial;
  } else {
    traj.final_state = LatticeState(first, std::move(y));
  }
  return traj;
}

/// Fixed-step classical RK4 on the same right-hand side; the independent reference
/// for the adaptive scheme. `sample_stride` must be a whole multiple of `dt`.
inline Trajectory integrate_reference_rk4(const LatticeState& initial, const ModelParams& params,
                                          const Forcing& forcing, double horizon, double dt, double sample_stride,
                                          std::size_t snapshot_every = 0) {
  if (!(dt > 0.0) || !(horizon > 0.0) || !(sample_stride > 0.0))
    throw std::invalid_argument("integrate_reference_rk4: dt, horizon and stride must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  const auto every = static_cast<std::size_t>(std::llround(sample_stride / dt));
  if (every == 0 || std::abs(static_cast<double>(every) * dt - sample_stride) > 1e-9 * sample_stride)
    throw std::invalid_argument("integrate_reference_rk4: stride is not a multiple of dt");

  const int first = initial.first();
  const auto g = aligned_forcing(forcing, first, initial.size());
  std::vector<Complex> y(initial.values().begin(), initial.values().end());
  Trajectory traj;
  std::size_t sample_index = 0;
  auto rhs = [&](double, std::span<const Complex> u, std::span<Complex> out) { evaluate_rhs(u, g, params, out); };
  auto on_sample = [&](double t, std::span<const Complex> u) {
    traj.times.push_back(t);
    traj.chi.push_back(norm2(u));
    if (snapshot_every > 0 && sample_index % snapshot_every == 0) {
      traj.snapshots.emplace_back(first, std::vector<Complex>(u.begin(), u.end()));
      traj.snapshot_times.push_back(t);
    }
    ++sample_index;
  };
  ode::rk4_fixed<Complex>(y, 0.0, dt, steps, every, rhs, on_sample);
  traj.t_end = static_cast<double>(steps) * dt;
  traj.final_state = LatticeState(first, std::move(y));
  return traj;
}

struct RiccatiOptions {
  double sample_stride = 0.1;
  Tolerances tolerances{1e-12, 1e-10};
  double blowup_threshold = 1e8;
};

/// Solves w' = -A w + B w^2 + C, w(0) = x0, sampled on k * sample_stride.
/// Records the first time w exceeds the blow-up threshold.
inline ScalarTrajectory integrate_riccati(double a, double b, double c, double x0, double horizon,
                                          const RiccatiOptions& opts = {}) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("integrate_riccati: x0 must be non-negative");
  detail::check_run_args(horizon, opts.tolerances, opts.sample_stride);
  ScalarTrajectory out;
  const auto grid = ode::sample_grid(horizon, opts.sample_stride);
  std::vector<double> y{x0};
  auto rhs = [&](double, std::span<const double> w, std::span<double> dw) {
    dw[0] = -a * w[0] + b * w[0] * w[0] + c;
  };
  auto on_sample = [&](double t, std::span<const double> w) {
    out.times.push_back(t);
    out.w.push_back(t == 0.0 ? x0 : w[0]);
  };
  auto measure = [](std::span<const double> w) { return w[0]; };
  ode::StepControl ctl;
  ctl.abs_tol = opts.tolerances.abs;
  ctl.rel_tol = opts.tolerances.rel;
  const auto stats = ode::dopri5<double>(y, 0.0, horizon, rhs, ctl, grid, on_sample, measure, opts.blowup_threshold);
  out.blowup_time = stats.blowup_time;
  return out;
}

}  // namespace dgl
