#pragma once

// Dormand-Prince 5(4) with PI step-size control and the classical continuous
// extension for dense output. Works on std::vector<T> for T = double or
// std::complex<double>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dgl::ode {

struct StepControl {
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  double initial_step = 0.0;  ///< 0 selects the step automatically
  double min_step = 1e-14;
  double max_step = 0.0;  ///< 0 means unbounded
  std::size_t max_steps = 50'000'000;
};

enum class StopReason { Completed, BlowUp, StepUnderflow, StepLimit };

struct RunStats {
  StopReason reason = StopReason::Completed;
  double t_end = 0.0;  ///< time of the last accepted state
  std::optional<double> blowup_time;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Sample instants k*stride, k = 0..floor(horizon/stride) (with a 1e-9 relative guard).
inline std::vector<double> sample_grid(double horizon, double stride) {
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor(horizon / stride * (1.0 + 1e-12) + 1e-9));
  out.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k) out.push_back(static_cast<double>(k) * stride);
  return out;
}

namespace detail {

inline double sq(double x) { return x * x; }
inline double sq(const std::complex<double>& z) { return std::norm(z); }

template <class T>
double l2(std::span<const T> v) {
  double acc = 0.0;
  for (const T& x : v) acc += sq(x);
  return std::sqrt(acc);
}

// Butcher tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace detail

/// Integrates y' = f(t, y) from t0 to t1.
///
/// `rhs(t, y, dydt)` fills dydt. `on_sample(t, y)` is called at each instant in
/// `samples` (ascending, within [t0, t1]) with the dense-output state.
/// `blowup_measure(y)` is checked after every accepted step; exceeding
/// `blowup_threshold` (or becoming non-finite) stops the run.
/// On return `y` holds the last accepted state.
template <class T, class Rhs, class Sampler, class Measure>
RunStats dopri5(std::vector<T>& y, double t0, double t1, Rhs&& rhs, const StepControl& ctl,
                std::span<const double> samples, Sampler&& on_sample, Measure&& blowup_measure,
                double blowup_threshold) {
  using namespace detail;
  const std::size_t n = y.size();
  RunStats stats;
  stats.t_end = t0;

  std::size_t next_sample = 0;
  while (next_sample < samples.size() && samples[next_sample] < t0) ++next_sample;
  if (next_sample < samples.size() && samples[next_sample] == t0) {
    on_sample(t0, std::span<const T>(y));
    ++next_sample;
  }

  {
    const double m0 = blowup_measure(std::span<const T>(y));
    if (!std::isfinite(m0) || m0 > blowup_threshold) {
      stats.reason = StopReason::BlowUp;
      stats.blowup_time = t0;
      return stats;
    }
  }
  if (t1 <= t0) return stats;

  std::vector<T> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);
  std::vector<T> r1(n), r2(n), r3(n), r4(n), r5(n), ydense(n);

  auto tol_scale = [&](double ny) { return ctl.abs_tol + ctl.rel_tol * ny; };

  double t = t0;
  rhs(t, std::span<const T>(y), std::span<T>(k1));
  double ny = l2<T>(y);

  double h = ctl.initial_step;
  const double span_len = t1 - t0;
  const double hmax = ctl.max_step > 0.0 ? ctl.max_step : span_len;
  if (h <= 0.0) {
    // Starting step from the size of y and y'.
    const double sc = tol_scale(ny);
    const double dy0 = ny / sc;
    const double df0 = l2<T>(k1) / sc;
    double h0 = (dy0 < 1e-5 || df0 < 1e-5) ? 1e-6 : 0.01 * dy0 / df0;
    h0 = std::min(h0, hmax);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h0 * k1[i];
    rhs(t + h0, std::span<const T>(ytmp), std::span<T>(k2));
    double dd = 0.0;
    for (std::size_t i = 0; i < n; ++i) dd += sq(k2[i] - k1[i]);
    const double df1 = std::sqrt(dd) / sc / h0;
    const double dmax = std::max(df0, df1);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, hmax});
  }

  constexpr double safety = 0.9, beta_pi = 0.04, expo1 = 0.2 - beta_pi * 0.75;
  constexpr double fac_min = 0.2, fac_max = 10.0;
  double err_old = 1e-4;
  bool last_rejected = false;

  while (t < t1) {
    if (stats.accepted + stats.rejected >= ctl.max_steps) {
      stats.reason = StopReason::StepLimit;
      return stats;
    }
    if (h < ctl.min_step) {
      stats.reason = StopReason::StepUnderflow;
      return stats;
    }
    bool last = false;
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
    rhs(t + c2 * h, std::span<const T>(ytmp), std::span<T>(k2));
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, std::span<const T>(ytmp), std::span<T>(k3));
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, std::span<const T>(ytmp), std::span<T>(k4));
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, std::span<const T>(ytmp), std::span<T>(k5));
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, std::span<const T>(ytmp), std::span<T>(k6));
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, std::span<const T>(ynew), std::span<T>(k7));
    for (std::size_t i = 0; i < n; ++i)
      yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    const double ny_new = l2<T>(ynew);
    double err = l2<T>(yerr) / tol_scale(std::max(ny, ny_new));
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      // Dense output coefficients on [t, t+h].
      for (std::size_t i = 0; i < n; ++i) {
        const T ydiff = ynew[i] - y[i];
        const T bspl = h * k1[i] - ydiff;
        r1[i] = y[i];
        r2[i] = ydiff;
        r3[i] = bspl;
        r4[i] = ydiff - h * k7[i] - bspl;
        r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      const double t_new = last ? t1 : t + h;

      const double m = blowup_measure(std::span<const T>(ynew));
      if (!std::isfinite(m) || m > blowup_threshold) {
        stats.reason = StopReason::BlowUp;
        stats.blowup_time = t_new;
        ++stats.accepted;
        return stats;
      }

      while (next_sample < samples.size() && samples[next_sample] <= t_new) {
        const double ts = samples[next_sample];
        if (ts == t_new) {
          on_sample(ts, std::span<const T>(ynew));
        } else {
          const double th = (ts - t) / h;
          const double th1 = 1.0 - th;
          for (std::size_t i = 0; i < n; ++i)
            ydense[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
          on_sample(ts, std::span<const T>(ydense));
        }
        ++next_sample;
      }

      std::swap(y, ynew);
      std::swap(k1, k7);
      ny = ny_new;
      t = t_new;
      stats.t_end = t;
      ++stats.accepted;

      const double fac11 = std::pow(std::max(err, 1e-16), expo1);
      double fac = fac11 / std::pow(err_old, beta_pi);
      fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      err_old = std::max(err, 1e-4);
      h = std::min(h_new, hmax);
      last_rejected = false;
    } else {
      const double fac11 = std::pow(err, expo1);
      h = h / std::min(1.0 / fac_min, fac11 / safety);
      last_rejected = true;
      ++stats.rejected;
    }
  }
  stats.reason = StopReason::Completed;
  return stats;
}

/// Classical fixed-step RK4; `on_sample` fires every `sample_every` steps (and at t0).
template <class T, class Rhs, class Sampler>
void rk4_fixed(std::vector<T>& y, double t0, double dt, std::size_t steps, std::size_t sample_every, Rhs&& rhs,
               Sampler&& on_sample) {
  const std::size_t n = y.size();
  std::vector<T> k1(n), k2(n), k3(n), k4(n), tmp(n);
  double t = t0;
  on_sample(t, std::span<const T>(y));
  for (std::size_t s = 1; s <= steps; ++s) {
    rhs(t, std::span<const T>(y), std::span<T>(k1));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * dt) * k1[i];
    rhs(t + 0.5 * dt, std::span<const T>(tmp), std::span<T>(k2));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * dt) * k2[i];
    rhs(t + 0.5 * dt, std::span<const T>(tmp), std::span<T>(k3));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(t + dt, std::span<const T>(tmp), std::span<T>(k4));
    for (std::size_t i = 0; i < n; ++i) y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t = t0 + static_cast<double>(s) * dt;
    if (sample_every > 0 && s % sample_every == 0) on_sample(t, std::span<const T>(y));
  }
}

}  // namespace dgl::ode
