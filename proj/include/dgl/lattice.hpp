#pragma once

// Truncated lattice states and the combined local/non-local discrete
// Ginzburg-Landau right-hand side
//
//   du_n/dt = (1-delta) u_n + (1+i alpha)(u_{n+1} - 2u_n + u_{n-1})
//             - (1+i beta) [ gamma |u_n|^2 u_n + (mu/2)(u_{n+1}+u_{n-1}) |u_n|^2 ] + g_n
//
// (gamma, mu) = (1, 0) is the local lattice (L-DGL), (0, 1) the non-local one (NL-DGL).
// States live on a finite window [first, last]; every site outside it is zero.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgl {

using Complex = std::complex<double>;

struct ModelParams {
  double alpha = 0.0;  ///< linear dispersion
  double beta = 0.0;   ///< nonlinear phase
  double delta = 2.0;  ///< gain (< 1) or loss (> 1)
  double gamma = 1.0;  ///< weight of the on-site cubic term
  double mu = 0.0;     ///< weight of the nearest-neighbour cubic term

  static ModelParams ldgl(double alpha, double beta, double delta) {
    return {alpha, beta, delta, 1.0, 0.0};
  }
  static ModelParams nldgl(double alpha, double beta, double delta) {
    return {alpha, beta, delta, 0.0, 1.0};
  }

  [[nodiscard]] bool is_ldgl() const { return gamma == 1.0 && mu == 0.0; }
  [[nodiscard]] bool is_nldgl() const { return gamma == 0.0 && mu == 1.0; }
  /// sqrt(1 + beta^2), the modulus of (1 + i beta).
  [[nodiscard]] double phase_modulus() const { return std::sqrt(1.0 + beta * beta); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

class LatticeState {
 public:
  LatticeState() = default;
  LatticeState(int first, std::vector<Complex> values) : first_(first), values_(std::move(values)) {}

  static LatticeState zeros(int first, std::size_t size) {
    return LatticeState(first, std::vector<Complex>(size));
  }
  /// The symmetric window [-half_width, half_width], all zero.
  static LatticeState window(int half_width) {
    if (half_width < 0) throw std::invalid_argument("window half width must be non-negative");
    return zeros(-half_width, static_cast<std::size_t>(2 * half_width + 1));
  }
  /// amplitude * e_site on the symmetric window.
  static LatticeState unit(int site, int half_width, Complex amplitude = 1.0) {
    auto s = window(half_width);
    if (!s.contains(site)) throw std::invalid_argument("site " + std::to_string(site) + " outside window");
    s[site] = amplitude;
    return s;
  }

  [[nodiscard]] int first() const { return first_; }
  [[nodiscard]] int last() const { return first_ + static_cast<int>(values_.size()) - 1; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool empty() const { return values_.empty(); }
  [[nodiscard]] bool contains(int n) const { return !empty() && n >= first_ && n <= last(); }

  /// Zero-extended read.
  [[nodiscard]] Complex at(int n) const {
    return contains(n) ? values_[static_cast<std::size_t>(n - first_)] : Complex{};
  }
  Complex& operator[](int n) { return values_.at(static_cast<std::size_t>(n - first_)); }
  const Complex& operator[](int n) const { return values_.at(static_cast<std::size_t>(n - first_)); }

  [[nodiscard]] std::span<const Complex> values() const { return values_; }
  [[nodiscard]] std::span<Complex> values() { return values_; }
  [[nodiscard]] std::vector<Complex>& storage() { return values_; }

  /// Copy onto [first, first + size); sites dropped by the new window are discarded.
  [[nodiscard]] LatticeState rewindowed(int first, std::size_t size) const {
    LatticeState out = zeros(first, size);
    for (std::size_t i = 0; i < size; ++i) out.values_[i] = at(first + static_cast<int>(i));
    return out;
  }

  LatticeState& operator*=(Complex c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  friend LatticeState operator*(Complex c, LatticeState s) { return s *= c; }

  /// Site-wise sum/difference on the union of both windows.
  friend LatticeState operator+(const LatticeState& a, const LatticeState& b) { return combine(a, b, 1.0); }
  friend LatticeState operator-(const LatticeState& a, const LatticeState& b) { return combine(a, b, -1.0); }

  friend bool operator==(const LatticeState&, const LatticeState&) = default;

 private:
  static LatticeState combine(const LatticeState& a, const LatticeState& b, double sign) {
    if (a.empty()) return sign > 0 ? b : -1.0 * b;
    if (b.empty()) return a;
    const int lo = std::min(a.first(), b.first());
    const int hi = std::max(a.last(), b.last());
    LatticeState out = zeros(lo, static_cast<std::size_t>(hi - lo + 1));
    for (int n = lo; n <= hi; ++n) out[n] = a.at(n) + sign * b.at(n);
    return out;
  }

  int first_ = 0;
  std::vector<Complex> values_;
};

struct Norms {
  double l2_sq = 0.0;       ///< sum |u_n|^2
  double l4_quartic = 0.0;  ///< sum |u_n|^4
  double linf = 0.0;        ///< max |u_n|
};

/// Sums run in increasing site order.
inline Norms norms(const LatticeState& s) {
  Norms out;
  double max_sq = 0.0;
  for (const Complex& v : s.values()) {
    const double m = std::norm(v);
    out.l2_sq += m;
    out.l4_quartic += m * m;
    max_sq = std::max(max_sq, m);
  }
  out.linf = std::sqrt(max_sq);
  return out;
}

inline double norm2(std::span<const Complex> values) {
  double acc = 0.0;
  for (const Complex& v : values) acc += std::norm(v);
  return acc;
}
inline double norm2(const LatticeState& s) { return norm2(s.values()); }

/// (a, b) = sum a_n conj(b_n); only the overlap of the windows contributes.
inline Complex inner(const LatticeState& a, const LatticeState& b) {
  if (a.empty() || b.empty()) return {};
  const int lo = std::max(a.first(), b.first());
  const int hi = std::min(a.last(), b.last());
  Complex acc{};
  for (int n = lo; n <= hi; ++n) acc += a.at(n) * std::conj(b.at(n));
  return acc;
}

/// sum |u_{n+1} - u_n|^2 over every edge touching the window (zero extension).
inline double dirichlet_energy(const LatticeState& s) {
  if (s.empty()) return 0.0;
  double acc = 0.0;
  for (int n = s.first() - 1; n <= s.last(); ++n) acc += std::norm(s.at(n + 1) - s.at(n));
  return acc;
}

/// (Delta_d u)_n = u_{n+1} - 2u_n + u_{n-1}; the result window is one site wider on each side.
inline LatticeState discrete_laplacian(const LatticeState& s) {
  if (s.empty()) throw std::invalid_argument("discrete_laplacian: empty window");
  LatticeState out = LatticeState::zeros(s.first() - 1, s.size() + 2);
  for (int n = out.first(); n <= out.last(); ++n) out[n] = (s.at(n + 1) + s.at(n - 1)) - 2.0 * s.at(n);
  return out;
}

/// External force g with its squared l2 norm cached.
struct Forcing {
  LatticeState state;
  double norm2 = 0.0;

  Forcing() = default;
  explicit Forcing(LatticeState g) : state(std::move(g)), norm2(dgl::norm2(state)) {}

  static Forcing zero() { return Forcing{}; }
  /// c e_site with c = sqrt(target_norm2), so that ||g||^2 is hit exactly up to one rounding.
  static Forcing single_site(int site, double target_norm2) {
    if (!(target_norm2 >= 0.0)) throw std::invalid_argument("forcing target_norm2 must be >= 0");
    return Forcing(LatticeState(site, {Complex(std::sqrt(target_norm2), 0.0)}));
  }
};

/// The forcing laid out on [first, first + size). Non-zero forcing outside that window is an error.
inline std::vector<Complex> aligned_forcing(const Forcing& f, int first, std::size_t size) {
  std::vector<Complex> g(size);
  const auto& s = f.state;
  for (int n = s.first(); n <= s.last() && !s.empty(); ++n) {
    const Complex v = s.at(n);
    const long idx = static_cast<long>(n) - first;
    if (idx >= 0 && idx < static_cast<long>(size)) {
      g[static_cast<std::size_t>(idx)] = v;
    } else if (v != Complex{}) {
      throw std::invalid_argument("forcing is non-zero at site " + std::to_string(n) +
                                  ", outside the evaluation window");
    }
  }
  return g;
}

/// Right-hand side on a fixed window: u, g and out share the window, neighbours
/// beyond the ends read as zero. `out` must not alias `u`.
inline void evaluate_rhs(std::span<const Complex> u, std::span<const Complex> g, const ModelParams& p,
                         std::span<Complex> out) {
  const std::size_t n_sites = u.size();
  const Complex disp(1.0, p.alpha);
  const Complex phase(1.0, p.beta);
  const double linear = 1.0 - p.delta;
  const double half_mu = 0.5 * p.mu;
  for (std::size_t i = 0; i < n_sites; ++i) {
    const Complex un = u[i];
    const Complex up = i + 1 < n_sites ? u[i + 1] : Complex{};
    const Complex um = i > 0 ? u[i - 1] : Complex{};
    const double m = std::norm(un);
    const Complex lap = (up + um) - 2.0 * un;
    const Complex nonlinear = (p.gamma * m) * un + (half_mu * m) * (up + um);
    out[i] = linear * un + disp * lap - phase * nonlinear + g[i];
  }
}

/// F(u) evaluated on the window of `state` (stencil output clamped back to that window).
inline LatticeState rhs_combined(const LatticeState& state, const ModelParams& params, const Forcing& forcing) {
  const auto g = aligned_forcing(forcing, state.first(), state.size());
  LatticeState out = LatticeState::zeros(state.first(), state.size());
  evaluate_rhs(state.values(), g, params, out.values());
  return out;
}

/// N(u)_n = -(1+i beta)[gamma |u_n|^2 u_n + (mu/2)(u_{n+1}+u_{n-1})|u_n|^2] on the window of `state`.
inline LatticeState nonlinear_term(const LatticeState& state, const ModelParams& p) {
  LatticeState out = LatticeState::zeros(state.first(), state.size());
  const Complex phase(1.0, p.beta);
  for (int n = state.first(); n <= state.last(); ++n) {
    const Complex un = state.at(n);
    const double m = std::norm(un);
    out[n] = -phase * ((p.gamma * m) * un + (0.5 * p.mu * m) * (state.at(n + 1) + state.at(n - 1)));
  }
  return out;
}

/// Lipschitz constant of N on the l2 ball of radius R:
/// ||N(u) - N(v)|| <= 3 sqrt(1+beta^2) (|gamma| + |mu|) R^2 ||u - v||.
inline double lipschitz_bound(const ModelParams& p, double radius) {
  return 3.0 * p.phase_modulus() * (std::abs(p.gamma) + std::abs(p.mu)) * radius * radius;
}

/// Signed decomposition of d||u||^2/dt:
///   total = gain_loss - dirichlet - local_quartic - nonlocal_cubic + forcing_work.
struct BalanceTerms {
  double gain_loss = 0.0;       ///< 2(1 - delta)||u||^2
  double dirichlet = 0.0;       ///< 2 sum |u_{n+1} - u_n|^2
  double local_quartic = 0.0;   ///< 2 gamma sum |u_n|^4
  double nonlocal_cubic = 0.0;  ///< mu Re[(1+i beta) sum |u_n|^2 (u_{n+1}+u_{n-1}) conj(u_n)]
  double forcing_work = 0.0;    ///< 2 Re sum g_n conj(u_n)
  double total = 0.0;
};

struct BalanceCheck {
  BalanceTerms terms;
  double residual = 0.0;  ///< |2 Re (F(u), u) - terms.total|
};

inline BalanceCheck balance_residual(const LatticeState& state, const ModelParams& p, const Forcing& forcing) {
  BalanceCheck out;
  if (state.empty()) return out;
  auto& t = out.terms;
  const Norms nm = norms(state);
  t.gain_loss = 2.0 * (1.0 - p.delta) * nm.l2_sq;
  t.dirichlet = 2.0 * dirichlet_energy(state);
  t.local_quartic = 2.0 * p.gamma * nm.l4_quartic;
  Complex cubic{};
  for (int n = state.first(); n <= state.last(); ++n) {
    const Complex un = state.at(n);
    cubic += std::norm(un) * (state.at(n + 1) + state.at(n - 1)) * std::conj(un);
  }
  t.nonlocal_cubic = p.mu * (Complex(1.0, p.beta) * cubic).real();
  t.forcing_work = 2.0 * inner(forcing.state, state).real();
  t.total = t.gain_loss - t.dirichlet - t.local_quartic - t.nonlocal_cubic + t.forcing_work;

  const double direct = 2.0 * inner(rhs_combined(state, p, forcing), state).real();
  out.residual = std::abs(direct - t.total);
  return out;
}

}  // namespace dgl
