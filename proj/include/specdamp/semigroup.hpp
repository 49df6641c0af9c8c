#pragma once

// Time evolution of x' = A x, energy decay and resolvent probes.
//
// Everything runs in energy coordinates z = (K^{1/2} x, y), where the energy
// norm is Euclidean and A~ = S A S^{-1} generates a contraction semigroup.
// Norms reported here (resolvent, smoothing) are energy norms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "specdamp/errors.hpp"
#include "specdamp/linalg.hpp"
#include "specdamp/model.hpp"
#include "specdamp/tolerance.hpp"

namespace specdamp {

enum class EvolutionMethod { exact_modal, trapezoidal };

inline const char* to_string(EvolutionMethod m) noexcept {
  return m == EvolutionMethod::exact_modal ? "exact-modal" : "trapezoidal";
}

inline constexpr double kModalConditionLimit = 1e4;

struct TrajectoryReport {
  std::vector<double> times;
  std::vector<RealPhaseVector> states;
  std::vector<double> energies;
  EvolutionMethod method = EvolutionMethod::exact_modal;
  double eigenvector_condition = 0.0;  // energy-normalized eigenvector matrix
  double step = 0.0;                   // trapezoidal substep, 0 for exact-modal
};

struct ResolventSample {
  cplx lambda;
  double norm = 0.0;
  double product = 0.0;  // norm * |Im lambda|
};

struct ResolventScan {
  std::vector<ResolventSample> samples;
  double fitted_M = 0.0;    // max product
  double tail_slope = 0.0;  // d log(product) / d log|Im lambda| over the last decade
  bool bounded = false;     // tail_slope <= 0.05
  double sector_ratio = 0.0;      // max |Im lambda_k| / |Re lambda_k| over the spectrum
  double sector_angle_deg = 0.0;  // atan of sector_ratio, 90 when unbounded
  bool sectorial = false;         // bounded && finite sector ratio
  // exponent m and width eta of the near-axis bound |Im lambda|^{-m}: not fitted
  std::optional<double> near_axis_m;
  std::optional<double> near_axis_eta;
};

struct SmoothingStatistic {
  double value = 0.0;  // sup_t t ||A~ z(t)|| / ||z0||
  double at_time = 0.0;
};

/// x^T K x + y^T y.
inline double energy(const SystemModel& m, const RealPhaseVector& x) {
  const std::size_t n = m.n();
  if (x.position.size() != n || x.velocity.size() != n) throw std::invalid_argument("energy: dimension mismatch");
  return linalg::dot(x.position, m.K * x.position) + linalg::dot(x.velocity, x.velocity);
}

namespace detail {

inline Vector to_energy_real(const SystemModel& m, const DenseMatrix& k_sqrt, const RealPhaseVector& x) {
  const std::size_t n = m.n();
  Vector z(2 * n);
  const auto kx = k_sqrt * x.position;
  for (std::size_t i = 0; i < n; ++i) z[i] = kx[i], z[n + i] = x.velocity[i];
  return z;
}

inline RealPhaseVector from_energy_real(const DenseMatrix& k_inv_sqrt, const Vector& z) {
  const std::size_t n = z.size() / 2;
  const Vector top(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
  return {k_inv_sqrt * top, Vector(z.begin() + static_cast<std::ptrdiff_t>(n), z.end())};
}

struct ModalForm {
  ComplexMatrix v, v_inv;
  ComplexVector lambda;
  double condition = std::numeric_limits<double>::infinity();
};

// Eigen-decomposition of A~ with unit columns; condition infinite when V is
// numerically singular.
inline ModalForm modal_form(const DenseMatrix& at, const ToleranceProfile& tol) {
  ModalForm f;
  const auto eig = linalg::nonsym_eig(at, tol);
  f.v = eig.eigenvectors;
  f.lambda = eig.eigenvalues;
  try {
    f.v_inv = linalg::inverse(f.v);
    f.condition = linalg::operator_norm_2(f.v) * linalg::operator_norm_2(f.v_inv);
  } catch (const Singular&) {
    f.condition = std::numeric_limits<double>::infinity();
  }
  return f;
}

inline DenseMatrix modal_propagator(const ModalForm& f, double t) {
  const std::size_t n = f.v.rows();
  ComplexMatrix ve = f.v;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx e = std::exp(f.lambda[j] * t);
    for (std::size_t i = 0; i < n; ++i) ve(i, j) *= e;
  }
  const ComplexMatrix p = ve * f.v_inv;
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = p(i, j).real();
  return out;
}

// ((I - hA/2)^{-1} (I + hA/2))^(2^k) with h = dt / 2^k.
inline DenseMatrix cayley_power(const DenseMatrix& a, double dt, unsigned k) {
  const std::size_t n = a.rows();
  const double h = std::ldexp(dt, -static_cast<int>(k));
  DenseMatrix minus = DenseMatrix::identity(n), plus = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      minus(i, j) -= 0.5 * h * a(i, j);
      plus(i, j) += 0.5 * h * a(i, j);
    }
  DenseMatrix p = linalg::inverse(minus) * plus;
  for (unsigned s = 0; s < k; ++s) p = p * p;
  return p;
}

// Trapezoidal propagator over dt with Richardson-controlled refinement:
// the substep starts at min(0.01, 0.1 / ||A||_2) and halves until two
// successive levels agree to 1e-10 (relative to the propagated state).
inline DenseMatrix trapezoidal_propagator(const DenseMatrix& a, double a_norm, double dt, const Vector& probe,
                                          double& step_out) {
  const double h0 = std::min(0.01, 0.1 / std::max(a_norm, 1e-300));
  unsigned k = 0;
  while (std::ldexp(dt, -static_cast<int>(k)) > h0 && k < 60) ++k;
  DenseMatrix p = cayley_power(a, dt, k);
  const double scale = std::max(linalg::norm2(probe), 1e-300);
  for (int halvings = 0; halvings < 20; ++halvings) {
    DenseMatrix q = cayley_power(a, dt, k + 1);
    auto diff_vec = q * probe;
    const auto coarse = p * probe;
    for (std::size_t i = 0; i < diff_vec.size(); ++i) diff_vec[i] -= coarse[i];
    const double diff = linalg::norm2(diff_vec);
    p = std::move(q);
    ++k;
    if (diff <= 1e-10 * scale) break;
  }
  step_out = std::ldexp(dt, -static_cast<int>(k));
  return p;
}

}  // namespace detail

/// Solution of x' = A x sampled at `times` (nonnegative, ascending).
///
/// Uses x(t) = V e^{Lambda t} V^{-1} x0 when the energy-normalized
/// eigenvector matrix has condition number at most 1e4, otherwise the
/// trapezoidal (Cayley) propagator with step control.
inline TrajectoryReport evolve(const SystemModel& m, const RealPhaseVector& x0, const std::vector<double>& times,
                               const ToleranceProfile& tol = {}) {
  validate(m);
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]) || (i > 0 && times[i] < times[i - 1]))
      throw std::invalid_argument("evolve: times must be finite, nonnegative and ascending");

  const auto k_sqrt = stiffness_sqrt(m);
  const auto k_inv_sqrt = stiffness_inv_sqrt(m);
  const auto at = energy_phase_operator(m);
  const Vector z0 = detail::to_energy_real(m, k_sqrt, x0);

  TrajectoryReport out;
  out.times = times;
  const auto modal = detail::modal_form(at, tol);
  out.eigenvector_condition = modal.condition;
  out.method = modal.condition <= kModalConditionLimit ? EvolutionMethod::exact_modal : EvolutionMethod::trapezoidal;

  const double a_norm = linalg::operator_norm_2(at);
  Vector z = z0;
  double t_prev = 0.0;
  DenseMatrix cached;
  double cached_dt = -1.0;
  for (double t : times) {
    if (t == 0.0) {
      out.states.push_back(x0);
      out.energies.push_back(energy(m, x0));
      continue;
    }
    Vector zt;
    if (out.method == EvolutionMethod::exact_modal) {
      zt = detail::modal_propagator(modal, t) * z0;
    } else {
      const double dt = t - t_prev;
      if (dt > 0.0) {
        if (dt != cached_dt) {
          cached = detail::trapezoidal_propagator(at, a_norm, dt, z, out.step);
          cached_dt = dt;
        }
        z = cached * z;
      }
      zt = z;
      t_prev = t;
    }
    auto state = detail::from_energy_real(k_inv_sqrt, zt);
    out.energies.push_back(linalg::dot(zt, zt));
    out.states.push_back(std::move(state));
  }
  return out;
}

/// Energy-coordinate propagator T~(t) = exp(t A~) by the modal formula.
inline DenseMatrix energy_propagator(const SystemModel& m, double t, const ToleranceProfile& tol = {}) {
  const auto modal = detail::modal_form(energy_phase_operator(m), tol);
  if (modal.condition > kModalConditionLimit)
    throw NumericalError("energy_propagator: eigenvector matrix too ill-conditioned for the modal formula");
  return detail::modal_propagator(modal, t);
}

namespace detail {

inline double resolvent_norm(const DenseMatrix& at, cplx lambda) {
  ComplexMatrix shifted = linalg::to_complex(at);
  for (std::size_t i = 0; i < at.rows(); ++i) shifted(i, i) -= lambda;
  return linalg::operator_norm_2(linalg::inverse(shifted));
}

inline void require_off_spectrum(const ComplexVector& spectrum, cplx lambda, const ToleranceProfile& tol) {
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& mu : spectrum) dist = std::min(dist, std::abs(mu - lambda));
  if (dist <= tol.cluster_tol * (1.0 + std::abs(lambda))) throw NearSpectrum(lambda, dist);
}

}  // namespace detail

/// ||(A - lambda)^{-1}|| in the energy norm.
inline double resolvent_norm_at(const SystemModel& m, cplx lambda, const ToleranceProfile& tol = {}) {
  validate(m);
  const auto at = energy_phase_operator(m);
  detail::require_off_spectrum(linalg::nonsym_eig(at, tol).eigenvalues, lambda, tol);
  try {
    return detail::resolvent_norm(at, lambda);
  } catch (const Singular&) {
    throw NearSpectrum(lambda, 0.0);
  }
}

/// `count` points geometrically spaced over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw std::invalid_argument("log_grid: need 0 < lo <= hi, count > 0");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
  if (count > 1) g.back() = hi;
  return g;
}

/// Resolvent norms along the vertical line re_offset + i t, t in im_grid.
inline ResolventScan resolvent_scan(const SystemModel& m, double re_offset, const std::vector<double>& im_grid,
                                    const ToleranceProfile& tol = {}) {
  validate(m);
  const auto at = energy_phase_operator(m);
  const auto spectrum = linalg::nonsym_eig(at, tol).eigenvalues;

  ResolventScan scan;
  for (double t : im_grid) {
    const cplx l(re_offset, t);
    detail::require_off_spectrum(spectrum, l, tol);
    ResolventSample s;
    s.lambda = l;
    try {
      s.norm = detail::resolvent_norm(at, l);
    } catch (const Singular&) {
      throw NearSpectrum(l, 0.0);
    }
    s.product = s.norm * std::abs(t);
    scan.fitted_M = std::max(scan.fitted_M, s.product);
    scan.samples.push_back(s);
  }

  // least-squares slope of log(product) against log|t| over the last decade
  if (!scan.samples.empty()) {
    const double t_end = std::abs(scan.samples.back().lambda.imag());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (const auto& s : scan.samples) {
      const double t = std::abs(s.lambda.imag());
      if (t <= 0 || s.product <= 0 || t < t_end / 10.0) continue;
      const double x = std::log(t), y = std::log(s.product);
      sx += x, sy += y, sxx += x * x, sxy += x * y, cnt += 1;
    }
    const double den = cnt * sxx - sx * sx;
    scan.tail_slope = (cnt >= 2 && den > 0) ? (cnt * sxy - sx * sy) / den : 0.0;
  }
  scan.bounded = std::isfinite(scan.fitted_M) && scan.tail_slope <= 0.05;

  for (const auto& mu : spectrum) {
    if (mu.imag() == 0.0) continue;
    scan.sector_ratio = mu.real() == 0.0 ? std::numeric_limits<double>::infinity()
                                         : std::max(scan.sector_ratio, std::abs(mu.imag()) / std::abs(mu.real()));
    if (std::isinf(scan.sector_ratio)) break;
  }
  scan.sector_angle_deg = std::atan(scan.sector_ratio) * 180.0 / std::numbers::pi;
  scan.sectorial = scan.bounded && std::isfinite(scan.sector_ratio);
  return scan;
}

/// sup over t_grid of t ||A~ z(t)|| / ||z0||, energy norms.
inline SmoothingStatistic smoothing_probe(const SystemModel& m, const RealPhaseVector& x0,
                                          const std::vector<double>& t_grid, const ToleranceProfile& tol = {}) {
  const auto traj = evolve(m, x0, t_grid, tol);
  const auto k_sqrt = stiffness_sqrt(m);
  const auto at = energy_phase_operator(m);
  const double n0 = std::sqrt(energy(m, x0));
  SmoothingStatistic s;
  if (n0 == 0.0) return s;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const Vector z = detail::to_energy_real(m, k_sqrt, traj.states[i]);
    const double v = t_grid[i] * linalg::norm2(at * z) / n0;
    if (v > s.value) s.value = v, s.at_time = t_grid[i];
  }
  return s;
}

}  // namespace specdamp
