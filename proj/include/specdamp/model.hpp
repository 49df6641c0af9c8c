#pragma once

// Finite-dimensional damped second-order systems  z'' + K z + C z' = 0.
//
// K represents the stiffness operator and C the damping operator in an
// orthonormal basis of the state space H = R^n. Positions live in the energy
// space with inner product <x, y>_K = x^T K y; the phase space carries the
// energy norm ||(x, y)||_E^2 = x^T K x + y^T y.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "specdamp/errors.hpp"
#include "specdamp/linalg.hpp"

namespace specdamp {

using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::cplx;
using linalg::DenseMatrix;
using linalg::Vector;

inline constexpr std::size_t kDefaultMaxModes = 256;

/// Damping film patch: constant coefficient `a` on [from, to].
struct Patch {
  double a = 0.0;
  double from = 0.0;
  double to = 0.0;
  friend bool operator==(const Patch&, const Patch&) = default;
};

/// Euler-Bernoulli beam on [0, 1], pinned at 0 and sliding at 1, with
/// piecewise-constant Kelvin-Voigt damping coefficient.
struct BeamSpec {
  double E = 1.0;  // flexural rigidity
  std::vector<Patch> patches;
  std::size_t N = 16;  // retained modes
  friend bool operator==(const BeamSpec&, const BeamSpec&) = default;
};

struct GenericSource {};
struct BeamSource {
  BeamSpec spec;
};
struct PerturbedSource {
  double alpha = 0.0;
  DenseMatrix B;
  double compactness_proxy = 0.0;  // ||K^{-1/2} B K^{-1/2}||_2
};
using ModelSource = std::variant<GenericSource, BeamSource, PerturbedSource>;

struct SystemModel {
  DenseMatrix K;
  DenseMatrix C;
  ModelSource source = GenericSource{};
  // Declared positive values standing in for the essential spectrum of
  // K^{-1}C (a finite matrix has none). Optional for generic models.
  std::optional<std::vector<double>> essential_spectrum_proxy{};

  std::size_t n() const noexcept { return K.rows(); }
};

/// Element of the phase space (position, velocity).
template <class T>
struct PhaseVector {
  std::vector<T> position;
  std::vector<T> velocity;

  std::size_t n() const noexcept { return position.size(); }

  std::vector<T> flat() const {
    std::vector<T> v(position);
    v.insert(v.end(), velocity.begin(), velocity.end());
    return v;
  }
  static PhaseVector from_flat(std::span<const T> v) {
    const std::size_t n = v.size() / 2;
    return {std::vector<T>(v.begin(), v.begin() + n), std::vector<T>(v.begin() + n, v.end())};
  }
  static PhaseVector zero(std::size_t n) { return {std::vector<T>(n), std::vector<T>(n)}; }
};

using RealPhaseVector = PhaseVector<double>;
using ComplexPhaseVector = PhaseVector<cplx>;

struct ValidationReport {
  bool stiffness_positive_definite = false;
  double damping_min_eigenvalue = 0.0;
  // gamma <x,Kx> <= <x,Cx> <= alpha <x,Kx>; extreme eigenvalues of K^{-1/2} C K^{-1/2}
  double gamma = 0.0;
  double alpha = 0.0;
};

namespace detail {

inline void require_square_symmetric(const DenseMatrix& m, std::size_t n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << name << " must be " << n << "x" << n << ", got " << m.rows() << "x" << m.cols();
    throw InvalidModel(os.str());
  }
  for (double v : m.data())
    if (!std::isfinite(v)) throw InvalidModel(std::string(name) + " has non-finite entries");
  if (!linalg::is_symmetric(m)) throw InvalidModel(std::string(name) + " is not symmetric");
}

}  // namespace detail

inline DenseMatrix stiffness_sqrt(const SystemModel& m) {
  return linalg::sym_function(m.K, [](double x) { return std::sqrt(x); });
}
inline DenseMatrix stiffness_inv_sqrt(const SystemModel& m) {
  return linalg::sym_function(m.K, [](double x) { return 1.0 / std::sqrt(x); });
}

/// K^{-1/2} C K^{-1/2}: the damping operator seen in energy coordinates.
inline DenseMatrix damping_in_energy_basis(const SystemModel& m) {
  const auto kis = stiffness_inv_sqrt(m);
  return linalg::symmetrize(kis * m.C * kis);
}

/// Checks K symmetric positive definite and C symmetric positive semidefinite.
inline ValidationReport validate(const SystemModel& m) {
  const std::size_t n = m.n();
  if (n == 0) throw InvalidModel("empty model");
  detail::require_square_symmetric(m.K, n, "K");
  detail::require_square_symmetric(m.C, n, "C");

  ValidationReport r;
  try {
    linalg::cholesky(m.K);
  } catch (const NotPositiveDefinite& e) {
    throw InvalidModel("assumption (A1) violated: stiffness K is not positive definite (Cholesky pivot " +
                       std::to_string(e.pivot_index) + ")");
  }
  r.stiffness_positive_definite = true;

  const auto c_vals = linalg::sym_eigvals(m.C);
  r.damping_min_eigenvalue = c_vals.front();
  if (r.damping_min_eigenvalue < -1e-10 * linalg::frobenius_norm(m.C)) {
    std::ostringstream os;
    os << "assumption (A2) violated: damping C is not positive semidefinite (lambda_min = "
       << r.damping_min_eigenvalue << ")";
    throw InvalidModel(os.str());
  }
  const auto w = linalg::sym_eigvals(damping_in_energy_basis(m));
  r.gamma = std::max(0.0, w.front());
  r.alpha = std::max(0.0, w.back());
  return r;
}

/// Block operator [[0, I], [-K, -C]] on (position, velocity).
inline DenseMatrix phase_operator(const SystemModel& m) {
  const std::size_t n = m.n();
  DenseMatrix a(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, n + i) = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      a(n + i, j) = -m.K(i, j);
      a(n + i, n + j) = -m.C(i, j);
    }
  }
  return a;
}

/// Closed-form inverse [[-K^{-1}C, -K^{-1}], [I, 0]].
inline DenseMatrix phase_operator_inverse(const SystemModel& m) {
  const std::size_t n = m.n();
  const auto k_inv = linalg::inverse(m.K);
  const auto k_inv_c = k_inv * m.C;
  DenseMatrix a(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    a(n + i, i) = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = -k_inv_c(i, j);
      a(i, n + j) = -k_inv(i, j);
    }
  }
  return a;
}

/// The phase operator in energy-orthonormal coordinates (K^{1/2} x, y):
/// [[0, K^{1/2}], [-K^{1/2}, -C]]. Its symmetric part is diag(0, -C).
inline DenseMatrix energy_phase_operator(const SystemModel& m) {
  const std::size_t n = m.n();
  const auto ks = stiffness_sqrt(m);
  DenseMatrix a(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a(i, n + j) = ks(i, j);
      a(n + i, j) = -ks(i, j);
      a(n + i, n + j) = -m.C(i, j);
    }
  return a;
}

/// Block-diagonal change of basis diag(K^{1/2}, I) into energy coordinates.
inline DenseMatrix energy_transform(const SystemModel& m) {
  const std::size_t n = m.n();
  DenseMatrix s = DenseMatrix::identity(2 * n);
  s.set_block(0, 0, stiffness_sqrt(m));
  return s;
}

// ---------------------------------------------------------------------------
// Beam

namespace detail {

// sin(pi x), exact at multiples of 1/2
inline double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r == 0.0 || r == 1.0) return 0.0;
  if (r == 0.5) return 1.0;
  if (r == 1.5) return -1.0;
  return std::sin(std::numbers::pi * r);
}

// integral over [p, q] of 2 sin(w_j r) sin(w_k r), w_k = (k - 1/2) pi, j,k >= 1
inline double mode_product_integral(std::size_t j, std::size_t k, double p, double q) {
  const double beta = static_cast<double>(j + k - 1);
  auto antiderivative = [&](double r) {
    double v = -sin_pi(beta * r) / (beta * std::numbers::pi);
    if (j == k) {
      v += r;
    } else {
      const double alpha = static_cast<double>(j) - static_cast<double>(k);
      v += sin_pi(alpha * r) / (alpha * std::numbers::pi);
    }
    return v;
  };
  return antiderivative(q) - antiderivative(p);
}

}  // namespace detail

/// Frequency parameter of mode k (1-based): (k - 1/2) pi.
inline double beam_wavenumber(std::size_t k) { return (static_cast<double>(k) - 0.5) * std::numbers::pi; }

/// Sorts patches, merges touching patches with equal coefficient and checks
/// that they tile [0, 1] without overlap.
inline BeamSpec normalize_beam(BeamSpec spec, std::size_t max_modes = kDefaultMaxModes) {
  constexpr double gap_tol = 1e-12;
  if (!(spec.E > 0.0) || !std::isfinite(spec.E)) throw InvalidModel("flexural rigidity E must be positive");
  if (spec.N == 0) throw InvalidModel("truncation order N must be at least 1");
  if (spec.N > max_modes)
    throw InvalidModel("truncation order N = " + std::to_string(spec.N) + " exceeds the cap " +
                       std::to_string(max_modes));
  if (spec.patches.empty()) throw InvalidModel("beam needs at least one damping patch");
  for (const auto& p : spec.patches) {
    if (!(p.a > 0.0) || !std::isfinite(p.a)) throw InvalidModel("damping coefficients a_k must be positive");
    if (!(p.from < p.to) || p.from < -gap_tol || p.to > 1.0 + gap_tol)
      throw InvalidModel("patch intervals must satisfy 0 <= from < to <= 1");
  }
  auto& ps = spec.patches;
  std::sort(ps.begin(), ps.end(), [](const Patch& x, const Patch& y) { return x.from < y.from; });

  std::vector<Patch> merged;
  for (const auto& p : ps) {
    if (!merged.empty()) {
      auto& last = merged.back();
      if (p.from < last.to - gap_tol) throw InvalidModel("damping patches overlap");
      if (p.a == last.a && std::abs(p.from - last.to) <= gap_tol) {
        last.to = p.to;
        continue;
      }
    }
    merged.push_back(p);
  }
  double gap = merged.front().from + (1.0 - merged.back().to);
  for (std::size_t i = 1; i < merged.size(); ++i) gap += std::max(0.0, merged[i].from - merged[i - 1].to);
  if (gap > gap_tol) throw InvalidModel("damping patches do not cover [0, 1]");
  spec.patches = std::move(merged);
  return spec;
}

/// Galerkin truncation in the orthonormal eigenbasis sqrt(2) sin(w_k r):
/// K = diag(E w_k^4), C_jk = sum_m a_m w_j^2 w_k^2 int_{A_m} 2 sin(w_j r) sin(w_k r) dr.
inline SystemModel beam_assemble(const BeamSpec& raw, std::size_t max_modes = kDefaultMaxModes) {
  const BeamSpec spec = normalize_beam(raw, max_modes);
  const std::size_t n = spec.N;
  SystemModel m;
  m.K = DenseMatrix(n, n);
  m.C = DenseMatrix(n, n);
  std::vector<double> w2(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = beam_wavenumber(k + 1);
    w2[k] = w * w;
    m.K(k, k) = spec.E * w2[k] * w2[k];
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      double s = 0.0;
      for (const auto& p : spec.patches) s += p.a * detail::mode_product_integral(j + 1, k + 1, p.from, p.to);
      m.C(j, k) = m.C(k, j) = w2[j] * w2[k] * s;
    }
  m.source = BeamSource{spec};
  validate(m);
  return m;
}

/// Damping family C = alpha K + B with symmetric B.
inline SystemModel perturbed_kelvin_voigt(const DenseMatrix& K, double alpha, const DenseMatrix& B) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidModel("alpha must be positive");
  detail::require_square_symmetric(K, K.rows(), "K");
  detail::require_square_symmetric(B, K.rows(), "B");
  SystemModel m;
  m.K = K;
  m.C = linalg::symmetrize(alpha * K + B);
  validate(m);
  const auto kis = stiffness_inv_sqrt(m);
  const double proxy = linalg::operator_norm_2(linalg::DenseMatrix(kis * B * kis));
  m.source = PerturbedSource{alpha, B, proxy};
  return m;
}

inline SystemModel generic_model(DenseMatrix K, DenseMatrix C) {
  SystemModel m{std::move(K), std::move(C), GenericSource{}, std::nullopt};
  validate(m);
  return m;
}

inline const BeamSpec* beam_spec(const SystemModel& m) {
  if (const auto* b = std::get_if<BeamSource>(&m.source)) return &b->spec;
  return nullptr;
}

}  // namespace specdamp
