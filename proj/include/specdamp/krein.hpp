#pragma once

// Indefinite inner product [u, v] = <x_u, x_v>_K - <y_u, y_v> on the phase
// space, sign classification of eigenvalue clusters and the split of the
// phase space into a negative-type part H' and its complement H''.
//
// All Gram computations run in energy coordinates (K^{1/2} x, y), where the
// product becomes diag(I, -I) and the energy norm is Euclidean.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "specdamp/linalg.hpp"
#include "specdamp/model.hpp"
#include "specdamp/spectrum.hpp"
#include "specdamp/tolerance.hpp"

namespace specdamp {

enum class SignType { positive, negative, neutral, mixed };

inline const char* to_string(SignType s) noexcept {
  switch (s) {
    case SignType::positive: return "positive";
    case SignType::negative: return "negative";
    case SignType::neutral: return "neutral";
    case SignType::mixed: return "mixed";
  }
  return "?";
}

struct ClusterSign {
  cplx lambda;                       // cluster center
  std::vector<std::size_t> members;  // eigenpair indices
  SignType sign_type = SignType::neutral;
  ComplexMatrix gram;                // Hermitian; real for real clusters
  std::vector<double> gram_eigenvalues;
  double margin = 0.0;  // min over Gram eigenvalues of ||g| - tau|
  std::size_t algebraic_multiplicity = 0;
  std::size_t geometric_multiplicity = 0;
  std::size_t jordan_defect = 0;
  std::size_t nonpositive_directions = 0;  // Gram eigenvalues <= tau
  double rank_threshold = 0.0;
  double tau = 0.0;  // neutral threshold actually applied, see classify_eigenpairs
};

struct SignClassification {
  std::vector<ClusterSign> clusters;
  std::vector<std::size_t> cluster_of;  // eigenpair index -> cluster index
  double tau_neutral = 0.0;

  const ClusterSign& of_eigenpair(std::size_t i) const { return clusters.at(cluster_of.at(i)); }
};

struct GramCheck {
  bool nondegenerate = true;
  std::vector<double> gram_eigenvalues;
  double gram_norm = 0.0;
  double tau = 0.0;
  std::optional<ComplexPhaseVector> witness;  // null-Gram direction, original coordinates
};

struct Decomposition {
  std::vector<std::size_t> h_prime;        // negative-type real eigenpairs with lambda <= -M_cut
  std::vector<std::size_t> h_doubleprime;  // everything else
  double m_cut = std::numeric_limits<double>::infinity();
  double cross_gram_norm = 0.0;
  double hprime_definiteness = -std::numeric_limits<double>::infinity();
  double tau_orth = 0.0;

  bool verified() const noexcept { return cross_gram_norm <= tau_orth && hprime_definiteness < 0.0; }
};

/// x_u^T K conj(x_v) - y_u^T conj(y_v).
template <class T>
T indefinite_product(const SystemModel& m, const PhaseVector<T>& u, const PhaseVector<T>& v) {
  const std::size_t n = m.n();
  if (u.position.size() != n || v.position.size() != n || u.velocity.size() != n || v.velocity.size() != n)
    throw std::invalid_argument("indefinite_product: dimension mismatch");
  auto cj = [](const T& z) {
    if constexpr (std::is_same_v<T, cplx>) return std::conj(z);
    else return z;
  };
  T s{};
  for (std::size_t i = 0; i < n; ++i) {
    T kx{};
    for (std::size_t j = 0; j < n; ++j) kx += m.K(i, j) * cj(v.position[j]);
    s += u.position[i] * kx;
  }
  for (std::size_t i = 0; i < n; ++i) s -= u.velocity[i] * cj(v.velocity[i]);
  return s;
}

/// Matrix of (u, v) -> [A~ u, v] in the energy basis, i.e. J A~ with
/// J = diag(I, -I). Symmetric exactly when A is self-adjoint for [., .].
inline DenseMatrix krein_operator_gram(const SystemModel& m) {
  DenseMatrix g = energy_phase_operator(m);
  const std::size_t n = m.n();
  for (std::size_t i = n; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j) g(i, j) = -g(i, j);
  return g;
}

namespace detail {

inline ComplexVector to_energy(const DenseMatrix& k_sqrt, const ComplexPhaseVector& v) {
  const std::size_t n = v.position.size();
  ComplexVector e(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx s{};
    for (std::size_t j = 0; j < n; ++j) s += k_sqrt(i, j) * v.position[j];
    e[i] = s;
    e[n + i] = v.velocity[i];
  }
  return e;
}

inline ComplexPhaseVector from_energy(const DenseMatrix& k_inv_sqrt, const ComplexVector& e) {
  const std::size_t n = e.size() / 2;
  ComplexPhaseVector v = ComplexPhaseVector::zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx s{};
    for (std::size_t j = 0; j < n; ++j) s += k_inv_sqrt(i, j) * e[j];
    v.position[i] = s;
    v.velocity[i] = e[n + i];
  }
  return v;
}

// [u, v] in energy coordinates.
inline cplx energy_krein(const ComplexVector& u, const ComplexVector& v) {
  const std::size_t n = u.size() / 2;
  cplx s{};
  for (std::size_t i = 0; i < n; ++i) s += u[i] * std::conj(v[i]);
  for (std::size_t i = n; i < 2 * n; ++i) s -= u[i] * std::conj(v[i]);
  return s;
}

inline ComplexMatrix krein_gram(const std::vector<ComplexVector>& basis) {
  const std::size_t m = basis.size();
  ComplexMatrix g(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g(i, j) = energy_krein(basis[j], basis[i]);
  return g;
}

// Directions closer than this are the same eigenvector. Computed vectors of a
// perturbed Jordan block of size m agree to about eps^(1/m); orthogonalized
// vectors of a semisimple cluster differ at order one.
inline double basis_tolerance(const ToleranceProfile& tol) { return std::sqrt(tol.rank_tol); }

// Pivoted Gram-Schmidt: picks up to `want` orthonormal directions from the
// candidates, largest remaining residual first. Returns fewer when the next
// residual falls below `tol`. Candidates should have norm at most one.
inline std::vector<ComplexVector> pivoted_orthonormal(std::vector<ComplexVector> cand, std::size_t want,
                                                      double tol) {
  std::vector<ComplexVector> basis;
  while (basis.size() < want && !cand.empty()) {
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      const double nv = linalg::norm2(cand[i]);
      if (nv > best_norm) best_norm = nv, best = i;
    }
    if (best_norm <= tol) break;
    ComplexVector q = cand[best];
    for (auto& x : q) x /= best_norm;
    cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(best));
    for (auto& c : cand) {
      const cplx proj = linalg::inner(c, q);
      for (std::size_t i = 0; i < c.size(); ++i) c[i] -= proj * q[i];
    }
    basis.push_back(std::move(q));
  }
  return basis;
}

// Unit energy vector, split into real and imaginary parts when the
// eigenspace is real. Parts are not rescaled, so the imaginary residue of a
// real eigenvector stays negligible.
inline void push_candidates(std::vector<ComplexVector>& cand, ComplexVector e, bool real_space) {
  const double ne = linalg::norm2(e);
  if (ne == 0.0) return;
  for (auto& x : e) x /= ne;
  if (!real_space) {
    cand.push_back(std::move(e));
    return;
  }
  ComplexVector re(e.size()), im(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) re[k] = e[k].real(), im[k] = e[k].imag();
  cand.push_back(std::move(re));
  cand.push_back(std::move(im));
}

inline std::vector<ComplexVector> cluster_candidates(const DenseMatrix& k_sqrt, const SpectrumReport& r,
                                                     const std::vector<std::size_t>& members, bool real_center) {
  std::vector<ComplexVector> cand;
  for (auto i : members) push_candidates(cand, to_energy(k_sqrt, r.eigenpairs[i].vector), real_center);
  return cand;
}

// Gram entries of an energy-orthonormal basis are at most one in modulus, so
// tau_neutral is absolute. A cluster whose members spread by delta is a
// perturbed multiple eigenvalue whose Gram is only known to O(delta).
inline double neutral_threshold(const ToleranceProfile& tol, double spread, cplx center) {
  return std::max(tol.neutral_tol, 10.0 * spread / (1.0 + std::abs(center)));
}

inline SignType sign_of(const std::vector<double>& g, double tau) {
  bool pos = true, neg = true, neu = true;
  for (double x : g) {
    pos = pos && x > tau;
    neg = neg && x < -tau;
    neu = neu && std::abs(x) <= tau;
  }
  if (g.empty()) return SignType::neutral;
  if (pos) return SignType::positive;
  if (neg) return SignType::negative;
  if (neu) return SignType::neutral;
  return SignType::mixed;
}

}  // namespace detail

/// Sign type and Jordan defect for every eigenvalue cluster.
///
/// The cluster basis is an energy-orthonormal basis of the span of the
/// computed eigenvectors, truncated to the geometric multiplicity, so Gram
/// eigenvalues lie in [-1, 1] and tau_neutral is an absolute threshold.
/// The geometric multiplicity is the numerical nullity of A~ - lambda I.
inline SignClassification classify_eigenpairs(const SystemModel& m, const SpectrumReport& r,
                                              const ToleranceProfile& tol = {}) {
  const auto clusters = cluster_eigenvalues(r, tol);
  const auto k_sqrt = stiffness_sqrt(m);
  const auto at = energy_phase_operator(m);
  const double at_norm = linalg::frobenius_norm(at);
  const std::size_t dim = at.rows();

  SignClassification out;
  out.tau_neutral = tol.neutral_tol;
  out.cluster_of.assign(r.eigenpairs.size(), 0);
  for (const auto& c : clusters) {
    ClusterSign cs;
    cs.lambda = c.center;
    cs.members = c.members;
    cs.algebraic_multiplicity = c.members.size();

    cs.rank_threshold = std::max({tol.rank_tol * (1.0 + std::abs(c.center)), 10.0 * c.spread,
                                  100.0 * std::numeric_limits<double>::epsilon() * at_norm});
    ComplexMatrix shifted = linalg::to_complex(at);
    for (std::size_t i = 0; i < dim; ++i) shifted(i, i) -= c.center;
    const std::size_t nullity = linalg::numerical_nullity(shifted, cs.rank_threshold);
    cs.geometric_multiplicity = std::clamp<std::size_t>(nullity, 1, cs.algebraic_multiplicity);
    cs.jordan_defect = cs.algebraic_multiplicity - cs.geometric_multiplicity;

    const auto basis = detail::pivoted_orthonormal(detail::cluster_candidates(k_sqrt, r, c.members, c.is_real()),
                                                   cs.geometric_multiplicity, detail::basis_tolerance(tol));
    if (basis.size() < cs.geometric_multiplicity) throw IllConditionedCluster(c.center);

    cs.gram = detail::krein_gram(basis);
    cs.gram_eigenvalues = linalg::hermitian_eigvals(cs.gram);
    cs.tau = detail::neutral_threshold(tol, c.spread, c.center);
    cs.sign_type = detail::sign_of(cs.gram_eigenvalues, cs.tau);
    cs.margin = std::numeric_limits<double>::infinity();
    for (double g : cs.gram_eigenvalues) {
      cs.margin = std::min(cs.margin, std::abs(std::abs(g) - cs.tau));
      if (g <= cs.tau) ++cs.nonpositive_directions;
    }
    for (auto i : c.members) out.cluster_of[i] = out.clusters.size();
    out.clusters.push_back(std::move(cs));
  }
  return out;
}

/// Degeneracy of [., .] on the eigenspace of a real eigenvalue, spanned by
/// `cluster`. The Gram matrix is taken on an energy-orthonormal basis, so its
/// scale is one and nondegeneracy means min |eig(Gram)| > tau.
inline GramCheck kernel_gram_nondegeneracy(const SystemModel& m, double lambda,
                                           const std::vector<ComplexPhaseVector>& cluster,
                                           const ToleranceProfile& tol = {}) {
  if (cluster.empty()) throw std::invalid_argument("kernel_gram_nondegeneracy: empty cluster");
  if (!std::isfinite(lambda)) throw std::invalid_argument("kernel_gram_nondegeneracy: lambda must be real and finite");
  const auto k_sqrt = stiffness_sqrt(m);

  // eigenspace of a real eigenvalue is real: work with real and imaginary parts
  std::vector<ComplexVector> cand;
  double spread = 0.0;
  for (const auto& v : cluster) {
    detail::push_candidates(cand, detail::to_energy(k_sqrt, v), true);
    // each vector carries its own eigenvalue through y = mu x
    cplx num{};
    double den = 0.0;
    for (std::size_t i = 0; i < v.position.size(); ++i) {
      num += v.velocity[i] * std::conj(v.position[i]);
      den += std::norm(v.position[i]);
    }
    if (den > 0) spread = std::max(spread, std::abs(num / den - lambda));
  }
  const auto basis = detail::pivoted_orthonormal(cand, cluster.size(), detail::basis_tolerance(tol));
  const std::size_t k = basis.size();
  if (k == 0) throw std::invalid_argument("kernel_gram_nondegeneracy: cluster vectors vanish");
  DenseMatrix g(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) g(i, j) = detail::energy_krein(basis[i], basis[j]).real();

  GramCheck out;
  const auto eig = linalg::sym_eig(linalg::symmetrize(g));
  out.gram_eigenvalues = eig.values;
  out.gram_norm = linalg::operator_norm_2(g);
  std::size_t imin = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (std::abs(eig.values[i]) < std::abs(eig.values[imin])) imin = i;
  out.tau = detail::neutral_threshold(tol, spread, lambda);
  out.nondegenerate = std::abs(eig.values[imin]) > out.tau;
  if (!out.nondegenerate) {
    ComplexVector w(basis.front().size());
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t p = 0; p < w.size(); ++p) w[p] += eig.vectors(i, imin) * basis[i][p];
    auto wv = detail::from_energy(stiffness_inv_sqrt(m), w);
    auto flat = wv.flat();
    linalg::detail::canonicalize(flat);
    out.witness = ComplexPhaseVector::from_flat(flat);
  }
  return out;
}

/// Splits the eigenvectors into H' (negative-type real eigenvalues at or
/// below -M_cut) and H'' (the rest). M_cut is the smallest M such that every
/// real eigenvalue <= -M is of negative type.
inline Decomposition decompose(const SystemModel& m, const SpectrumReport& r, const SignClassification& cls,
                               const ToleranceProfile& tol = {}) {
  for (const auto& c : cls.clusters)
    if (c.sign_type == SignType::mixed) throw MixedClusterObstruction(c.lambda);

  Decomposition d;
  d.tau_orth = tol.orth_tol;

  // most negative real cluster that is not of negative type
  double barrier = std::numeric_limits<double>::infinity();
  for (const auto& c : cls.clusters)
    if (c.lambda.imag() == 0.0 && c.sign_type != SignType::negative) barrier = std::min(barrier, c.lambda.real());
  std::vector<bool> in_prime(cls.clusters.size(), false);
  double closest = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cls.clusters.size(); ++k) {
    const auto& c = cls.clusters[k];
    if (c.lambda.imag() == 0.0 && c.sign_type == SignType::negative && c.lambda.real() < barrier) {
      in_prime[k] = true;
      closest = std::max(closest, c.lambda.real());
    }
  }
  if (std::isfinite(closest)) d.m_cut = -closest;

  for (std::size_t i = 0; i < r.eigenpairs.size(); ++i)
    (in_prime[cls.cluster_of[i]] ? d.h_prime : d.h_doubleprime).push_back(i);

  const auto k_sqrt = stiffness_sqrt(m);
  auto unit_energy = [&](std::size_t i) {
    auto e = detail::to_energy(k_sqrt, r.eigenpairs[i].vector);
    const double ne = linalg::norm2(e);
    for (auto& x : e) x /= ne;
    return e;
  };
  std::vector<ComplexVector> prime, dprime;
  for (auto i : d.h_prime) prime.push_back(unit_energy(i));
  for (auto i : d.h_doubleprime) dprime.push_back(unit_energy(i));

  double cross = 0.0;
  for (const auto& u : prime)
    for (const auto& v : dprime) cross += std::norm(detail::energy_krein(u, v));
  d.cross_gram_norm = std::sqrt(cross);

  if (!prime.empty()) {
    const auto basis = detail::pivoted_orthonormal(prime, prime.size(), tol.rank_tol);
    d.hprime_definiteness = linalg::hermitian_eigvals(detail::krein_gram(basis)).back();
  }
  return d;
}

}  // namespace specdamp
