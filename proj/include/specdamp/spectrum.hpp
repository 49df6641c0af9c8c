#pragma once

// Spectrum of the quadratic pencil lambda^2 + lambda C + K through its
// first-order linearization, with the a-priori eigenvalue bound and the
// truncation-limit accumulation experiment for beams.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "specdamp/linalg.hpp"
#include "specdamp/model.hpp"
#include "specdamp/tolerance.hpp"

namespace specdamp {

struct Eigenpair {
  cplx lambda;
  ComplexPhaseVector vector;  // unit Euclidean norm in (x, y) coordinates
  double residual = 0.0;
};

/// |lambda| >= value for every eigenvalue, with
/// value = (sqrt(d^2 + 4v) - d) / (2v), d = ||K^{-1}C|| in the energy
/// inner product, v = ||K^{-1}||.
struct EigenvalueBound {
  double norm_AinvD = 0.0;
  double norm_Ainv = 0.0;
  double value = 0.0;
};

struct AccumulationPoint {
  double location = 0.0;  // -E / a_k
  std::size_t count = 0;  // eigenvalues within the radius
  double nearest_distance = std::numeric_limits<double>::infinity();
};

struct AccumulationRow {
  std::size_t N = 0;
  std::vector<AccumulationPoint> points;
};

struct AccumulationReport {
  double radius = 0.01;
  std::vector<double> predicted;
  std::vector<AccumulationRow> rows;
  bool counts_nondecreasing = true;
};

struct SpectrumReport {
  std::vector<Eigenpair> eigenpairs;  // sorted by (Re, Im)
  EigenvalueBound bound;
  double disk_radius = 0.0;
  double operator_norm_frobenius = 0.0;  // ||A||_F of the phase operator
  double max_structure_defect = 0.0;     // max ||y - lambda x|| / (||y|| + |lambda| ||x||)
  std::optional<AccumulationReport> accumulation;

  std::vector<cplx> eigenvalues() const {
    std::vector<cplx> v;
    v.reserve(eigenpairs.size());
    for (const auto& p : eigenpairs) v.push_back(p.lambda);
    return v;
  }
};

struct Cluster {
  cplx center;
  std::vector<std::size_t> members;  // indices into SpectrumReport::eigenpairs
  double spread = 0.0;               // max |lambda_i - center|

  bool is_real() const noexcept { return center.imag() == 0.0; }
};

inline EigenvalueBound eigenvalue_lower_bound(const SystemModel& m) {
  EigenvalueBound b;
  const auto k_vals = linalg::sym_eigvals(m.K);
  b.norm_Ainv = 1.0 / k_vals.front();
  // the energy-space norm of K^{-1}C equals the Euclidean norm of K^{-1/2} C K^{-1/2}
  const auto w_vals = linalg::sym_eigvals(damping_in_energy_basis(m));
  b.norm_AinvD = std::max(std::abs(w_vals.front()), std::abs(w_vals.back()));
  // rationalized form of (sqrt(d^2 + 4v) - d) / (2v)
  b.value = 2.0 / (std::sqrt(b.norm_AinvD * b.norm_AinvD + 4.0 * b.norm_Ainv) + b.norm_AinvD);
  return b;
}

/// Radius r of the disk certified by r ||K^{-1}C|| + r^2 ||K^{-1}|| <= 1.
/// The positive root coincides with eigenvalue_lower_bound().value.
inline double resolvent_disk_radius(const SystemModel& m) {
  const auto b = eigenvalue_lower_bound(m);
  const double d = b.norm_AinvD, v = b.norm_Ainv;
  return 2.0 / (d + std::sqrt(d * d + 4.0 * v));
}

inline SpectrumReport solve_qep(const SystemModel& m, const ToleranceProfile& tol = {}) {
  validate(m);
  const std::size_t n = m.n();
  const DenseMatrix a = phase_operator(m);
  const auto eig = linalg::nonsym_eig(a, tol);

  SpectrumReport r;
  r.operator_norm_frobenius = linalg::frobenius_norm(a);
  r.eigenpairs.reserve(2 * n);
  for (std::size_t k = 0; k < 2 * n; ++k) {
    Eigenpair p;
    p.lambda = eig.eigenvalues[k];
    auto col = eig.eigenvectors.col(k);

    double defect = 0.0;
    for (std::size_t i = 0; i < n; ++i) defect += std::norm(col[n + i] - p.lambda * col[i]);
    const double scale = linalg::norm2(std::span<const cplx>(col.data() + n, n)) +
                         std::abs(p.lambda) * linalg::norm2(std::span<const cplx>(col.data(), n));
    r.max_structure_defect = std::max(r.max_structure_defect, std::sqrt(defect) / scale);

    // Rebuild the smaller block from the larger one so that y = lambda x holds
    // to rounding. For |lambda| > 1 the position block is the small one.
    if (std::abs(p.lambda) > 1.0) {
      for (std::size_t i = 0; i < n; ++i) col[i] = col[n + i] / p.lambda;
    } else {
      for (std::size_t i = 0; i < n; ++i) col[n + i] = p.lambda * col[i];
    }
    linalg::detail::canonicalize(col);
    p.residual = linalg::detail::residual(a, r.operator_norm_frobenius, col, p.lambda);
    if (p.residual > tol.residual_tol)
      throw NoConvergence("eigenvector for " + detail::format_complex(p.lambda), 5);
    p.vector = ComplexPhaseVector::from_flat(col);
    r.eigenpairs.push_back(std::move(p));
  }
  r.bound = eigenvalue_lower_bound(m);
  r.disk_radius = resolvent_disk_radius(m);
  return r;
}

/// Groups eigenvalues closer than cluster_tol (1 + |lambda|) (single linkage).
/// Cluster centers are member means; nearly real centers are snapped.
inline std::vector<Cluster> cluster_eigenvalues(const SpectrumReport& r, const ToleranceProfile& tol = {}) {
  const std::size_t n = r.eigenpairs.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx li = r.eigenpairs[i].lambda, lj = r.eigenpairs[j].lambda;
      if (std::abs(li - lj) <= tol.cluster_tol * (1.0 + std::max(std::abs(li), std::abs(lj))))
        parent[find(i)] = find(j);
    }
  std::vector<Cluster> clusters;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[root])].members.push_back(i);
  }
  for (auto& c : clusters) {
    cplx sum{};
    for (auto i : c.members) sum += r.eigenpairs[i].lambda;
    c.center = sum / static_cast<double>(c.members.size());
    if (std::abs(c.center.imag()) <= tol.snap_real_tol * (1.0 + std::abs(c.center))) c.center = {c.center.real(), 0.0};
    for (auto i : c.members) c.spread = std::max(c.spread, std::abs(r.eigenpairs[i].lambda - c.center));
  }
  return clusters;
}

/// Eigenvectors mapped to energy coordinates (K^{1/2} x, y), each scaled to
/// unit energy norm. Columns follow the eigenpair order.
inline ComplexMatrix energy_eigenvectors(const SystemModel& m, const SpectrumReport& r) {
  const std::size_t n = m.n();
  const auto ks = stiffness_sqrt(m);
  ComplexMatrix v(2 * n, r.eigenpairs.size());
  for (std::size_t k = 0; k < r.eigenpairs.size(); ++k) {
    const auto& p = r.eigenpairs[k].vector;
    ComplexVector col(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      cplx s{};
      for (std::size_t j = 0; j < n; ++j) s += ks(i, j) * p.position[j];
      col[i] = s;
      col[n + i] = p.velocity[i];
    }
    const double nv = linalg::norm2(col);
    for (auto& x : col) x /= nv;
    v.set_col(k, col);
  }
  return v;
}

/// Condition number of the energy-normalized eigenvector matrix; infinite
/// when the eigenvectors do not span (defective spectrum).
inline double energy_condition_number(const SystemModel& m, const SpectrumReport& r) {
  return linalg::condition_number(energy_eigenvectors(m, r));
}

/// Sorted distinct values -E / a_k.
inline std::vector<double> predicted_accumulation_points(const BeamSpec& spec) {
  std::vector<double> pts;
  for (const auto& p : spec.patches) pts.push_back(-spec.E / p.a);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// For each truncation order, counts eigenvalues of the truncated phase
/// operator within `radius` of every predicted accumulation point -E/a_k.
/// Orders are evaluated concurrently; the result does not depend on
/// scheduling.
inline AccumulationReport accumulation_experiment(const BeamSpec& spec, const std::vector<std::size_t>& orders,
                                                  double radius = 0.01, const ToleranceProfile& tol = {},
                                                  std::size_t max_modes = kDefaultMaxModes) {
  if (!std::is_sorted(orders.begin(), orders.end()) ||
      std::adjacent_find(orders.begin(), orders.end()) != orders.end())
    throw std::invalid_argument("accumulation orders must be strictly ascending");
  if (!(radius > 0.0)) throw std::invalid_argument("accumulation radius must be positive");
  const BeamSpec base = normalize_beam(spec, max_modes);

  AccumulationReport rep;
  rep.radius = radius;
  rep.predicted = predicted_accumulation_points(base);

  auto evaluate = [&](std::size_t N) {
    BeamSpec s = base;
    s.N = N;
    const auto model = beam_assemble(s, max_modes);
    const auto eig = linalg::nonsym_eig(phase_operator(model), tol);
    AccumulationRow row;
    row.N = N;
    for (double pt : rep.predicted) {
      AccumulationPoint ap;
      ap.location = pt;
      for (const auto& l : eig.eigenvalues) {
        const double d = std::abs(l - cplx(pt, 0.0));
        ap.nearest_distance = std::min(ap.nearest_distance, d);
        if (d <= radius) ++ap.count;
      }
      row.points.push_back(ap);
    }
    return row;
  };

  std::vector<std::future<AccumulationRow>> jobs;
  for (std::size_t N : orders) jobs.push_back(std::async(std::launch::async, evaluate, N));
  for (auto& j : jobs) rep.rows.push_back(j.get());

  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    for (std::size_t p = 0; p < rep.predicted.size(); ++p)
      if (rep.rows[i].points[p].count < rep.rows[i - 1].points[p].count) rep.counts_nondecreasing = false;
  return rep;
}

}  // namespace specdamp
