#pragma once

#include <stdexcept>
#include <string>

namespace specdamp {

/// Numerical thresholds shared by every stage of the analysis.
///
/// All values are relative: residuals to the Frobenius norm of the operator,
/// eigenvalue comparisons to (1 + |lambda|), Krein Gram values to the
/// energy-norm scale of the basis they were computed on.
struct ToleranceProfile {
  double residual_tol = 1e-9;   // ||M v - lambda v|| / ||M||_F
  double snap_real_tol = 1e-9;  // |Im lambda| <= tol * (1 + |lambda|) is snapped to real
  double cluster_tol = 1e-7;    // eigenvalues closer than tol * (1 + |lambda|) share a cluster
  double neutral_tol = 1e-8;    // |Gram eigenvalue| <= tol counts as neutral
  double orth_tol = 1e-8;       // Krein cross-Gram tolerance for decompositions
  double rank_tol = 1e-8;       // singular-value threshold for kernel dimension

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string("tolerance '") + name + "' must be positive");
    };
    check(residual_tol, "residual_tol");
    check(snap_real_tol, "snap_real_tol");
    check(cluster_tol, "cluster_tol");
    check(neutral_tol, "neutral_tol");
    check(orth_tol, "orth_tol");
    check(rank_tol, "rank_tol");
  }
};

}  // namespace specdamp
