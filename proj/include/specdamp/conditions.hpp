#pragma once

// The three sufficient conditions for a Riesz basis of eigenvectors:
//   (i)   overdamping, (w(g))^2 - 4 r(g) > 0 uniformly on the unit sphere,
//   (ii)  no degenerate kernel at the reciprocals of essential-spectrum values,
//   (iii) ||K^{-1/2}|| below the essential spectrum of K^{-1}C,
// plus the threshold table for Kelvin-Voigt beams.
//
// Condition (i) is evaluated in the variable g = K^{1/2} f, where the energy
// norm of f is the Euclidean norm of g, w(g) = g^T W g with
// W = K^{-1/2} C K^{-1/2}, and r(g) = g^T K^{-1} g.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "specdamp/krein.hpp"
#include "specdamp/linalg.hpp"
#include "specdamp/model.hpp"
#include "specdamp/spectrum.hpp"
#include "specdamp/tolerance.hpp"

namespace specdamp {

inline constexpr std::size_t kOverdampingRestarts = 32;
inline constexpr double kDetectorBand = 1e-6;

struct OverdampingResult {
  double margin = 0.0;
  Vector minimizer;  // unit g = K^{1/2} f attaining the margin
  double line_search_value = 0.0;  // min over s of lambda_max(s^2 I + s W + K^{-1})
  double line_search_s = 0.0;
  std::optional<double> certificate;  // s* with L(s*) negative definite
  std::uint64_t seed = 0;
  std::size_t starts = 0;

  bool holds() const noexcept { return margin > 0.0 && certificate.has_value(); }
};

enum class Verdict { holds_vacuously, holds, fails };

inline const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::holds_vacuously: return "holds_vacuously";
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
  }
  return "?";
}

struct ConditionIIItem {
  double mu = 0.0;      // essential-spectrum candidate of -K^{-1}C
  double target = 0.0;  // 1/mu, where an eigenvalue of A would sit
  Verdict verdict = Verdict::holds_vacuously;
  double nearest_distance = std::numeric_limits<double>::infinity();
  std::optional<GramCheck> gram;
};

struct ConditionIII {
  double lhs = 0.0;  // lambda_min(K)^{-1/2}
  double rhs = 0.0;  // inf of the (declared) essential spectrum of K^{-1}C
  bool holds = false;
  std::string rhs_source;

  double margin() const noexcept { return rhs - lhs; }
};

struct EndeePatch {
  Patch patch;
  double threshold_i_printed = 0.0;    // 8 / (pi^2 sqrt E), as printed
  double threshold_i_derived = 0.0;  // 8 sqrt(E) / pi^2
  double threshold_iii = 0.0;        // 4 sqrt(E) / pi^2
  bool above_i_printed = false;
  bool above_i_derived = false;
  bool above_iii = false;
};

struct EndeeReport {
  double E = 0.0;
  std::size_t N = 0;
  std::vector<EndeePatch> patches;
  double overdamping_margin = 0.0;
};

struct ConditionReport {
  OverdampingResult overdamping;
  std::vector<ConditionIIItem> condition_ii;
  std::optional<ConditionIII> condition_iii;  // absent for generic models without a proxy
  std::optional<EndeeReport> endee;
  double gamma_eq = 0.0;
  double alpha_eq = 0.0;

  bool condition_i_holds() const noexcept { return overdamping.holds(); }
  bool condition_ii_holds() const noexcept {
    return std::none_of(condition_ii.begin(), condition_ii.end(),
                        [](const ConditionIIItem& c) { return c.verdict == Verdict::fails; });
  }
};

namespace detail {

struct OverdampingForms {
  DenseMatrix w;  // K^{-1/2} C K^{-1/2}
  DenseMatrix r;  // K^{-1}
};

inline OverdampingForms overdamping_forms(const SystemModel& m) {
  const auto ki = stiffness_inv_sqrt(m);
  return {damping_in_energy_basis(m), linalg::symmetrize(ki * ki)};
}

inline double overdamping_value(const OverdampingForms& f, const Vector& g) {
  const double w = linalg::dot(g, f.w * g);
  return w * w - 4.0 * linalg::dot(g, f.r * g);
}

// Riemannian gradient descent on the unit sphere with Armijo backtracking.
inline double sphere_descent(const OverdampingForms& f, Vector& g, double scale) {
  const std::size_t n = g.size();
  auto normalize = [](Vector& v) {
    const double nv = linalg::norm2(v);
    for (auto& x : v) x /= nv;
  };
  normalize(g);
  double val = overdamping_value(f, g);
  double step = 1.0 / std::max(scale, 1e-300);
  for (int it = 0; it < 5000; ++it) {
    const Vector wg = f.w * g, rg = f.r * g;
    const double w = linalg::dot(g, wg);
    Vector grad(n);
    for (std::size_t i = 0; i < n; ++i) grad[i] = 4.0 * w * wg[i] - 8.0 * rg[i];
    const double radial = linalg::dot(g, grad);
    for (std::size_t i = 0; i < n; ++i) grad[i] -= radial * g[i];
    const double gn2 = linalg::dot(grad, grad);
    if (std::sqrt(gn2) <= 1e-14 * scale) break;

    bool moved = false, stalled = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vector trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = g[i] - step * grad[i];
      normalize(trial);
      const double tv = overdamping_value(f, trial);
      if (tv <= val - 1e-4 * step * gn2) {
        const double gain = val - tv;
        g = std::move(trial);
        val = tv;
        moved = true;
        step *= 2.0;
        stalled = gain <= 1e-17 * scale;  // progress at rounding level
        break;
      }
      step *= 0.5;
    }
    if (!moved || stalled) break;
  }
  return val;
}

// min over s in [lo, 0] of lambda_max(s^2 I + s W + R): convex in s.
inline std::pair<double, double> definiteness_line_search(const OverdampingForms& f, double lo) {
  const std::size_t n = f.w.rows();
  auto phi = [&](double s) {
    DenseMatrix l = f.r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) l(i, j) += s * f.w(i, j);
    for (std::size_t i = 0; i < n; ++i) l(i, i) += s * s;
    return linalg::sym_eigvals(linalg::symmetrize(l)).back();
  };
  double a = lo, b = 0.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - gr * (b - a), f1 = phi(x1);
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + gr * (b - a), f2 = phi(x2);
    }
  }
  return f1 < f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace detail

/// Condition (i): minimum of (g^T W g)^2 - 4 g^T K^{-1} g over unit g, from
/// 32 seeded restarts plus eigenvector starts, cross-checked against the
/// definiteness line search. Disagreement outside the 1e-6 band throws.
inline OverdampingResult check_overdamping(const SystemModel& m, std::uint64_t seed = 0) {
  validate(m);
  const std::size_t n = m.n();
  const auto forms = detail::overdamping_forms(m);
  const auto w_eig = linalg::sym_eig(forms.w);
  const auto r_eig = linalg::sym_eig(forms.r);
  const double w_max = std::max(std::abs(w_eig.values.front()), std::abs(w_eig.values.back()));
  const double scale = w_max * w_max + 4.0 * r_eig.values.back();

  OverdampingResult out;
  out.seed = seed;
  out.margin = std::numeric_limits<double>::infinity();
  auto consider = [&](Vector g) {
    const double v = detail::sphere_descent(forms, g, scale);
    ++out.starts;
    if (v < out.margin) out.margin = v, out.minimizer = std::move(g);
  };
  for (std::size_t k = 0; k < n; ++k) {
    consider(w_eig.vectors.col(k));
    consider(r_eig.vectors.col(k));
  }
  for (std::uint64_t i = 0; i < kOverdampingRestarts; ++i) {
    std::mt19937_64 rng(seed + i);
    std::normal_distribution<double> gauss;
    Vector g(n);
    for (auto& x : g) x = gauss(rng);
    consider(std::move(g));
  }

  const auto [s, v] = detail::definiteness_line_search(forms, -w_max);
  out.line_search_s = s;
  out.line_search_value = v;
  const double v_floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale);
  if (v < -v_floor) out.certificate = s;

  if ((out.margin > kDetectorBand && !out.certificate) || (out.margin < -kDetectorBand && out.certificate))
    throw OptimizerDisagreement(out.margin, v);
  return out;
}

/// Essential-spectrum values of K^{-1}C used by conditions (ii) and (iii):
/// a_k/E for beams, alpha for perturbed models, otherwise the declared proxy.
inline std::optional<std::vector<double>> essential_spectrum_values(const SystemModel& m, std::string* source = nullptr) {
  auto set = [&](const char* s) {
    if (source) *source = s;
  };
  if (m.essential_spectrum_proxy) {
    set("declared proxy");
    return m.essential_spectrum_proxy;
  }
  if (const auto* b = beam_spec(m)) {
    std::vector<double> v;
    for (const auto& p : b->patches) v.push_back(p.a / b->E);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    set("beam a_k / E");
    return v;
  }
  if (const auto* p = std::get_if<PerturbedSource>(&m.source)) {
    set("perturbed alpha");
    return std::vector<double>{p->alpha};
  }
  return std::nullopt;
}

/// Condition (ii) at candidates mu (values of -K^{-1}C's essential spectrum).
inline std::vector<ConditionIIItem> check_condition_ii(const SystemModel& m, const SpectrumReport& r,
                                                       const std::vector<double>& candidates,
                                                       const ToleranceProfile& tol = {}) {
  std::vector<ConditionIIItem> out;
  for (double mu : candidates) {
    if (mu == 0.0 || !std::isfinite(mu)) throw std::invalid_argument("condition (ii) candidate must be finite and nonzero");
    ConditionIIItem item;
    item.mu = mu;
    item.target = 1.0 / mu;
    std::vector<ComplexPhaseVector> kernel;
    for (const auto& p : r.eigenpairs) {
      const double d = std::abs(p.lambda - item.target);
      item.nearest_distance = std::min(item.nearest_distance, d);
      if (d <= tol.cluster_tol * (1.0 + std::abs(item.target))) kernel.push_back(p.vector);
    }
    if (!kernel.empty()) {
      item.gram = kernel_gram_nondegeneracy(m, item.target, kernel, tol);
      item.verdict = item.gram->nondegenerate ? Verdict::holds : Verdict::fails;
    }
    out.push_back(std::move(item));
  }
  return out;
}

/// Condition (iii): lambda_min(K)^{-1/2} < inf of the essential spectrum.
inline ConditionIII check_condition_iii(const SystemModel& m) {
  ConditionIII c;
  const auto ess = essential_spectrum_values(m, &c.rhs_source);
  if (!ess || ess->empty()) throw MissingEssentialSpectrumProxy();
  double rhs = std::numeric_limits<double>::infinity();
  for (double x : *ess)
    if (x > 0) rhs = std::min(rhs, x);
  c.rhs = rhs;
  c.lhs = 1.0 / std::sqrt(linalg::sym_eigvals(m.K).front());
  c.holds = c.lhs < c.rhs;
  return c;
}

namespace detail {

inline EndeeReport endee_table(const BeamSpec& spec) {
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double root_e = std::sqrt(spec.E);
  EndeeReport rep;
  rep.E = spec.E;
  rep.N = spec.N;
  for (const auto& p : spec.patches) {
    EndeePatch e;
    e.patch = p;
    e.threshold_i_printed = 8.0 / (pi2 * root_e);
    e.threshold_i_derived = 8.0 * root_e / pi2;
    e.threshold_iii = 4.0 * root_e / pi2;
    e.above_i_printed = p.a > e.threshold_i_printed;
    e.above_i_derived = p.a > e.threshold_i_derived;
    e.above_iii = p.a > e.threshold_iii;
    rep.patches.push_back(e);
  }
  return rep;
}

}  // namespace detail

/// Threshold table for a Kelvin-Voigt beam. Both condition-(i) constants are
/// listed next to the measured margin of the assembled model.
inline EndeeReport endee_report(const BeamSpec& raw, std::uint64_t seed = 0, std::size_t max_modes = kDefaultMaxModes) {
  const BeamSpec spec = normalize_beam(raw, max_modes);
  auto rep = detail::endee_table(spec);
  rep.overdamping_margin = check_overdamping(beam_assemble(spec, max_modes), seed).margin;
  return rep;
}

/// All three conditions. Condition (iii) is left empty for a generic model
/// with no declared proxy; condition (ii) then has no candidates.
inline ConditionReport check_conditions(const SystemModel& m, const SpectrumReport& r, const ToleranceProfile& tol = {},
                                        std::uint64_t seed = 0) {
  ConditionReport out;
  const auto v = validate(m);
  out.gamma_eq = v.gamma;
  out.alpha_eq = v.alpha;
  out.overdamping = check_overdamping(m, seed);
  if (const auto ess = essential_spectrum_values(m)) {
    std::vector<double> mus;
    for (double x : *ess)
      if (x > 0) mus.push_back(-x);
    out.condition_ii = check_condition_ii(m, r, mus, tol);
    out.condition_iii = check_condition_iii(m);
  }
  if (const auto* b = beam_spec(m)) {
    out.endee = detail::endee_table(*b);
    out.endee->overdamping_margin = out.overdamping.margin;
  }
  return out;
}

}  // namespace specdamp
