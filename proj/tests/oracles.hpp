#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls into the eigen-solvers under test.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "specdamp/linalg.hpp"

namespace oracle {

using cld = std::complex<long double>;
using specdamp::linalg::cplx;
using specdamp::linalg::DenseMatrix;

// Characteristic polynomial det(lambda I - M) by Faddeev-LeVerrier.
// Returns monic coefficients c[0..n] with c[0] = 1 (highest degree first).
inline std::vector<long double> characteristic_polynomial(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  using Mat = std::vector<std::vector<long double>>;
  Mat a(n, std::vector<long double>(n)), mk(n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
  std::vector<long double> c(n + 1, 0.0L);
  c[0] = 1.0L;
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k) / k
    Mat next(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        long double s = 0.0L;
        for (std::size_t l = 0; l < n; ++l) s += a[i][l] * mk[l][j];
        next[i][j] = s + (i == j ? c[k - 1] : 0.0L);
      }
    mk = next;
    long double tr = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) tr += a[i][l] * mk[l][i];
    c[k] = -tr / static_cast<long double>(k);
  }
  return c;
}

// Roots of a monic polynomial by Aberth-Ehrlich simultaneous iteration.
inline std::vector<cplx> polynomial_roots(const std::vector<long double>& c) {
  const std::size_t n = c.size() - 1;
  if (n == 0) return {};
  auto eval = [&](cld z, cld& dp) {
    cld p = c[0];
    dp = 0.0L;
    for (std::size_t k = 1; k <= n; ++k) {
      dp = dp * z + p;
      p = p * z + c[k];
    }
    return p;
  };
  long double radius = 0.0L;
  for (std::size_t k = 1; k <= n; ++k) radius = std::max(radius, std::pow(std::abs(c[k]), 1.0L / k));
  radius = 2.0L * radius + 1.0L;
  std::vector<cld> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const long double ang = 2.0L * 3.14159265358979323846L * k / n + 0.4L;
    z[k] = std::polar(radius * 0.5L, ang);
  }
  for (int it = 0; it < 500; ++it) {
    long double change = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      cld dp;
      const cld p = eval(z[k], dp);
      if (p == cld(0)) continue;
      const cld ratio = p / dp;
      cld sum = 0.0L;
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) sum += 1.0L / (z[k] - z[j]);
      const cld w = ratio / (1.0L - ratio * sum);
      z[k] -= w;
      change = std::max(change, std::abs(w) / (1.0L + std::abs(z[k])));
    }
    if (change < 1e-19L) break;
  }
  std::vector<cplx> out;
  for (auto r : z) out.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
  return out;
}

// Smallest achievable max |a_i - b_pi(i)| over matchings (exhaustive for
// small sets, greedy nearest pairing otherwise).
inline double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const std::size_t n = a.size();
  if (n <= 7) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  double worst = 0.0;
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t jbest = 0;
    double dbest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j] && std::abs(a[i] - b[j]) < dbest) dbest = std::abs(a[i] - b[j]), jbest = j;
    used[jbest] = true;
    worst = std::max(worst, dbest);
  }
  return worst;
}

// Same, with each pair's error scaled by (1 + |b|).
inline double multiset_relative_distance(std::vector<cplx> a, std::vector<cplx> b) {
  const std::size_t n = a.size();
  if (n != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t jbest = 0;
    double dbest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::abs(a[i] - b[j]) / std::max(std::abs(b[j]), 1e-300);
      if (!used[j] && d < dbest) dbest = d, jbest = j;
    }
    used[jbest] = true;
    worst = std::max(worst, dbest);
  }
  return worst;
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                        int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    const double delta = left + right - whole;
    if (d <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, d - 1) + rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, d - 1);
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, tol, depth);
}

// Brute-force angular minimum of (g^T W g)^2 - 4 g^T R g over the unit
// circle for 2x2 W, R: a uniform grid followed by golden-section refinement
// inside the best grid cell.
inline double overdamping_grid_minimum(const DenseMatrix& w, const DenseMatrix& r, int points = 3600) {
  auto f = [&](double th) {
    const double c = std::cos(th), s = std::sin(th);
    const double wq = w(0, 0) * c * c + 2 * w(0, 1) * c * s + w(1, 1) * s * s;
    const double rq = r(0, 0) * c * c + 2 * r(0, 1) * c * s + r(1, 1) * s * s;
    return wq * wq - 4.0 * rq;
  };
  const double pi = 3.14159265358979323846;
  const double step = 2 * pi / points;
  int best = 0;
  double fbest = f(0.0);
  for (int k = 1; k < points; ++k)
    if (f(k * step) < fbest) fbest = f(k * step), best = k;
  double lo = (best - 1) * step, hi = (best + 1) * step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({fbest, f1, f2});
}

// ---------------------------------------------------------------------------
// random inputs

inline DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  DenseMatrix m(r, c);
  for (auto& v : m.data()) v = g(rng);
  return m;
}

inline DenseMatrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  auto a = random_matrix(rng, n, n);
  return specdamp::linalg::symmetrize(a + specdamp::linalg::transpose(a));
}

// K = L L^T + I, C = M^T M: always a valid damped system.
inline std::pair<DenseMatrix, DenseMatrix> random_kc(std::mt19937_64& rng, std::size_t n) {
  using specdamp::linalg::transpose;
  const auto l = random_matrix(rng, n, n);
  const auto m = random_matrix(rng, n, n);
  auto k = specdamp::linalg::symmetrize(l * transpose(l) + DenseMatrix::identity(n));
  auto c = specdamp::linalg::symmetrize(transpose(m) * m);
  return {k, c};
}

inline DenseMatrix random_orthogonal(std::mt19937_64& rng, std::size_t n) {
  // Gram-Schmidt on a Gaussian matrix
  auto a = random_matrix(rng, n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double d = 0;
      for (std::size_t i = 0; i < n; ++i) d += a(i, j) * a(i, p);
      for (std::size_t i = 0; i < n; ++i) a(i, j) -= d * a(i, p);
    }
    double nn = 0;
    for (std::size_t i = 0; i < n; ++i) nn += a(i, j) * a(i, j);
    nn = std::sqrt(nn);
    for (std::size_t i = 0; i < n; ++i) a(i, j) /= nn;
  }
  return a;
}


// ---------------------------------------------------------------------------
// matrix exponential: Taylor series on exp(tA / 2^s) in long double, then squaring

inline DenseMatrix expm_taylor(const DenseMatrix& a, double t) {
  const std::size_t n = a.rows();
  using Mat = std::vector<long double>;
  long double norm = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double row = 0;
    for (std::size_t j = 0; j < n; ++j) row += std::fabs(static_cast<long double>(a(i, j)) * t);
    norm = std::max(norm, row);
  }
  int s = 0;
  while (norm > 0.25L) norm /= 2, ++s;
  const long double scale = static_cast<long double>(t) / std::ldexp(1.0L, s);
  auto mul = [n](const Mat& x, const Mat& y) {
    Mat z(n * n, 0.0L);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) z[i * n + j] += x[i * n + k] * y[k * n + j];
    return z;
  };
  Mat b(n * n), term(n * n, 0.0L), sum(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b[i * n + j] = a(i, j) * scale;
  for (std::size_t i = 0; i < n; ++i) term[i * n + i] = sum[i * n + i] = 1.0L;
  for (int k = 1; k <= 30; ++k) {
    term = mul(term, b);
    for (auto& v : term) v /= k;
    for (std::size_t i = 0; i < n * n; ++i) sum[i] += term[i];
  }
  for (int i = 0; i < s; ++i) sum = mul(sum, sum);
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = static_cast<double>(sum[i * n + j]);
  return out;
}

// 1 / sigma_min of a complex 2x2 matrix from its Frobenius norm and determinant
inline double inverse_norm_2x2(cplx a, cplx b, cplx c, cplx d) {
  const double f = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
  const double det = std::abs(a * d - b * c);
  // sigma_min sigma_max = |det| avoids cancellation in sigma_min
  const double smax2 = 0.5 * (f + std::sqrt(std::max(0.0, f * f - 4 * det * det)));
  return std::sqrt(smax2) / det;
}

}  // namespace oracle
