#pragma once

// Dense real/complex linear algebra kernels: Cholesky, symmetric and
// nonsymmetric eigensolvers, LU solves, rank and norm estimates.
//
// Matrices are row-major. Complex arithmetic appears only where results are
// genuinely complex (eigenvectors of real nonsymmetric matrices, shifted
// solves at complex points); the QR iteration itself runs in real arithmetic.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "specdamp/errors.hpp"
#include "specdamp/tolerance.hpp"

namespace specdamp::linalg {

using cplx = std::complex<double>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }
  static Matrix diagonal(std::span<const T> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::vector<T> col(std::size_t j) const {
    std::vector<T> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_col(std::size_t j, std::span<const T> c) {
    assert(c.size() == rows_);
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
  }

  const std::vector<T>& data() const noexcept { return data_; }
  std::vector<T>& data() noexcept { return data_; }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix dimension mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using DenseMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;
using Vector = std::vector<double>;
using ComplexVector = std::vector<cplx>;

template <class T>
Matrix<T> operator+(Matrix<T> a, const Matrix<T>& b) { return a += b; }
template <class T>
Matrix<T> operator-(Matrix<T> a, const Matrix<T>& b) { return a -= b; }
template <class T>
Matrix<T> operator*(Matrix<T> a, T s) { return a *= s; }
template <class T>
Matrix<T> operator*(T s, Matrix<T> a) { return a *= s; }
template <class T>
Matrix<T> operator-(Matrix<T> a) { return a *= T{-1}; }

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product dimension mismatch");
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T{}) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

template <class T>
std::vector<T> operator*(const Matrix<T>& a, std::span<const T> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector dimension mismatch");
  std::vector<T> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T s{};
    auto ai = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}
template <class T>
std::vector<T> operator*(const Matrix<T>& a, const std::vector<T>& x) {
  return a * std::span<const T>(x);
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  return t;
}

inline ComplexMatrix to_complex(const DenseMatrix& a) {
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) c.data()[k] = a.data()[k];
  return c;
}

template <class T>
double frobenius_norm(const Matrix<T>& a) {
  double s = 0.0;
  for (const auto& v : a.data()) s += std::norm(v);
  return std::sqrt(s);
}

template <class T>
double max_abs(const Matrix<T>& a) {
  double m = 0.0;
  for (const auto& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

template <class T>
double norm2(std::span<const T> x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}
template <class T>
double norm2(const std::vector<T>& x) { return norm2(std::span<const T>(x)); }

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// <x, y> = sum x_i conj(y_i)
inline cplx inner(std::span<const cplx> x, std::span<const cplx> y) {
  cplx s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
  return s;
}

inline bool is_symmetric(const DenseMatrix& m, double rel_tol = 1e-12) {
  if (!m.is_square()) return false;
  const double scale = max_abs(m);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) return false;
  return true;
}

inline DenseMatrix symmetrize(const DenseMatrix& m) {
  DenseMatrix s = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) s(i, j) = s(j, i) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

// [[Re, -Im], [Im, Re]]: singular values and Hermitian eigenvalues of the
// complex matrix appear twice in its real embedding.
inline DenseMatrix realify(const ComplexMatrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  DenseMatrix r(2 * m, 2 * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      r(i, j) = a(i, j).real();
      r(i, n + j) = -a(i, j).imag();
      r(m + i, j) = a(i, j).imag();
      r(m + i, n + j) = a(i, j).real();
    }
  return r;
}

// ---------------------------------------------------------------------------
// Cholesky

inline DenseMatrix cholesky(const DenseMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("cholesky: matrix must be square");
  if (!is_symmetric(m)) throw std::invalid_argument("cholesky: matrix must be symmetric");
  const std::size_t n = m.rows();
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw NotPositiveDefinite(j);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem: Householder tridiagonalization followed by the
// implicit-shift QL iteration.

struct SymmetricEigen {
  Vector values;        // ascending
  DenseMatrix vectors;  // orthonormal columns
};

namespace detail {

// Householder reduction to tridiagonal form. On exit d holds the diagonal,
// e the subdiagonal in e[1..n-1], and v the accumulated transformation.
inline void tridiagonalize(DenseMatrix& v, Vector& d, Vector& e) {
  const std::size_t n = v.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e). Vectors are rotated only when
// want_vectors is set.
inline void tridiagonal_ql(DenseMatrix& v, Vector& d, Vector& e, bool want_vectors) {
  const std::size_t n = d.size();
  const std::size_t max_iter = 30 * std::max<std::size_t>(n, 1);
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  std::size_t total_iter = 0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= kEps * tst1) break;
      ++m;
    }
    if (m > l) {
      do {
        if (++total_iter > max_iter) throw NoConvergence("symmetric QL iteration", total_iter, l, m);
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (want_vectors) {
            for (std::size_t k = 0; k < n; ++k) {
              h = v(k, ii + 1);
              v(k, ii + 1) = s * v(k, ii) + c * h;
              v(k, ii) = c * v(k, ii) - s * h;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > kEps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace detail

inline SymmetricEigen sym_eig(const DenseMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("sym_eig: matrix must be square");
  if (!is_symmetric(m)) throw std::invalid_argument("sym_eig: matrix must be symmetric");
  const std::size_t n = m.rows();
  SymmetricEigen out;
  if (n == 0) return out;
  DenseMatrix v = symmetrize(m);
  Vector d, e;
  detail::tridiagonalize(v, d, e);
  detail::tridiagonal_ql(v, d, e, true);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

// Eigenvalues only (skips the vector rotations in the QL sweep).
inline Vector sym_eigvals(const DenseMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("sym_eigvals: matrix must be square");
  const std::size_t n = m.rows();
  if (n == 0) return {};
  DenseMatrix v = symmetrize(m);
  Vector d, e;
  detail::tridiagonalize(v, d, e);
  detail::tridiagonal_ql(v, d, e, false);
  std::sort(d.begin(), d.end());
  return d;
}

// f(M) = V f(Lambda) V^T for symmetric M.
template <class F>
DenseMatrix sym_function(const DenseMatrix& m, F&& f) {
  const auto eig = sym_eig(m);
  const std::size_t n = m.rows();
  DenseMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = eig.vectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * eig.vectors(j, k);
    }
  }
  return symmetrize(out);
}

// Eigenvalues of a Hermitian matrix, ascending.
inline Vector hermitian_eigvals(const ComplexMatrix& h) {
  const auto doubled = sym_eigvals(symmetrize(realify(h)));
  Vector vals;
  vals.reserve(doubled.size() / 2);
  for (std::size_t k = 0; k < doubled.size(); k += 2) vals.push_back(0.5 * (doubled[k] + doubled[k + 1]));
  return vals;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting

template <class T>
class LU {
 public:
  explicit LU(Matrix<T> m) : lu_(std::move(m)), perm_(lu_.rows()) {
    if (!lu_.is_square()) throw std::invalid_argument("LU: matrix must be square");
    const std::size_t n = lu_.rows();
    std::iota(perm_.begin(), perm_.end(), 0);
    const double scale = frobenius_norm(lu_);
    const double tiny = static_cast<double>(std::max<std::size_t>(n, 1)) * kEps * scale;
    std::size_t rank = 0;
    bool singular = (scale == 0.0 && n > 0);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > best) best = std::abs(lu_(i, k)), p = i;
      if (best <= tiny) {
        singular = true;
        continue;
      }
      ++rank;
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
      }
      const T pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const T l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        if (l == T{}) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
    if (singular) throw Singular(rank);
  }

  std::vector<T> solve(std::span<const T> b) const {
    const std::size_t n = lu_.rows();
    if (b.size() != n) throw std::invalid_argument("LU::solve dimension mismatch");
    std::vector<T> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) x[i] -= lu_(i, k) * x[k];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) x[i] -= lu_(i, k) * x[k];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  Matrix<T> inverse() const {
    const std::size_t n = lu_.rows();
    Matrix<T> inv(n, n);
    std::vector<T> e(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::fill(e.begin(), e.end(), T{});
      e[j] = T{1};
      inv.set_col(j, solve(e));
    }
    return inv;
  }

 private:
  Matrix<T> lu_;
  std::vector<std::size_t> perm_;
};

inline Vector solve(const DenseMatrix& m, std::span<const double> b) { return LU<double>(m).solve(b); }
inline ComplexVector solve(const ComplexMatrix& m, std::span<const cplx> b) { return LU<cplx>(m).solve(b); }

template <class T>
Matrix<T> inverse(const Matrix<T>& m) { return LU<T>(m).inverse(); }

// ---------------------------------------------------------------------------
// Norms and ranks

inline double operator_norm_2(const DenseMatrix& m) {
  if (m.empty()) return 0.0;
  const auto vals = sym_eigvals(symmetrize(transpose(m) * m));
  return std::sqrt(std::max(0.0, vals.back()));
}

inline double operator_norm_2(const ComplexMatrix& m) { return operator_norm_2(realify(m)); }

// ||M||_2 ||M^{-1}||_2, infinite when M is numerically singular.
template <class T>
double condition_number(const Matrix<T>& m) {
  try {
    return operator_norm_2(m) * operator_norm_2(inverse(m));
  } catch (const Singular&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Numerical nullity of a real matrix: Householder QR with column pivoting,
// stopping once every remaining column has norm <= tau.
inline std::size_t numerical_nullity(DenseMatrix a, double tau) {
  const std::size_t m = a.rows(), n = a.cols();
  const std::size_t steps = std::min(m, n);
  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t p = k;
    double best = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += a(i, j) * a(i, j);
      if (s > best) best = s, p = j;
    }
    if (std::sqrt(best) <= tau) return n - k;
    if (p != k)
      for (std::size_t i = 0; i < m; ++i) std::swap(a(i, k), a(i, p));
    double alpha = std::sqrt(best);
    if (a(k, k) > 0) alpha = -alpha;
    Vector v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = a(i, k);
    v[0] -= alpha;
    const double vn = dot(v, v);
    if (vn == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i - k] * a(i, j);
      s = 2.0 * s / vn;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= s * v[i - k];
    }
  }
  return n - steps;
}

inline std::size_t numerical_nullity(const ComplexMatrix& a, double tau) {
  // each complex null vector contributes two real ones to the embedding
  return numerical_nullity(realify(a), tau) / 2;
}

// ---------------------------------------------------------------------------
// Nonsymmetric eigenproblem

struct EigenDecomposition {
  ComplexVector eigenvalues;
  ComplexMatrix eigenvectors;  // unit columns
  Vector residual_norms;       // ||M v - lambda v|| / ||M||_F
};

namespace detail {

// Diagonal similarity scaling with powers of two: returns M_bal = D^{-1} M D
// and the diagonal of D.
inline Vector balance(DenseMatrix& a) {
  const std::size_t n = a.rows();
  Vector scale(n, 1.0);
  constexpr double radix = 2.0, sqrdx = radix * radix;
  bool done = false;
  std::size_t sweeps = 0;
  while (!done && sweeps++ < 1000) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        scale[i] *= f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
  return scale;
}

// Householder reduction to upper Hessenberg form, H = Q^T A Q.
inline DenseMatrix hessenberg(DenseMatrix& h) {
  const std::size_t n = h.rows();
  DenseMatrix q = DenseMatrix::identity(n);
  if (n < 3) return q;
  const std::size_t low = 0, high = n - 1;
  Vector ort(n, 0.0);
  for (std::size_t m = low + 1; m <= high - 1; ++m) {
    double scale = 0.0;
    for (std::size_t i = m; i <= high; ++i) scale += std::abs(h(i, m - 1));
    if (scale == 0.0) continue;
    double hsum = 0.0;
    for (std::size_t i = high + 1; i-- > m;) {
      ort[i] = h(i, m - 1) / scale;
      hsum += ort[i] * ort[i];
    }
    double g = std::sqrt(hsum);
    if (ort[m] > 0) g = -g;
    hsum -= ort[m] * g;
    ort[m] -= g;
    for (std::size_t j = m; j < n; ++j) {
      double f = 0.0;
      for (std::size_t i = high + 1; i-- > m;) f += ort[i] * h(i, j);
      f /= hsum;
      for (std::size_t i = m; i <= high; ++i) h(i, j) -= f * ort[i];
    }
    for (std::size_t i = 0; i <= high; ++i) {
      double f = 0.0;
      for (std::size_t j = high + 1; j-- > m;) f += ort[j] * h(i, j);
      f /= hsum;
      for (std::size_t j = m; j <= high; ++j) h(i, j) -= f * ort[j];
    }
    ort[m] *= scale;
    h(m, m - 1) = scale * g;
  }
  for (std::size_t m = high - 1; m >= low + 1; --m) {
    if (h(m, m - 1) != 0.0) {
      for (std::size_t i = m + 1; i <= high; ++i) ort[i] = h(i, m - 1);
      for (std::size_t j = m; j <= high; ++j) {
        double g = 0.0;
        for (std::size_t i = m; i <= high; ++i) g += ort[i] * q(i, j);
        g = (g / ort[m]) / h(m, m - 1);
        for (std::size_t i = m; i <= high; ++i) q(i, j) += g * ort[i];
      }
    }
    if (m == low + 1) break;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j + 1 < i; ++j) h(i, j) = 0.0;
  return q;
}

// Francis implicit double-shift QR on an upper Hessenberg matrix; returns
// the eigenvalues. Runs in real arithmetic; complex pairs are emitted as
// exact conjugates.
inline ComplexVector francis_qr(DenseMatrix h) {
  const std::size_t nn = h.rows();
  ComplexVector out(nn);
  if (nn == 0) return out;
  // Defective eigenvalues (critical damping) converge only linearly, so the
  // budget is generous and the exceptional shifts recur.
  const std::size_t max_iter = 100 * nn;
  Vector wr(nn, 0.0), wi(nn, 0.0);

  double norm = 0.0;
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = (i > 0 ? i - 1 : 0); j < nn; ++j) norm += std::abs(h(i, j));

  long n = static_cast<long>(nn) - 1;
  const long low = 0;
  double exshift = 0.0, p = 0, q = 0, r = 0, s = 0, z = 0, w, x, y;
  std::size_t iter = 0, total = 0;

  auto H = [&](long i, long j) -> double& { return h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };

  while (n >= low) {
    long l = n;
    while (l > low) {
      s = std::abs(H(l - 1, l - 1)) + std::abs(H(l, l));
      if (s == 0.0) s = norm;
      if (std::abs(H(l, l - 1)) < kEps * s) break;
      --l;
    }

    if (l == n) {
      wr[n] = H(n, n) + exshift;
      wi[n] = 0.0;
      --n;
      iter = 0;
    } else if (l == n - 1) {
      w = H(n, n - 1) * H(n - 1, n);
      p = (H(n - 1, n - 1) - H(n, n)) / 2.0;
      q = p * p + w;
      z = std::sqrt(std::abs(q));
      x = H(n, n) + exshift;
      if (q >= 0) {
        // larger root from the half-trace, smaller one from the determinant
        const double a = H(n - 1, n - 1) + exshift, d = H(n, n) + exshift;
        const double mid = 0.5 * (a + d);
        const double big = mid + std::copysign(z, mid);
        wr[n - 1] = big;
        wr[n] = (big != 0.0) ? (a * d - w) / big : mid - std::copysign(z, mid);
        wi[n - 1] = 0.0;
        wi[n] = 0.0;
      } else {
        wr[n - 1] = x + p;
        wr[n] = x + p;
        wi[n - 1] = z;
        wi[n] = -z;
      }
      n -= 2;
      iter = 0;
    } else {
      x = H(n, n);
      y = 0.0;
      w = 0.0;
      if (l < n) {
        y = H(n - 1, n - 1);
        w = H(n, n - 1) * H(n - 1, n);
      }
      if (iter % 20 == 10) {  // exceptional shift
        exshift += x;
        for (long i = low; i <= n; ++i) H(i, i) -= x;
        s = std::abs(H(n, n - 1)) + std::abs(H(n - 1, n - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      if (iter % 20 == 0 && iter > 0) {
        s = (y - x) / 2.0;
        s = s * s + w;
        if (s > 0) {
          s = std::sqrt(s);
          if (y < x) s = -s;
          s = x - w / ((y - x) / 2.0 + s);
          for (long i = low; i <= n; ++i) H(i, i) -= s;
          exshift += s;
          x = y = w = 0.964;
        }
      }
      ++iter;
      if (++total > max_iter)
        throw NoConvergence("Francis QR iteration", total, static_cast<std::size_t>(l), static_cast<std::size_t>(n));

      long m = n - 2;
      while (m >= l) {
        z = H(m, m);
        r = x - z;
        s = y - z;
        p = (r * s - w) / H(m + 1, m) + H(m, m + 1);
        q = H(m + 1, m + 1) - z - r - s;
        r = H(m + 2, m + 1);
        s = std::abs(p) + std::abs(q) + std::abs(r);
        p /= s;
        q /= s;
        r /= s;
        if (m == l) break;
        if (std::abs(H(m, m - 1)) * (std::abs(q) + std::abs(r)) <
            kEps * (std::abs(p) * (std::abs(H(m - 1, m - 1)) + std::abs(z) + std::abs(H(m + 1, m + 1)))))
          break;
        --m;
      }
      for (long i = m + 2; i <= n; ++i) {
        H(i, i - 2) = 0.0;
        if (i > m + 2) H(i, i - 3) = 0.0;
      }

      for (long k = m; k <= n - 1; ++k) {
        const bool notlast = (k != n - 1);
        if (k != m) {
          p = H(k, k - 1);
          q = H(k + 1, k - 1);
          r = notlast ? H(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        s = std::sqrt(p * p + q * q + r * r);
        if (p < 0) s = -s;
        if (s != 0) {
          if (k != m)
            H(k, k - 1) = -s * x;
          else if (l != m)
            H(k, k - 1) = -H(k, k - 1);
          p += s;
          x = p / s;
          y = q / s;
          z = r / s;
          q /= p;
          r /= p;
          for (long j = k; j <= n; ++j) {
            p = H(k, j) + q * H(k + 1, j);
            if (notlast) {
              p += r * H(k + 2, j);
              H(k + 2, j) -= p * z;
            }
            H(k, j) -= p * x;
            H(k + 1, j) -= p * y;
          }
          for (long i = l; i <= std::min(n, k + 3); ++i) {
            p = x * H(i, k) + y * H(i, k + 1);
            if (notlast) {
              p += z * H(i, k + 2);
              H(i, k + 2) -= p * r;
            }
            H(i, k) -= p;
            H(i, k + 1) -= p * q;
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < nn; ++i) out[i] = cplx(wr[i], wi[i]);
  return out;
}

// LU of the complex shifted Hessenberg matrix H - sigma I; only adjacent
// rows are ever exchanged, so factor and solve are O(n^2).
class ShiftedHessenbergLU {
 public:
  ShiftedHessenbergLU(const DenseMatrix& h, cplx sigma) : n_(h.rows()), u_(n_, n_), mult_(n_, 0.0), swapped_(n_, false) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = (i > 0 ? i - 1 : 0); j < n_; ++j) u_(i, j) = h(i, j);
    for (std::size_t i = 0; i < n_; ++i) u_(i, i) -= sigma;
    const double tiny = std::max(kEps * frobenius_norm(h), std::numeric_limits<double>::min());
    for (std::size_t k = 0; k + 1 < n_; ++k) {
      if (std::abs(u_(k + 1, k)) > std::abs(u_(k, k))) {
        for (std::size_t j = k; j < n_; ++j) std::swap(u_(k, j), u_(k + 1, j));
        swapped_[k] = true;
      }
      if (u_(k, k) == 0.0) u_(k, k) = tiny;
      const cplx l = u_(k + 1, k) / u_(k, k);
      mult_[k] = l;
      u_(k + 1, k) = 0.0;
      if (l != 0.0)
        for (std::size_t j = k + 1; j < n_; ++j) u_(k + 1, j) -= l * u_(k, j);
    }
    if (n_ > 0 && u_(n_ - 1, n_ - 1) == 0.0) u_(n_ - 1, n_ - 1) = tiny;
  }

  ComplexVector solve(ComplexVector b) const {
    for (std::size_t k = 0; k + 1 < n_; ++k) {
      if (swapped_[k]) std::swap(b[k], b[k + 1]);
      b[k + 1] -= mult_[k] * b[k];
    }
    for (std::size_t i = n_; i-- > 0;) {
      cplx s = b[i];
      for (std::size_t j = i + 1; j < n_; ++j) s -= u_(i, j) * b[j];
      b[i] = s / u_(i, i);
    }
    return b;
  }

 private:
  std::size_t n_;
  ComplexMatrix u_;
  ComplexVector mult_;
  std::vector<bool> swapped_;
};

inline void normalize(ComplexVector& v) {
  const double nv = norm2(v);
  if (nv > 0)
    for (auto& x : v) x /= nv;
}

// Project out previously accepted cluster vectors (two Gram-Schmidt passes).
inline void orthogonalize(ComplexVector& v, const std::vector<const ComplexVector*>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto* b : basis) {
      const cplx c = inner(v, *b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * (*b)[i];
    }
}

// Unit norm, largest-magnitude entry rotated to real positive.
inline void canonicalize(ComplexVector& v) {
  normalize(v);
  std::size_t imax = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best * (1.0 + 1e-12)) best = std::abs(v[i]), imax = i;
  if (best <= 0) return;
  const cplx phase = std::conj(v[imax]) / std::abs(v[imax]);
  for (auto& x : v) x *= phase;
  v[imax] = cplx(v[imax].real(), 0.0);
}

inline double residual(const DenseMatrix& a, double a_norm, const ComplexVector& v, cplx lambda) {
  const std::size_t n = a.rows();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cplx r = -lambda * v[i];
    for (std::size_t j = 0; j < n; ++j) r += a(i, j) * v[j];
    s += std::norm(r);
  }
  return a_norm > 0 ? std::sqrt(s) / a_norm : std::sqrt(s);
}

}  // namespace detail

/// Eigenvalues and eigenvectors of a real square matrix.
///
/// Balancing, Householder Hessenberg reduction and Francis double-shift QR
/// give the eigenvalues; eigenvectors come from shifted inverse iteration on
/// the Hessenberg form. Nearly real eigenvalues (|Im| <= snap_real_tol
/// (1+|lambda|)) are snapped onto the real axis before vectors are computed.
/// Within a cluster of coincident eigenvalues each new vector is iterated
/// orthogonally to the earlier ones; if that fails to converge the cluster is
/// defective and the plain iterate (a repeated eigenvector) is kept.
/// Output is sorted by (Re, Im).
inline EigenDecomposition nonsym_eig(const DenseMatrix& m, const ToleranceProfile& tol = {}) {
  if (!m.is_square()) throw std::invalid_argument("nonsym_eig: matrix must be square");
  const std::size_t n = m.rows();
  EigenDecomposition out;
  if (n == 0) return out;

  DenseMatrix h = m;
  const Vector scale = detail::balance(h);
  const DenseMatrix q = detail::hessenberg(h);
  ComplexVector lambda = detail::francis_qr(h);

  for (auto& l : lambda)
    if (std::abs(l.imag()) <= tol.snap_real_tol * (1.0 + std::abs(l))) l = cplx(l.real(), 0.0);
  std::sort(lambda.begin(), lambda.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });

  const double m_norm = frobenius_norm(m);
  std::vector<ComplexVector> hess_vecs(n);
  std::vector<bool> done(n, false);
  out.eigenvalues = lambda;
  out.eigenvectors = ComplexMatrix(n, n);
  out.residual_norms.assign(n, 0.0);

  // H-coordinates -> original coordinates: v = D Q y
  auto to_original = [&](const ComplexVector& y) {
    ComplexVector v(n);
    for (std::size_t i = 0; i < n; ++i) {
      cplx s{};
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * y[k];
      v[i] = scale[i] * s;
    }
    detail::canonicalize(v);
    return v;
  };

  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (std::size_t i = 0; i < n; ++i) {
    const cplx li = lambda[i];
    if (li.imag() < 0) continue;
    std::vector<const ComplexVector*> cluster;
    for (std::size_t j = 0; j < n; ++j)
      if (done[j] && std::abs(lambda[j] - li) <= tol.cluster_tol * (1.0 + std::abs(li))) cluster.push_back(&hess_vecs[j]);

    const detail::ShiftedHessenbergLU lu(h, li);
    ComplexVector start(n);
    for (auto& x : start) x = unif(rng);

    auto iterate = [&](bool orthogonal, double& res, ComplexVector& orig) {
      ComplexVector y = start;
      if (orthogonal) detail::orthogonalize(y, cluster);
      detail::normalize(y);
      for (int it = 0; it < 5; ++it) {
        y = lu.solve(std::move(y));
        if (orthogonal) detail::orthogonalize(y, cluster);
        detail::normalize(y);
        orig = to_original(y);
        res = detail::residual(m, m_norm, orig, li);
        if (res <= 0.01 * tol.residual_tol) break;
      }
      return y;
    };

    double res = 0.0;
    ComplexVector orig;
    ComplexVector y = iterate(!cluster.empty(), res, orig);
    if (!cluster.empty() && res > tol.residual_tol) y = iterate(false, res, orig);

    hess_vecs[i] = std::move(y);
    done[i] = true;
    out.eigenvectors.set_col(i, orig);
    out.residual_norms[i] = res;
  }

  // conjugate partners of the complex eigenvalues with positive imaginary part
  std::vector<bool> paired(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (lambda[i].imag() >= 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (paired[j] || lambda[j] != std::conj(lambda[i])) continue;
      paired[j] = true;
      ComplexVector v = out.eigenvectors.col(j);
      for (auto& x : v) x = std::conj(x);
      out.eigenvectors.set_col(i, v);
      out.residual_norms[i] = out.residual_norms[j];
      break;
    }
  }
  return out;
}

}  // namespace specdamp::linalg
