#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "specdamp/linalg.hpp"

using namespace specdamp;
using namespace specdamp::linalg;

namespace {

std::vector<cplx> sorted_by_re_absim(std::vector<cplx> v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
    return std::abs(a.imag()) < std::abs(b.imag()) || (std::abs(a.imag()) == std::abs(b.imag()) && a.imag() < b.imag());
  });
  return v;
}

}  // namespace

TEST(Cholesky, Scalar) {
  const auto l = cholesky(DenseMatrix{{4.0}});
  EXPECT_DOUBLE_EQ(l(0, 0), 2.0);
}

TEST(Cholesky, TwoByTwo) {
  const DenseMatrix m{{2, 1}, {1, 2}};
  const auto l = cholesky(m);
  EXPECT_NEAR(l(0, 0), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(l(0, 1), 0.0);
  EXPECT_NEAR(l(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(l(1, 1), std::sqrt(1.5), 1e-15);
  const auto rec = l * transpose(l);
  EXPECT_LE(frobenius_norm(rec - m), 1e-12 * frobenius_norm(m));
}

TEST(Cholesky, IndefiniteReportsPivot) {
  try {
    cholesky(DenseMatrix{{1, 2}, {2, 1}});
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot_index, 1u);
  }
}

TEST(Cholesky, AgreesWithEigenvalueSign) {
  std::mt19937_64 rng(7);
  int agree = 0, tested = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto m = oracle::random_symmetric(rng, 4);
    // shift so that roughly half the samples are positive definite
    for (std::size_t i = 0; i < 4; ++i) m(i, i) += 3.0;
    const auto vals = sym_eigvals(m);
    if (std::abs(vals.front()) <= 1e-10) continue;
    ++tested;
    bool chol_ok = true;
    try {
      cholesky(m);
    } catch (const NotPositiveDefinite&) {
      chol_ok = false;
    }
    if (chol_ok == (vals.front() > 0)) ++agree;
  }
  EXPECT_EQ(agree, tested);
}

TEST(SymEig, Examples) {
  auto e = sym_eig(DenseMatrix{{2, 0}, {0, 3}});
  EXPECT_NEAR(e.values[0], 2.0, 1e-15);
  EXPECT_NEAR(e.values[1], 3.0, 1e-15);
  e = sym_eig(DenseMatrix{{2, 1}, {1, 2}});
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], 3.0, 1e-14);
  e = sym_eig(DenseMatrix{{5}});
  EXPECT_EQ(e.values[0], 5.0);
}

TEST(SymEig, RandomReconstruction) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = oracle::random_symmetric(rng, 5);
    const auto e = sym_eig(m);
    const auto& v = e.vectors;
    const auto vtv = transpose(v) * v;
    EXPECT_LE(max_abs(vtv - DenseMatrix::identity(5)), 1e-10);
    DenseMatrix lam(5, 5);
    for (std::size_t k = 0; k < 5; ++k) lam(k, k) = e.values[k];
    const auto rec = v * lam * transpose(v);
    EXPECT_LE(frobenius_norm(m - rec), 1e-9 * frobenius_norm(m));
    EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
  }
}

TEST(SymEig, RejectsNonSymmetric) {
  EXPECT_THROW(sym_eig(DenseMatrix{{1, 2}, {0, 1}}), std::invalid_argument);
}

TEST(NonsymEig, RotationGenerator) {
  const auto e = nonsym_eig(DenseMatrix{{0, 1}, {-1, 0}});
  ASSERT_EQ(e.eigenvalues.size(), 2u);
  EXPECT_NEAR(std::abs(e.eigenvalues[0] - cplx(0, -1)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e.eigenvalues[1] - cplx(0, 1)), 0.0, 1e-14);
  for (double r : e.residual_norms) EXPECT_LE(r, 1e-12);
}

TEST(NonsymEig, DampedOscillator) {
  const auto e = nonsym_eig(DenseMatrix{{0, 1}, {-1, -3}});
  EXPECT_NEAR(e.eigenvalues[0].real(), (-3 - std::sqrt(5.0)) / 2, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1].real(), (-3 + std::sqrt(5.0)) / 2, 1e-14);
  EXPECT_EQ(e.eigenvalues[0].imag(), 0.0);
  EXPECT_NEAR(e.eigenvalues[1].real(), -0.38197, 1e-5);
  EXPECT_NEAR(e.eigenvalues[0].real(), -2.61803, 1e-5);
}

TEST(NonsymEig, OneByOne) {
  const auto e = nonsym_eig(DenseMatrix{{1}});
  EXPECT_EQ(e.eigenvalues[0], cplx(1, 0));
  EXPECT_EQ(e.eigenvectors(0, 0), cplx(1, 0));
}

TEST(NonsymEig, EigenvectorNormalization) {
  std::mt19937_64 rng(3);
  const auto m = oracle::random_matrix(rng, 6, 6);
  const auto e = nonsym_eig(m);
  for (std::size_t k = 0; k < 6; ++k) {
    const auto v = e.eigenvectors.col(k);
    EXPECT_NEAR(norm2(v), 1.0, 1e-12);
    std::size_t imax = 0;
    for (std::size_t i = 0; i < 6; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    EXPECT_GT(v[imax].real(), 0.0);
    EXPECT_NEAR(v[imax].imag(), 0.0, 1e-12);
    EXPECT_LE(e.residual_norms[k], 1e-9);
  }
}

TEST(NonsymEig, MatchesCharacteristicPolynomialRoots) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const auto m = oracle::random_matrix(rng, n, n);
    const auto e = nonsym_eig(m);
    const auto roots = oracle::polynomial_roots(oracle::characteristic_polynomial(m));
    EXPECT_LE(oracle::multiset_distance(e.eigenvalues, roots), 1e-8) << "trial " << trial;
  }
}

TEST(NonsymEig, ConjugateClosure) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto m = oracle::random_matrix(rng, n, n);
    const auto vals = sorted_by_re_absim(nonsym_eig(m).eigenvalues);
    for (std::size_t i = 0; i < n; ++i) {
      if (vals[i].imag() == 0.0) continue;
      ASSERT_LT(i + 1, n);
      EXPECT_LE(std::abs(vals[i] - std::conj(vals[i + 1])), 1e-10);
      ++i;
    }
  }
}

TEST(NonsymEig, SemisimpleRepeatedEigenvalueGetsIndependentVectors) {
  // diag blocks of the same 2x2 generator: each eigenvalue is double and
  // non-defective
  DenseMatrix m(4, 4);
  m(0, 2) = 1;
  m(1, 3) = 1;
  m(2, 0) = -1;
  m(3, 1) = -1;
  m(2, 2) = -3;
  m(3, 3) = -3;
  const auto e = nonsym_eig(m);
  EXPECT_LT(condition_number(e.eigenvectors), 1e3);
  for (double r : e.residual_norms) EXPECT_LE(r, 1e-12);
}

TEST(NonsymEig, DefectiveEigenvalueKeepsSmallResiduals) {
  const auto e = nonsym_eig(DenseMatrix{{0, 1}, {-1, -2}});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(std::abs(e.eigenvalues[k] - cplx(-1, 0)), 0.0, 1e-7);
    EXPECT_LE(e.residual_norms[k], 1e-9);
  }
}

TEST(NonsymEig, TwoCriticallyDampedModesConverge) {
  // [[0, I], [-K, -C]] with a critically damped mode; used to exhaust the iteration budget
  const double k[2][2] = {{2.1557147058884922, 0.31208720676980961}, {0.31208720676980961, 2.4387778147897676}};
  const double c[2][2] = {{2.9292016665275389, 0.20648588418160041}, {0.20648588418160041, 3.1164843716586823}};
  DenseMatrix a(4, 4);
  for (std::size_t i = 0; i < 2; ++i) {
    a(i, i + 2) = 1.0;
    for (std::size_t j = 0; j < 2; ++j) a(i + 2, j) = -k[i][j], a(i + 2, j + 2) = -c[i][j];
  }
  EigenDecomposition e;
  ASSERT_NO_THROW(e = nonsym_eig(a));
  const auto roots = oracle::polynomial_roots(oracle::characteristic_polynomial(a));
  // a double root is only resolved to about sqrt(eps)
  EXPECT_LE(oracle::multiset_distance(e.eigenvalues, roots), 1e-6);
}

TEST(NonsymEig, WideningScalesStayAccurate) {
  // decoupled critically-overdamped modes spanning eight orders of magnitude;
  // the slow roots must keep full relative accuracy
  const std::size_t n = 12;
  DenseMatrix m(2 * n, 2 * n);
  std::vector<cplx> expected;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::pow((k + 0.5) * 3.141592653589793, 4);
    m(k, n + k) = 1;
    m(n + k, k) = -w;
    m(n + k, n + k) = -2 * w;
    const double fast = -w - std::sqrt(w * w - w);
    expected.emplace_back(fast, 0);
    expected.emplace_back(w / fast, 0);
  }
  const auto e = nonsym_eig(m);
  EXPECT_LE(oracle::multiset_relative_distance(e.eigenvalues, expected), 1e-13);
}

TEST(Solve, Examples) {
  const auto x = solve(DenseMatrix::identity(3), std::vector<double>{1, 2, 3});
  EXPECT_EQ(x, (std::vector<double>{1, 2, 3}));
  const auto y = solve(DenseMatrix{{2, 0}, {0, 4}}, std::vector<double>{2, 4});
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
  try {
    solve(DenseMatrix{{1, 1}, {1, 1}}, std::vector<double>{1, 2});
    FAIL();
  } catch (const Singular& s) {
    EXPECT_EQ(s.rank_estimate, 1u);
  }
}

TEST(Solve, ResidualBound) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::random_matrix(rng, 6, 6);
    std::vector<double> b(6);
    for (auto& v : b) v = std::normal_distribution<double>()(rng);
    const auto x = solve(m, b);
    auto r = m * x;
    for (std::size_t i = 0; i < 6; ++i) r[i] -= b[i];
    EXPECT_LE(norm2(r), 1e-10 * (frobenius_norm(m) * norm2(x) + norm2(b)));
  }
}

TEST(OperatorNorm, Examples) {
  EXPECT_NEAR(operator_norm_2(DenseMatrix{{1, 0}, {0, 3}}), 3.0, 1e-12);
  EXPECT_NEAR(operator_norm_2(DenseMatrix{{0, 2}, {0, 0}}), 2.0, 1e-12);
  EXPECT_NEAR(operator_norm_2(DenseMatrix{{1, 1}, {1, 1}}), 2.0, 1e-12);
}

TEST(OperatorNorm, ComplexEmbedding) {
  // diag(1+i, 2i): norm 2
  ComplexMatrix m(2, 2);
  m(0, 0) = cplx(1, 1);
  m(1, 1) = cplx(0, 2);
  EXPECT_NEAR(operator_norm_2(m), 2.0, 1e-12);
}

TEST(Nullity, CountsKernelDimension) {
  EXPECT_EQ(numerical_nullity(DenseMatrix{{1, 1}, {1, 1}}, 1e-12), 1u);
  EXPECT_EQ(numerical_nullity(DenseMatrix{{0, 1}, {0, 0}}, 1e-12), 1u);
  EXPECT_EQ(numerical_nullity(DenseMatrix(3, 3), 1e-12), 3u);
  EXPECT_EQ(numerical_nullity(DenseMatrix::identity(3), 1e-12), 0u);
  ComplexMatrix c(2, 2);
  c(0, 0) = cplx(0, 1);
  c(0, 1) = 1;
  c(1, 0) = -1;
  c(1, 1) = cplx(0, 1);  // rank one: row 2 = i * row 1
  EXPECT_EQ(numerical_nullity(c, 1e-12), 1u);
}

TEST(HermitianEig, MatchesKnownSpectrum) {
  ComplexMatrix h(2, 2);
  h(0, 0) = 2;
  h(1, 1) = 2;
  h(0, 1) = cplx(0, 1);
  h(1, 0) = cplx(0, -1);
  const auto v = hermitian_eigvals(h);
  EXPECT_NEAR(v[0], 1.0, 1e-14);
  EXPECT_NEAR(v[1], 3.0, 1e-14);
}
