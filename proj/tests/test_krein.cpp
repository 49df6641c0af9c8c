#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "specdamp/krein.hpp"

using namespace specdamp;

namespace {

DenseMatrix diag(std::initializer_list<double> d) {
  std::vector<double> v(d);
  return DenseMatrix::diagonal(std::span<const double>(v));
}

RealPhaseVector rpv(std::vector<double> x, std::vector<double> y) { return {std::move(x), std::move(y)}; }

// K = Q diag(k) Q^T and C = Q diag(c) Q^T; c_i = 2 sqrt(k_i) makes mode i critically damped
SystemModel modal_model(const DenseMatrix& q, const std::vector<double>& k, const std::vector<double>& c) {
  const auto qt = linalg::transpose(q);
  return SystemModel{linalg::symmetrize(q * DenseMatrix::diagonal(std::span<const double>(k)) * qt),
                     linalg::symmetrize(q * DenseMatrix::diagonal(std::span<const double>(c)) * qt)};
}

}  // namespace

TEST(IndefiniteProduct, Examples) {
  const SystemModel m{DenseMatrix::identity(2), DenseMatrix(2, 2)};
  EXPECT_EQ(indefinite_product(m, rpv({1, 0}, {0, 0}), rpv({1, 0}, {0, 0})), 1.0);
  EXPECT_EQ(indefinite_product(m, rpv({0, 0}, {1, 0}), rpv({0, 0}, {1, 0})), -1.0);
  EXPECT_EQ(indefinite_product(m, rpv({1, 0}, {1, 0}), rpv({1, 0}, {1, 0})), 0.0);
}

TEST(IndefiniteProduct, ConjugateLinearInSecondSlot) {
  const SystemModel m{diag({2, 3}), DenseMatrix(2, 2)};
  ComplexPhaseVector u{{cplx(1, 1), 2}, {0, cplx(0, 1)}};
  ComplexPhaseVector v{{cplx(0, 1), 1}, {1, 1}};
  const cplx base = indefinite_product(m, u, v);
  auto v2 = v;
  for (auto& x : v2.position) x *= cplx(0, 2);
  for (auto& x : v2.velocity) x *= cplx(0, 2);
  EXPECT_NEAR(std::abs(indefinite_product(m, u, v2) - cplx(0, -2) * base), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(indefinite_product(m, v, u) - std::conj(base)), 0.0, 1e-14);
}

TEST(Classify, OverdampedScalarSlowPositiveFastNegative) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{3}}};
  const auto r = solve_qep(m);
  const auto c = classify_eigenpairs(m, r);
  // eigenpairs sorted: fast root first
  EXPECT_EQ(c.of_eigenpair(0).sign_type, SignType::negative);
  EXPECT_EQ(c.of_eigenpair(1).sign_type, SignType::positive);
  // [v, v] / ||v||_E^2 = (1 - l^2) / (1 + l^2) for v = (1, l)
  for (std::size_t i = 0; i < 2; ++i) {
    const double l = r.eigenpairs[i].lambda.real();
    EXPECT_NEAR(c.of_eigenpair(i).gram_eigenvalues[0], (1 - l * l) / (1 + l * l), 1e-12);
    EXPECT_EQ(c.of_eigenpair(i).jordan_defect, 0u);
  }
}

TEST(Classify, UndampedIsNeutral) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{0}}};
  const auto c = classify_eigenpairs(m, solve_qep(m));
  ASSERT_EQ(c.clusters.size(), 2u);
  for (const auto& cl : c.clusters) {
    EXPECT_EQ(cl.sign_type, SignType::neutral);
    EXPECT_NEAR(cl.gram_eigenvalues[0], 0.0, 1e-14);
  }
}

TEST(Classify, CriticalDampingIsJordanAndNeutral) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{2}}};
  const auto c = classify_eigenpairs(m, solve_qep(m));
  ASSERT_EQ(c.clusters.size(), 1u);
  const auto& cl = c.clusters[0];
  EXPECT_NEAR(cl.lambda.real(), -1.0, 1e-7);
  EXPECT_EQ(cl.sign_type, SignType::neutral);
  EXPECT_EQ(cl.jordan_defect, 1u);
  EXPECT_EQ(cl.algebraic_multiplicity, 2u);
  EXPECT_EQ(cl.geometric_multiplicity, 1u);
}

TEST(Classify, SemisimpleDoubleUndampedCluster) {
  const SystemModel m{DenseMatrix::identity(2), DenseMatrix(2, 2)};
  const auto c = classify_eigenpairs(m, solve_qep(m));
  ASSERT_EQ(c.clusters.size(), 2u);
  for (const auto& cl : c.clusters) {
    EXPECT_EQ(cl.jordan_defect, 0u);
    EXPECT_EQ(cl.gram_eigenvalues.size(), 2u);
    EXPECT_EQ(cl.sign_type, SignType::neutral);
  }
}

TEST(Classify, SignTypeMatchesGramEigenvalues) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    auto [K, C] = oracle::random_kc(rng, 1 + trial % 4);
    const SystemModel m{K, C};
    const auto c = classify_eigenpairs(m, solve_qep(m));
    for (const auto& cl : c.clusters) {
      const double tau = cl.tau;
      EXPECT_GE(tau, c.tau_neutral);
      bool all_pos = true, all_neg = true, all_neu = true;
      for (double g : cl.gram_eigenvalues) {
        all_pos &= g > tau;
        all_neg &= g < -tau;
        all_neu &= std::abs(g) <= tau;
      }
      const SignType expect = all_pos   ? SignType::positive
                              : all_neg ? SignType::negative
                              : all_neu ? SignType::neutral
                                        : SignType::mixed;
      EXPECT_EQ(cl.sign_type, expect);
    }
  }
}

TEST(KernelGram, BlockScalarNondegenerate) {
  const SystemModel m{DenseMatrix::identity(2), diag({3, 3})};
  const auto r = solve_qep(m);
  const double l1 = (-3 + std::sqrt(5.0)) / 2;
  std::vector<ComplexPhaseVector> kernel;
  for (const auto& p : r.eigenpairs)
    if (std::abs(p.lambda - l1) < 1e-10) kernel.push_back(p.vector);
  ASSERT_EQ(kernel.size(), 2u);
  const auto g = kernel_gram_nondegeneracy(m, l1, kernel);
  EXPECT_TRUE(g.nondegenerate);
  // energy-orthonormal basis: Gram = (1 - l^2) / (1 + l^2) I
  for (double e : g.gram_eigenvalues) EXPECT_NEAR(e, (1 - l1 * l1) / (1 + l1 * l1), 1e-12);
  EXPECT_FALSE(g.witness.has_value());
}

TEST(KernelGram, CriticalDampingDegenerateWithWitness) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{2}}};
  const auto r = solve_qep(m);
  std::vector<ComplexPhaseVector> kernel;
  for (const auto& p : r.eigenpairs) kernel.push_back(p.vector);
  const auto g = kernel_gram_nondegeneracy(m, -1.0, kernel);
  EXPECT_FALSE(g.nondegenerate);
  ASSERT_TRUE(g.witness.has_value());
  const double s = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(g.witness->position[0] - s), 0.0, 1e-7);
  EXPECT_NEAR(std::abs(g.witness->velocity[0] + s), 0.0, 1e-7);
}

TEST(KernelGram, RejectsEmptyCluster) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{2}}};
  EXPECT_THROW(kernel_gram_nondegeneracy(m, -1.0, {}), std::invalid_argument);
}

TEST(KreinSelfAdjoint, OperatorGramIsSymmetric) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    auto [K, C] = oracle::random_kc(rng, 1 + trial % 6);
    const auto g = krein_operator_gram(SystemModel{K, C});
    EXPECT_LE(linalg::frobenius_norm(g - linalg::transpose(g)), 1e-12 * linalg::frobenius_norm(g));
  }
}

TEST(KreinOrthogonality, DistinctClustersAreOrthogonal) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    auto [K, C] = oracle::random_kc(rng, 1 + trial % 5);
    const SystemModel m{K, C};
    const auto r = solve_qep(m);
    const auto c = classify_eigenpairs(m, r);
    const auto v = energy_eigenvectors(m, r);
    for (std::size_t i = 0; i < r.eigenpairs.size(); ++i)
      for (std::size_t j = 0; j < r.eigenpairs.size(); ++j) {
        if (c.cluster_of[i] == c.cluster_of[j]) continue;
        const cplx li = c.of_eigenpair(i).lambda, lj = c.of_eigenpair(j).lambda;
        if (std::abs(li - std::conj(lj)) <= 1e-6 * (1 + std::abs(li))) continue;
        const cplx p = detail::energy_krein(v.col(i), v.col(j));
        // separation enters through the eigenvector accuracy
        const double gap = std::abs(li - std::conj(lj)) / (1 + std::abs(li) + std::abs(lj));
        EXPECT_LE(std::abs(p), std::max(1e-8, 1e-12 / gap)) << trial;
      }
  }
}

TEST(KreinNeutrality, NonrealEigenvectorsAreNeutral) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 200; ++trial) {
    auto [K, C] = oracle::random_kc(rng, 1 + trial % 5);
    const SystemModel m{K, C};
    const auto r = solve_qep(m);
    const auto v = energy_eigenvectors(m, r);
    for (std::size_t i = 0; i < r.eigenpairs.size(); ++i)
      if (r.eigenpairs[i].lambda.imag() != 0.0) {
        EXPECT_LE(std::abs(detail::energy_krein(v.col(i), v.col(i))), 1e-8);
      }
  }
}

TEST(JordanVsGram, DetectorsAgreeOnRealSeparatedClusters) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> kd(0.5, 4.0), off(0.1, 3.0);
  std::bernoulli_distribution coin(0.5);
  int compared = 0, jordan = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 4;
    SystemModel m;
    if (trial % 2 == 0) {
      auto [K, C] = oracle::random_kc(rng, n);
      m = SystemModel{K, C};
    } else {
      // some modes critically damped, others over- or underdamped
      std::vector<double> k(n), c(n);
      for (std::size_t i = 0; i < n; ++i) {
        k[i] = kd(rng);
        c[i] = coin(rng) ? 2 * std::sqrt(k[i]) : 2 * std::sqrt(k[i]) * (coin(rng) ? 1 + off(rng) : 1 / (1 + off(rng)));
      }
      m = modal_model(oracle::random_orthogonal(rng, n), k, c);
    }
    const auto r = solve_qep(m);
    const auto cls = classify_eigenpairs(m, r);
    for (const auto& cl : cls.clusters) {
      if (cl.lambda.imag() != 0.0) continue;
      bool separated = true;
      for (const auto& other : cls.clusters)
        if (&other != &cl && std::abs(other.lambda - cl.lambda) < 1e-3) separated = false;
      if (!separated) continue;
      std::vector<ComplexPhaseVector> kernel;
      for (auto i : cl.members) kernel.push_back(r.eigenpairs[i].vector);
      const auto g = kernel_gram_nondegeneracy(m, cl.lambda.real(), kernel);
      EXPECT_EQ(!g.nondegenerate, cl.jordan_defect > 0) << trial << " lambda " << cl.lambda;
      ++compared;
      jordan += cl.jordan_defect > 0;
    }
  }
  EXPECT_GT(compared, 500);
  EXPECT_GT(jordan, 100);
}

TEST(Decompose, BeamSplitsFastAndSlowBranches) {
  const auto m = beam_assemble(BeamSpec{1.0, {{2.0, 0.0, 1.0}}, 8});
  const auto r = solve_qep(m);
  const auto d = decompose(m, r, classify_eigenpairs(m, r));
  ASSERT_EQ(d.h_prime.size(), 8u);
  ASSERT_EQ(d.h_doubleprime.size(), 8u);
  for (auto i : d.h_prime) {
    const double l = r.eigenpairs[i].lambda.real();
    EXPECT_LT(l, -10.0);
  }
  for (auto i : d.h_doubleprime) EXPECT_NEAR(r.eigenpairs[i].lambda.real(), -0.5, 0.05);
  EXPECT_TRUE(d.verified());
  EXPECT_LE(d.cross_gram_norm, 1e-8);
  EXPECT_LT(d.hprime_definiteness, 0.0);
  EXPECT_GT(d.m_cut, 10.0);
}

TEST(Decompose, ScalarOverdamped) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{3}}};
  const auto r = solve_qep(m);
  const auto d = decompose(m, r, classify_eigenpairs(m, r));
  EXPECT_EQ(d.h_prime, std::vector<std::size_t>{0});
  EXPECT_EQ(d.h_doubleprime, std::vector<std::size_t>{1});
  EXPECT_LE(d.cross_gram_norm, 1e-14);
  EXPECT_NEAR(d.m_cut, (3 + std::sqrt(5.0)) / 2, 1e-12);
}

TEST(Decompose, UndampedHasEmptyHPrime) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{0}}};
  const auto r = solve_qep(m);
  const auto d = decompose(m, r, classify_eigenpairs(m, r));
  EXPECT_TRUE(d.h_prime.empty());
  EXPECT_EQ(d.h_doubleprime.size(), 2u);
  EXPECT_TRUE(std::isinf(d.m_cut));
  EXPECT_TRUE(d.verified());
}

TEST(Decompose, MixedClusterAborts) {
  const SystemModel m{DenseMatrix{{1}}, DenseMatrix{{3}}};
  const auto r = solve_qep(m);
  auto c = classify_eigenpairs(m, r);
  c.clusters[0].sign_type = SignType::mixed;
  EXPECT_THROW(decompose(m, r, c), MixedClusterObstruction);
}
