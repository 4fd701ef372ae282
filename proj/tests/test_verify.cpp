#include "sparsecert/verify.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace sparsecert {
namespace {

Matrix random_matrix(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed, 0);
  return testing::gaussian_matrix(m, n, rng);
}

TEST(KLowerFromTau, StrictRounding) {
  EXPECT_EQ(k_lower_from_tau(1.0, 5), 0);
  EXPECT_EQ(k_lower_from_tau(1.5, 5), 1);
  EXPECT_EQ(k_lower_from_tau(2.0, 5), 1);
  EXPECT_EQ(k_lower_from_tau(2.0 + 1e-12, 5), 1);
  EXPECT_EQ(k_lower_from_tau(2.0 + 1e-6, 5), 2);
  EXPECT_EQ(k_lower_from_tau(0.3, 5), 0);
  EXPECT_EQ(k_lower_from_tau(40.0, 5), 5);
  EXPECT_EQ(k_lower_from_tau(std::numeric_limits<double>::infinity(), 7), 7);
}

TEST(VerifyLinf, DuplicateColumns) {
  const SensingMatrix a(Matrix::Ones(1, 2));
  const VerificationResult r = verify_linf(a);
  EXPECT_EQ(r.k_lower, 0);
  EXPECT_NEAR(r.tau, 1.0, 1e-7);
  EXPECT_EQ(r.kernel_dim, 1);
  ASSERT_EQ(r.per_index_values.size(), 2);
  EXPECT_NEAR(r.per_index_values[0], 1.0, 1e-7);
  EXPECT_NEAR(r.per_index_values[1], 1.0, 1e-7);
}

TEST(VerifyLinf, TrivialKernel) {
  const SensingMatrix a(random_matrix(5, 5, 3));
  const VerificationResult r = verify_linf(a);
  EXPECT_EQ(r.k_lower, 5);
  EXPECT_EQ(r.kernel_dim, 0);
  EXPECT_TRUE(std::isinf(r.tau));
}

TEST(VerifyLinf, TauMatchesVertexOracle) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Index n = 6 + static_cast<Index>(seed % 5);
    const Index m = n - 1 - static_cast<Index>(seed % 3);
    const Matrix a = random_matrix(m, n, 100 + seed);
    const VerificationResult r = verify_linf(SensingMatrix(a));
    EXPECT_NEAR(r.tau, testing::linf_tau_by_vertices(a), 1e-6) << "seed " << seed;
  }
}

TEST(VerifyLinf, TauBelowSampledKernelRatios) {
  // Dense sampling of a two-dimensional kernel approaches tau from above.
  const Matrix a = random_matrix(5, 7, 41);
  const VerificationResult r = verify_linf(SensingMatrix(a));
  const KernelBasis kb = kernel_basis(a);
  ASSERT_EQ(kb.kernel.cols(), 2);
  double sampled = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20000; ++i) {
    const double th = M_PI * i / 20000.0;
    const Vector z = kb.kernel * Vector((Vector(2) << std::cos(th), std::sin(th)).finished());
    sampled = std::min(sampled, 0.5 * z.lpNorm<1>() / z.lpNorm<Eigen::Infinity>());
  }
  EXPECT_LE(r.tau, sampled + 1e-9);
  EXPECT_NEAR(r.tau, sampled, 1e-4);
}

TEST(VerifyLinf, SerialAndParallelAgree) {
  const SensingMatrix a(random_matrix(12, 30, 9));
  VerifyOptions serial;
  serial.exec = Exec::Serial;
  const VerificationResult rs = verify_linf(a, serial);
  const VerificationResult rp = verify_linf(a);
  EXPECT_EQ(rs.k_lower, rp.k_lower);
  EXPECT_EQ(rs.tau, rp.tau);
  EXPECT_EQ(rs.per_index_values, rp.per_index_values);
}

TEST(VerifyLinf, InvariantUnderColumnPermutationAndRowScaling) {
  const Matrix a = random_matrix(7, 12, 77);
  const VerificationResult base = verify_linf(SensingMatrix(a));

  Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
  perm.setIdentity();
  Rng rng(5, 0);
  for (Index i = 11; i > 0; --i) std::swap(perm.indices()[i], perm.indices()[static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)))]);
  const VerificationResult permuted = verify_linf(SensingMatrix(a * perm));
  EXPECT_NEAR(permuted.tau, base.tau, 1e-6);
  EXPECT_EQ(permuted.k_lower, base.k_lower);

  Vector scale(7);
  for (Index i = 0; i < 7; ++i) scale[i] = (i % 2 ? -1.0 : 1.0) * std::pow(10.0, static_cast<double>(i % 4) - 1.5);
  const VerificationResult scaled = verify_linf(SensingMatrix(scale.asDiagonal() * a));
  EXPECT_NEAR(scaled.tau, base.tau, 1e-6);
  EXPECT_EQ(scaled.k_lower, base.k_lower);
}

TEST(VerifyLinf, AppendingRowsNeverDecreasesTau) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix full = random_matrix(9, 14, 300 + seed);
    double prev = 0.0;
    for (Index m = 3; m <= 9; ++m) {
      const double tau = verify_linf(SensingMatrix(full.topRows(m))).tau;
      EXPECT_GE(tau, prev - 1e-7) << "seed " << seed << " m " << m;
      prev = tau;
    }
  }
}

TEST(VerifyL2, TrivialKernel) {
  const VerificationResult r = verify_l2(SensingMatrix(random_matrix(4, 4, 8)));
  EXPECT_EQ(r.k_lower, 4);
  EXPECT_EQ(r.kernel_dim, 0);
}

TEST(VerifyL2, DuplicateColumns) {
  // Kernel spanned by (1,-1): the only feasible Z is a multiple of that outer
  // product, with ||Z||_1 = 4c <= 1 and 4 tr Z = 8c = 2.
  const VerificationResult r = verify_l2(SensingMatrix(Matrix::Ones(1, 2)));
  EXPECT_NEAR(r.tau, 0.5, 1e-6);
  EXPECT_LE(r.tau, 0.5);
  EXPECT_EQ(r.k_lower, 0);
}

TEST(VerifyL2, BoundsMinimumSparsityLevelOfKernel) {
  // 1/u* <= min s(z)/4 over the kernel; a one-dimensional kernel makes the
  // right side exact.
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Matrix a = random_matrix(7, 8, 500 + seed);
    const Vector z = kernel_basis(a).kernel.col(0);
    const VerificationResult r = verify_l2(SensingMatrix(a));
    EXPECT_LE(r.tau, l1_sparsity_level(z) / 4.0 + 1e-7);
    // Rank one is optimal here, so the relaxation is tight.
    EXPECT_NEAR(r.tau, l1_sparsity_level(z) / 4.0, 1e-5);
  }
}

TEST(VerifyL2, SizeGuard) {
  VerifyOptions o;
  o.sdp.size_cap = 10;
  EXPECT_THROW(verify_l2(SensingMatrix(random_matrix(3, 11, 1)), o), SizeGuardError);
}

TEST(NspOracleExact, Examples) {
  const SensingMatrix dup(Matrix::Ones(1, 2));
  EXPECT_FALSE(nsp_oracle_exact(dup, 1));
  EXPECT_TRUE(nsp_oracle_exact(dup, 0));
  const SensingMatrix square(random_matrix(6, 6, 2));
  for (Index k = 0; k <= 5; ++k) EXPECT_TRUE(nsp_oracle_exact(square, k));
}

TEST(NspOracleExact, Guards) {
  EXPECT_THROW(nsp_oracle_exact(SensingMatrix(random_matrix(5, 15, 1)), 1), SizeGuardError);
  EXPECT_THROW(nsp_oracle_exact(SensingMatrix(random_matrix(5, 10, 1)), 6), SizeGuardError);
  EXPECT_THROW(nsp_oracle_exact(SensingMatrix(random_matrix(2, 3, 1)), 4), DomainError);
}

TEST(NspOracleExact, MatchesVertexOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 8 + static_cast<Index>(seed % 3);
    const Index m = 3 + static_cast<Index>(seed % 5);
    const Matrix a = random_matrix(m, n, 700 + seed);
    const Index kstar = testing::critical_sparsity_by_vertices(a);
    const VerificationResult r = verify_exact(SensingMatrix(a));
    if (kstar <= 5) {
      EXPECT_EQ(r.k_lower, kstar) << "seed " << seed;
    } else {
      EXPECT_EQ(r.k_lower, 5);
    }
  }
}

TEST(Soundness, RelaxationsNeverExceedCriticalSparsity) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Index m = 4 + static_cast<Index>(seed % 4);
    const Matrix a = random_matrix(m, 12, 900 + seed);
    const Index kstar = testing::critical_sparsity_by_vertices(a);
    const VerificationResult linf = verify_linf(SensingMatrix(a));
    const VerificationResult l2 = verify_l2(SensingMatrix(a));
    EXPECT_LE(linf.k_lower, kstar) << "seed " << seed;
    EXPECT_LE(l2.k_lower, kstar) << "seed " << seed;
  }
}

}  // namespace
}  // namespace sparsecert
