#include "sparsecert/core.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace sparsecert {
namespace {

TEST(L1SparsityLevel, Examples) {
  EXPECT_DOUBLE_EQ(l1_sparsity_level((Vector(4) << 1, 0, 0, 0).finished()), 1.0);
  EXPECT_DOUBLE_EQ(l1_sparsity_level((Vector(4) << 1, 1, 1, 1).finished()), 4.0);
  EXPECT_DOUBLE_EQ(l1_sparsity_level((Vector(2) << 3, 4).finished()), 1.96);
}

TEST(L1SparsityLevel, ZeroVectorIsDomainError) {
  EXPECT_THROW(l1_sparsity_level(Vector::Zero(3)), DomainError);
}

TEST(L1SparsityLevel, BoundsAndInvariances) {
  Rng rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(12));
    Vector x = testing::gaussian_vector(n, rng);
    for (Index i = 0; i < n; ++i) {
      if (rng.uniform() < 0.4) x[i] = 0.0;
    }
    if (x.isZero()) x[0] = 1.0;
    const double s = l1_sparsity_level(x);
    const Index k = l0_sparsity(x);
    EXPECT_GE(s, 1.0 - 1e-12);
    EXPECT_LE(s, static_cast<double>(k) + 1e-12);
    EXPECT_LE(k, n);

    const double c = rng.normal() * 10.0 + 0.1;
    EXPECT_NEAR(l1_sparsity_level(c * x), s, 1e-12 * s);

    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (Index i = n - 1; i > 0; --i) {
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[rng.uniform_int(static_cast<std::uint64_t>(i + 1))]);
    }
    Vector px(n);
    for (Index i = 0; i < n; ++i) px[i] = x[perm[static_cast<std::size_t>(i)]];
    EXPECT_NEAR(l1_sparsity_level(px), s, 1e-12 * s);
  }
}

TEST(L1SparsityLevel, EqualityOnlyForEqualMagnitudes) {
  EXPECT_DOUBLE_EQ(l1_sparsity_level((Vector(5) << 2, 0, -2, 2, 0).finished()), 3.0);
  EXPECT_LT(l1_sparsity_level((Vector(5) << 2, 0, -2, 1, 0).finished()), 3.0);
}

TEST(L0Sparsity, Examples) {
  EXPECT_EQ(l0_sparsity(Vector::Zero(3)), 0);
  EXPECT_EQ(l0_sparsity((Vector(3) << 1, 0, -2).finished()), 2);
  EXPECT_EQ(l0_sparsity((Vector(3) << 1e-14, 0, -2).finished()), 2);
  EXPECT_EQ(l0_sparsity((Vector(3) << 1e-14, 0, -2).finished(), kSolverZeroTol), 1);
}

TEST(SparseSignal, SupportMatchesNonzeros) {
  const auto sig = SparseSignal::from_values((Vector(5) << 0, 3, 0, -1, 0).finished());
  EXPECT_EQ(sig.support, (std::vector<Index>{1, 3}));
  EXPECT_EQ(sig.sparsity(), 2);
}

TEST(SensingMatrix, Validation) {
  EXPECT_THROW(SensingMatrix(Matrix(0, 3)), DomainError);
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SensingMatrix{bad}, DomainError);
  EXPECT_THROW(SensingMatrix(Matrix::Ones(2, 2), true), DomainError);
  EXPECT_NO_THROW(SensingMatrix(Matrix::Identity(3, 3), true));
}

TEST(NormalizeColumns, Examples) {
  const SensingMatrix id(Matrix::Identity(3, 3));
  EXPECT_TRUE(normalize_columns(id).data().isApprox(Matrix::Identity(3, 3)));

  const SensingMatrix col((Matrix(2, 1) << 3.0, 4.0).finished());
  const SensingMatrix out = normalize_columns(col);
  EXPECT_NEAR(out.data()(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(out.data()(1, 0), 0.8, 1e-15);
  EXPECT_TRUE(out.columns_normalized());
}

TEST(NormalizeColumns, IdempotentAndZeroColumnError) {
  Rng rng(3, 0);
  const SensingMatrix a(testing::gaussian_matrix(4, 7, rng));
  const SensingMatrix once = normalize_columns(a);
  const SensingMatrix twice = normalize_columns(SensingMatrix(once.data()));
  EXPECT_LE((once.data() - twice.data()).cwiseAbs().maxCoeff(), 1e-15);

  Matrix z = Matrix::Ones(2, 3);
  z.col(1).setZero();
  try {
    normalize_columns(SensingMatrix(z));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos);
  }
}

TEST(KernelBasis, RankAndOrthogonality) {
  Rng rng(8, 0);
  Matrix a = testing::gaussian_matrix(3, 6, rng);
  a.row(2) = a.row(0) + 2.0 * a.row(1);  // rank 2
  const KernelBasis kb = kernel_basis(a);
  EXPECT_EQ(kb.rank, 2);
  EXPECT_EQ(kb.kernel.cols(), 4);
  EXPECT_LE((a * kb.kernel).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE((kb.kernel.transpose() * kb.kernel).isIdentity(1e-12));
  EXPECT_TRUE((kb.row_space * kb.row_space.transpose()).isIdentity(1e-12));

  EXPECT_EQ(kernel_basis(Matrix::Identity(4, 4)).kernel.cols(), 0);
  EXPECT_EQ(kernel_basis(Matrix::Zero(2, 3)).rank, 0);
}

}  // namespace
}  // namespace sparsecert
