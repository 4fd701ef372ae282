#include "sparsecert/cmsv.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sparsecert {
namespace {

Matrix random_matrix(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed, 0);
  return testing::gaussian_matrix(m, n, rng);
}

double sigma_min(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues().minCoeff();
}

TEST(CmsvIp, IdentityGivesOne) {
  const SensingMatrix a(Matrix::Identity(5, 5));
  for (double s : {1.0, 2.5, 5.0}) {
    const CmsvEstimate e = compute_cmsv_ip(a, s);
    EXPECT_NEAR(e.rho_upper, 1.0, 1e-9) << "s=" << s;
  }
}

TEST(CmsvIp, SparsityOneIsMinColumnNorm) {
  const Matrix m = random_matrix(4, 7, 11);
  const SensingMatrix a(m);
  CmsvIpOptions o;
  o.restarts = 200;
  EXPECT_NEAR(compute_cmsv_ip(a, 1.0, o).rho_upper, min_column_norm(m), 1e-12);
  const SensingMatrix an = normalize_columns(a);
  EXPECT_NEAR(compute_cmsv_ip(an, 1.0).rho_upper, 1.0, 1e-12);
}

TEST(CmsvIp, FullSparsityIsSmallestSingularValue) {
  for (std::uint64_t seed : {3, 4, 5}) {
    const Matrix m = random_matrix(8, 6, seed);
    const CmsvEstimate e = compute_cmsv_ip(SensingMatrix(m), 6.0);
    EXPECT_NEAR(e.rho_upper, sigma_min(m), 1e-6) << "seed=" << seed;
  }
}

TEST(CmsvIp, ReportedPointsAreFeasible) {
  const Matrix m = random_matrix(5, 12, 21);
  const double s = 3.0;
  const CmsvEstimate e = compute_cmsv_ip(SensingMatrix(m), s);
  ASSERT_EQ(e.per_restart_values.size(), 50);
  ASSERT_EQ(e.converged_flags.size(), 50u);
  EXPECT_NEAR(e.minimizer.norm(), 1.0, 1e-12);
  EXPECT_LE(e.minimizer.lpNorm<1>(), std::sqrt(s) + 1e-6);
  EXPECT_NEAR((m * e.minimizer).squaredNorm(), e.objective_upper, 1e-12);
  EXPECT_NEAR(e.rho_upper * e.rho_upper, e.objective_upper, 1e-12);
  for (Index i = 0; i < 50; ++i) {
    if (e.converged_flags[static_cast<std::size_t>(i)]) {
      EXPECT_GE(e.per_restart_values[i], e.objective_upper);
    }
  }
}

TEST(CmsvIp, MatchesSphereGridOnThreeColumns) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Matrix m = random_matrix(2, 3, 100 + seed);
    for (double s : {1.3, 1.8, 2.5}) {
      const double grid = testing::cmsv_by_sphere_grid(m, s, 1500);
      const CmsvEstimate e = compute_cmsv_ip(SensingMatrix(m), s);
      const double slack = 5e-3 * m.norm();
      EXPECT_NEAR(e.rho_upper, grid, slack) << "seed=" << seed << " s=" << s;
    }
  }
}

TEST(CmsvIp, ScaleEquivariant) {
  const Matrix m = random_matrix(4, 8, 31);
  const double s = 2.0;
  const double base = compute_cmsv_ip(SensingMatrix(m), s).rho_upper;
  EXPECT_NEAR(compute_cmsv_ip(SensingMatrix(3.0 * m), s).rho_upper, 3.0 * base, 1e-6);
  EXPECT_NEAR(compute_cmsv_ip(SensingMatrix(-0.01 * m), s).rho_upper, 0.01 * base, 1e-8);
}

TEST(CmsvIp, SerialAndParallelAgree) {
  const SensingMatrix a(random_matrix(6, 14, 41));
  CmsvIpOptions o;
  o.seed = 9;
  o.exec = Exec::Serial;
  const CmsvEstimate es = compute_cmsv_ip(a, 3.0, o);
  o.exec = Exec::Parallel;
  const CmsvEstimate ep = compute_cmsv_ip(a, 3.0, o);
  EXPECT_EQ(es.rho_upper, ep.rho_upper);
  EXPECT_EQ(es.per_restart_values, ep.per_restart_values);
  EXPECT_EQ(es.converged_flags, ep.converged_flags);
}

TEST(CmsvIp, NonincreasingInSparsity) {
  const SensingMatrix a(random_matrix(5, 10, 42));
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {1.0, 1.5, 2.0, 3.0, 4.5, 7.0, 10.0}) {
    const double v = compute_cmsv_ip(a, s).rho_upper;
    EXPECT_LE(v, prev + 1e-6) << "s=" << s;
    prev = v;
  }
}

// Every k-sparse unit vector has ||x||_1^2 <= k, so rho_k is at most the
// smallest singular value over all k-column submatrices.
TEST(CmsvIp, BelowSparseSubmatrixSingularValues) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix m = random_matrix(4, 7, 50 + seed);
    for (int k : {2, 3}) {
      double sparse_min = std::numeric_limits<double>::infinity();
      testing::for_each_subset(7, k, [&](const std::vector<int>& sup) {
        Matrix sub(4, k);
        for (int j = 0; j < k; ++j) sub.col(j) = m.col(sup[static_cast<std::size_t>(j)]);
        sparse_min = std::min(sparse_min, sigma_min(sub));
      });
      const SensingMatrix a(m);
      EXPECT_LE(compute_cmsv_ip(a, k).rho_upper, sparse_min + 1e-6) << "seed=" << seed;
      EXPECT_LE(cmsv_oracle(a, k), sparse_min + 1e-9) << "seed=" << seed;
      EXPECT_LE(cmsv_lower_sdr(a, k).rho_lower, sparse_min + 1e-6) << "seed=" << seed;
    }
  }
}

TEST(CmsvIp, RejectsBadInput) {
  const SensingMatrix a(random_matrix(3, 5, 1));
  EXPECT_THROW(compute_cmsv_ip(a, 0.5), DomainError);
  EXPECT_THROW(compute_cmsv_ip(a, 5.5), DomainError);
  CmsvIpOptions o;
  o.restarts = 0;
  EXPECT_THROW(compute_cmsv_ip(a, 2.0, o), DomainError);
}

TEST(CmsvSdr, IdentityGivesOne) {
  EXPECT_NEAR(cmsv_lower_sdr(SensingMatrix(Matrix::Identity(2, 2)), 1.0).rho_lower, 1.0, 1e-12);
  const CmsvEstimate e = cmsv_lower_sdr(SensingMatrix(Matrix::Identity(4, 4)), 2.5);
  EXPECT_NEAR(e.rho_lower, 1.0, 1e-6);
  EXPECT_LE(e.rho_lower, 1.0 + 1e-9);
}

TEST(CmsvSdr, SparsityOneIsExact) {
  const Matrix m = random_matrix(3, 6, 12);
  EXPECT_NEAR(cmsv_lower_sdr(SensingMatrix(m), 1.0).rho_lower, min_column_norm(m), 1e-12);
}

TEST(CmsvSdr, FullSparsityIsSmallestSingularValue) {
  // ||Z||_1 <= n tr Z holds for every PSD Z, so the budget is vacuous.
  const Matrix m = random_matrix(7, 5, 13);
  const CmsvEstimate e = cmsv_lower_sdr(SensingMatrix(m), 5.0);
  EXPECT_LE(e.rho_lower, sigma_min(m) + 1e-9);
  EXPECT_NEAR(e.rho_lower, sigma_min(m), 1e-3);
}

// Feasible sets grow with s, so each certified bound sits below the value
// attained at every smaller s.
TEST(CmsvSdr, NonincreasingInSparsity) {
  const SensingMatrix a(random_matrix(4, 7, 14));
  std::vector<CmsvEstimate> runs;
  for (double s : {1.0, 1.5, 2.0, 3.0, 5.0, 7.0}) runs.push_back(cmsv_lower_sdr(a, s));
  for (std::size_t i = 0; i < runs.size(); ++i) {
    EXPECT_LE(runs[i].objective_lower, runs[i].relaxation_value);
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_LE(runs[i].objective_lower, runs[j].relaxation_value) << "s=" << runs[i].s;
    }
  }
}

TEST(CmsvSdr, ScaleEquivariant) {
  const Matrix m = random_matrix(4, 6, 15);
  const double base = cmsv_lower_sdr(SensingMatrix(m), 1.7).rho_lower;
  EXPECT_NEAR(cmsv_lower_sdr(SensingMatrix(2.0 * m), 1.7).rho_lower, 2.0 * base, 1e-5);
}

TEST(ProjectUnitL1, FeasibleAndMaximizesCorrelation) {
  Rng rng(5, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector u = testing::gaussian_vector(7, rng);
    const double radius = 1.0 + 1.5 * rng.uniform();
    const Vector x = project_unit_l1(u, radius);
    EXPECT_NEAR(x.norm(), 1.0, 1e-12);
    EXPECT_LE(x.lpNorm<1>(), radius + 1e-9);
    // No sampled feasible point correlates better with u.
    for (int k = 0; k < 200; ++k) {
      Vector y = testing::gaussian_vector(7, rng);
      for (Index i = 0; i < 7; ++i) {
        if (rng.uniform() < 0.5) y[i] = 0.0;
      }
      if (y.norm() == 0.0) continue;
      y.normalize();
      if (y.lpNorm<1>() > radius) continue;
      EXPECT_LE(u.dot(y), u.dot(x) + 1e-9);
    }
  }
}

TEST(ProjectUnitL1, EdgeCases) {
  const Vector u = (Vector(3) << 0.0, -2.0, 1.0).finished();
  const Vector spike = project_unit_l1(u, 1.0);
  EXPECT_NEAR(spike[1], -1.0, 1e-12);
  EXPECT_NEAR(spike.norm(), 1.0, 1e-12);
  // A loose radius only normalizes.
  EXPECT_TRUE(project_unit_l1(u, 3.0).isApprox(u.normalized(), 1e-14));
  EXPECT_THROW(project_unit_l1(u, 0.9), DomainError);
}

TEST(CmsvOracle, IdentityAndGrid) {
  EXPECT_NEAR(cmsv_oracle(SensingMatrix(Matrix::Identity(4, 4)), 2.0), 1.0, 1e-12);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix m = random_matrix(2, 3, 200 + seed);
    for (double s : {1.2, 2.0, 3.0}) {
      const double grid = testing::cmsv_by_sphere_grid(m, s, 1500);
      const double orc = cmsv_oracle(SensingMatrix(m), s);
      EXPECT_NEAR(orc, grid, 5e-3 * m.norm()) << "seed=" << seed << " s=" << s;
    }
  }
}

TEST(CmsvOracle, NonincreasingInSamplesAndSparsity) {
  const SensingMatrix a(random_matrix(3, 6, 16));
  CmsvOracleOptions o;
  o.seed = 3;
  double prev = std::numeric_limits<double>::infinity();
  for (int samples : {10, 50, 200, 800}) {
    o.samples = samples;
    const double v = cmsv_oracle(a, 2.0, o);
    EXPECT_LE(v, prev);
    prev = v;
  }
  o.samples = 500;
  EXPECT_LE(cmsv_oracle(a, 3.0, o), cmsv_oracle(a, 1.5, o) + 1e-9);
}

TEST(CmsvOracle, SerialAndParallelAgree) {
  const SensingMatrix a(random_matrix(3, 6, 17));
  CmsvOracleOptions o;
  o.samples = 300;
  o.exec = Exec::Serial;
  const double vs = cmsv_oracle(a, 2.2, o);
  o.exec = Exec::Parallel;
  EXPECT_EQ(vs, cmsv_oracle(a, 2.2, o));
}

TEST(CmsvOracle, SizeGuard) {
  EXPECT_THROW(cmsv_oracle(SensingMatrix(random_matrix(3, 9, 1)), 2.0), SizeGuardError);
}

// Relaxation below, sampling in the middle, interior point above.
TEST(CmsvBracket, HoldsOnSmallInstances) {
  CmsvOracleOptions oo;
  oo.samples = 400;
  constexpr double kTol = 1e-6;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SensingMatrix a(random_matrix(3, 6, 1000 + seed));
    const double s = 1.0 + 4.0 * static_cast<double>(seed % 9) / 8.0;
    const double lower = cmsv_lower_sdr(a, s).rho_lower;
    const double mid = cmsv_oracle(a, s, oo);
    const double upper = compute_cmsv_ip(a, s).rho_upper;
    EXPECT_LE(lower, mid + kTol) << "seed=" << seed << " s=" << s;
    EXPECT_LE(mid, upper + kTol) << "seed=" << seed << " s=" << s;
  }
}

TEST(RicExact, MatchesSingularValueOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix m = random_matrix(6, 10, 300 + seed) / std::sqrt(6.0);
    for (Index k : {1, 2, 3}) {
      const RicEstimate r = ric_exact(SensingMatrix(m), k);
      EXPECT_NEAR(r.delta_k, testing::ric_by_singular_values(m, static_cast<int>(k)), 1e-10);
      ASSERT_EQ(static_cast<Index>(r.worst_support.size()), k);
    }
  }
}

TEST(RicExact, OrthonormalColumnsAndGuards) {
  EXPECT_NEAR(ric_exact(SensingMatrix(Matrix::Identity(5, 5)), 3).delta_k, 0.0, 1e-12);
  const SensingMatrix a(random_matrix(4, 8, 2));
  EXPECT_THROW(ric_exact(a, 0), DomainError);
  EXPECT_THROW(ric_exact(a, 9), DomainError);
  EXPECT_THROW(ric_exact(a, 4, Exec::Serial, 10.0), SizeGuardError);
  // Serial and parallel enumeration give the same answer.
  const RicEstimate rs = ric_exact(a, 3, Exec::Serial);
  const RicEstimate rp = ric_exact(a, 3, Exec::Parallel);
  EXPECT_EQ(rs.delta_k, rp.delta_k);
  EXPECT_EQ(rs.worst_support, rp.worst_support);
}

}  // namespace
}  // namespace sparsecert
