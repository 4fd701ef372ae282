#include "sparsecert/lp.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

namespace sparsecert {
namespace {

using testing::lp_vertex_enumeration;

TEST(SolveLp, SingleBound) {
  // min u s.t. u >= 1
  LpProblem p;
  p.c = Vector::Ones(1);
  p.g = -Matrix::Ones(1, 1);
  p.h = -Vector::Ones(1);
  const LpSolution sol = solve_lp(p);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.u[0], 1.0, 1e-7);
  EXPECT_NEAR(sol.objective, 1.0, 1e-7);
}

TEST(SolveLp, SimplexVertex) {
  LpProblem p;
  p.c = (Vector(5) << 0.3, -1.2, 0.7, -0.4, 2.0).finished();
  p.a_eq = Matrix::Ones(1, 5);
  p.b_eq = Vector::Ones(1);
  p.nonnegative.assign(5, true);
  const LpSolution sol = solve_lp(p);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.objective, -1.2, 1e-7);
  EXPECT_NEAR(sol.u[1], 1.0, 1e-6);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  for (std::uint64_t trial = 0; trial < 25; ++trial) {
    Rng rng(1234, trial);
    const Matrix g = testing::gaussian_matrix(8, 5, rng);
    Vector h(8);
    for (Index i = 0; i < 8; ++i) h[i] = 0.5 + rng.uniform();
    Vector weights(8);
    for (Index i = 0; i < 8; ++i) weights[i] = rng.uniform();
    // c in the negative cone of the rows keeps the LP bounded below.
    const Vector c = -g.transpose() * weights;

    LpProblem p;
    p.c = c;
    p.g = g;
    p.h = h;
    const LpSolution sol = solve_lp(p);
    const double oracle = lp_vertex_enumeration(c, g, h);
    ASSERT_EQ(sol.status, LpStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(sol.objective, oracle, 1e-6) << "trial " << trial;
  }
}

TEST(SolveLp, WeakDualityAndResiduals) {
  Rng rng(99, 0);
  const Matrix a = testing::gaussian_matrix(3, 10, rng);
  Vector x0 = Vector::Zero(10);
  x0[2] = 1.0;
  x0[7] = -0.5;
  LpProblem p;
  // min ||x||_1 s.t. A x = A x0 via x = u+ - u-
  p.c = Vector::Ones(20);
  p.a_eq.resize(3, 20);
  p.a_eq << a, -a;
  p.b_eq = a * x0;
  p.nonnegative.assign(20, true);
  const LpSolution sol = solve_lp(p);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_GE(sol.objective - sol.dual_objective(p), -1e-7);
  EXPECT_LE(sol.objective - sol.dual_objective(p), 1e-6);
  EXPECT_LE(sol.primal_residual, 1e-8);
  EXPECT_LE(sol.dual_residual, 1e-8);
  EXPECT_GE(sol.dual_bound.minCoeff(), -1e-12);
}

TEST(SolveLp, InvariantUnderEqualityRowScaling) {
  Rng rng(7, 0);
  const Matrix a = testing::gaussian_matrix(4, 9, rng);
  const Vector x0 = testing::gaussian_vector(9, rng);
  LpProblem p;
  p.c = Vector::Ones(18);
  p.a_eq.resize(4, 18);
  p.a_eq << a, -a;
  p.b_eq = a * x0;
  p.nonnegative.assign(18, true);
  const LpSolution base = solve_lp(p);

  const Vector scale = (Vector(4) << 1e-3, 5.0, -2.0, 40.0).finished();
  LpProblem scaled = p;
  scaled.a_eq = scale.asDiagonal() * p.a_eq;
  scaled.b_eq = scale.asDiagonal() * p.b_eq;
  const LpSolution other = solve_lp(scaled);
  ASSERT_EQ(base.status, LpStatus::Optimal);
  ASSERT_EQ(other.status, LpStatus::Optimal);
  EXPECT_NEAR(base.objective, other.objective, 1e-6);
}

TEST(SolveLp, DetectsInfeasible) {
  // u >= 1 and u <= 0
  LpProblem p;
  p.c = Vector::Ones(1);
  p.g = (Matrix(2, 1) << -1.0, 1.0).finished();
  p.h = (Vector(2) << -1.0, 0.0).finished();
  EXPECT_EQ(solve_lp(p).status, LpStatus::Infeasible);
}

TEST(SolveLp, DetectsInfeasibleEquality) {
  // u1 + u2 = -1 with u >= 0
  LpProblem p;
  p.c = Vector::Ones(2);
  p.a_eq = Matrix::Ones(1, 2);
  p.b_eq = -Vector::Ones(1);
  p.nonnegative.assign(2, true);
  EXPECT_EQ(solve_lp(p).status, LpStatus::Infeasible);
}

TEST(SolveLp, DetectsUnbounded) {
  // min -u1 s.t. u >= 0, u1 - u2 <= 1
  LpProblem p;
  p.c = (Vector(2) << -1.0, 0.0).finished();
  p.g = (Matrix(1, 2) << 1.0, -1.0).finished();
  p.h = Vector::Ones(1);
  p.nonnegative.assign(2, true);
  EXPECT_EQ(solve_lp(p).status, LpStatus::Unbounded);
}

TEST(SolveLp, MaxIterReturnsBestIterate) {
  LpProblem p;
  p.c = Vector::Ones(1);
  p.g = -Matrix::Ones(1, 1);
  p.h = -Vector::Ones(1);
  LpOptions opts;
  opts.max_iter = 1;
  const LpSolution sol = solve_lp(p, opts);
  EXPECT_EQ(sol.status, LpStatus::MaxIter);
  EXPECT_EQ(sol.u.size(), 1);
}

TEST(SolveLp, RejectsBadDimensions) {
  LpProblem p;
  p.c = Vector::Ones(2);
  p.a_eq = Matrix::Ones(1, 3);
  p.b_eq = Vector::Ones(1);
  EXPECT_THROW(solve_lp(p), DomainError);
}

}  // namespace
}  // namespace sparsecert
