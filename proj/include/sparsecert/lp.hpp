// Dense primal-dual interior-point linear programming.
#pragma once

#include "sparsecert/core.hpp"

#include <string_view>
#include <vector>

namespace sparsecert {

// minimize    c^T u
// subject to  A_eq u  = b_eq
//             G u    <= h
//             u_j    >= 0   for every j with nonnegative[j] set
//
// Sign bounds could be written as rows of G; keeping them separate lets the
// solver treat them as diagonal terms, which is what makes the n-program
// verification bank cheap.
struct LpProblem {
  Vector c;
  Matrix a_eq;
  Vector b_eq;
  Matrix g;
  Vector h;
  std::vector<bool> nonnegative;  // empty: all variables free

  Index num_vars() const { return c.size(); }
  // Throws DomainError on inconsistent dimensions or non-finite data.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, MaxIter };

std::string_view to_string(LpStatus s);

struct LpOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.99;
};

struct LpSolution {
  Vector u;
  double objective = 0.0;
  Vector dual_eq;     // y, multiplier of A_eq u = b_eq
  Vector dual_ineq;   // lambda >= 0, multiplier of G u <= h
  Vector dual_bound;  // zeta >= 0, multiplier of u_j >= 0 (zero for free variables)
  double gap = 0.0;   // lambda^T (h - G u) + zeta^T u
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  LpStatus status = LpStatus::MaxIter;

  // Lagrange dual objective -b^T y - h^T lambda.
  double dual_objective(const LpProblem& p) const;
};

// Infeasible-start Mehrotra predictor-corrector. Infeasibility and
// unboundedness are reported through `status`; on MaxIter the best iterate
// seen is returned.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace sparsecert
