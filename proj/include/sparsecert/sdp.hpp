// Small dense semidefinite programs with an optional elementwise l1 budget.
#pragma once

#include "sparsecert/core.hpp"
#include "sparsecert/lp.hpp"

#include <optional>
#include <vector>

namespace sparsecert {

// optimize   <C, Z>
// subject to <A_i, Z> = b_i,  Z symmetric PSD,
//            ||B Z B^T||_1 <= s   (sum of absolute entries; B = I when empty)
//
// The budget is handled by an auxiliary symmetric U with -U <= BZB^T <= U
// elementwise and sum(U) <= s. A non-identity B lets callers restrict Z to a
// face of the PSD cone (Z = N W N^T) while budgeting the full matrix.
struct SdpProblem {
  enum class Sense { Minimize, Maximize };

  Matrix cost;
  std::vector<Matrix> eq_matrices;
  Vector eq_rhs;
  std::optional<double> l1_budget;
  Matrix l1_map;
  Sense sense = Sense::Minimize;

  Index dim() const { return cost.rows(); }
  // Throws DomainError (shape, symmetry) or SizeGuardError (n > size_cap).
  void validate(Index size_cap) const;
};

struct SdpOptions {
  double tol = 1e-8;
  int max_iter = 1000;  // total Newton steps across all barrier stages
  Index size_cap = 100;
  double mu_factor = 10.0;
};

struct SdpSolution {
  Matrix z;
  double objective = 0.0;  // <C, Z> at the returned point
  // Barrier duality-gap bound. On max_iter the returned point is the last
  // completed center, so the bound still holds; inf if no center was reached.
  double gap = 0.0;
  double eq_residual = 0.0;
  double min_eigenvalue = 0.0;
  int iterations = 0;
  LpStatus status = LpStatus::MaxIter;
  // Multiplier of the budget, a symmetric matrix in the coordinates of
  // B Z B^T (empty without a budget). Oriented so that, up to the equality
  // terms, C - B^T U B is PSD when minimizing and B^T U B - C when
  // maximizing. Weak duality then yields bounds valid for any U, e.g. with
  // tr Z = 1:  min <C, Z> >= lambda_min(C - U) - s * max|U_ij|.
  Matrix l1_dual;

  // Bound on the true optimum implied by the gap: a lower bound for
  // minimization, an upper bound for maximization.
  double certified_bound(SdpProblem::Sense sense) const {
    return sense == SdpProblem::Sense::Minimize ? objective - gap : objective + gap;
  }
};

// Barrier path-following with infeasible-start Newton centering.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

}  // namespace sparsecert
