// The l1-constrained minimal singular value
//   rho_s(A) = min { ||Ax||_2 : ||x||_2 = 1, ||x||_1^2 <= s }
// bracketed from above by a multi-start interior-point method on the split
// nonconvex program and from below by a semidefinite relaxation.
#pragma once

#include "sparsecert/core.hpp"
#include "sparsecert/parallel.hpp"
#include "sparsecert/sdp.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace sparsecert {

struct CmsvEstimate {
  double s = 1.0;
  // Upper estimate: sqrt of the best converged objective. May sit above
  // rho_s when every restart stops in a local minimum.
  double rho_upper = std::numeric_limits<double>::quiet_NaN();
  double objective_upper = std::numeric_limits<double>::quiet_NaN();  // rho_upper^2
  // Certified lower bound (up to solver tolerance) from the relaxation.
  double rho_lower = std::numeric_limits<double>::quiet_NaN();
  double objective_lower = std::numeric_limits<double>::quiet_NaN();  // certified: value - gap
  double relaxation_value = std::numeric_limits<double>::quiet_NaN();  // <A^T A, Z> at solver's Z
  int restarts = 0;
  Vector per_restart_values;        // ||Az||_2^2 at each restart's final point
  std::vector<bool> converged_flags;
  Vector per_restart_kkt;
  Vector minimizer;                 // best converged unit vector
};

struct CmsvIpOptions {
  int restarts = 50;
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;
  int outer_iterations = 8;    // penalty x10 (capped at 1e4) and barrier /10 per outer step
  double initial_penalty = 10.0;
  double initial_barrier = 1e-3;
  int max_newton = 200;        // per outer step
  double kkt_tol = 1e-6;
};

// Multi-start log-barrier / augmented-Lagrangian solver on
//   min ||A(p - q)||^2  s.t.  sum(p + q) <= sqrt(s), ||p - q||_2^2 = 1, p, q >= 0.
// Reported values are evaluated at the normalized point z / ||z||_2, so each
// corresponds to an exactly unit vector with ||z||_1 <= sqrt(s) + 1e-6.
// Throws SolverError when no restart meets the KKT tolerance.
CmsvEstimate compute_cmsv_ip(const SensingMatrix& a, double s, const CmsvIpOptions& options = {});

struct CmsvSdrOptions {
  SdpOptions sdp;
};

// min tr(A^T A Z) s.t. Z PSD, tr Z = 1, ||Z||_1 <= s.
// rho_lower = sqrt(max(value - gap, 0)). At s = 1 the feasible set is the
// diagonal simplex, whose value min_j ||A_j||^2 is returned directly.
CmsvEstimate cmsv_lower_sdr(const SensingMatrix& a, double s, const CmsvSdrOptions& options = {});

struct CmsvOracleOptions {
  int samples = 2000;
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;
  int descent_steps = 3000;
  Index max_n = 8;
};

// Projection of u onto {||x||_2 = 1, ||x||_1 <= radius}: soft-threshold then
// normalize, with the threshold found by bisection. Requires radius >= 1.
Vector project_unit_l1(const Vector& u, double radius);

// Dense sampling of the feasible set with projected-gradient refinement of
// every sample. Returns the smallest ||Ax||_2 seen; every value is attained
// at a feasible point, and sample i uses its own stream so the result is
// nonincreasing in `samples`.
double cmsv_oracle(const SensingMatrix& a, double s, const CmsvOracleOptions& options = {});

struct RicEstimate {
  Index k = 0;
  double delta_k = 0.0;
  std::vector<Index> worst_support;
};

// Brute force over all supports of size k; throws SizeGuardError when
// C(n, k) exceeds max_supports.
RicEstimate ric_exact(const SensingMatrix& a, Index k, Exec exec = Exec::Parallel,
                      double max_supports = 1e6);

}  // namespace sparsecert
