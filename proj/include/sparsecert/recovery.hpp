// Sparse recovery programs (basis pursuit, Dantzig selector, LASSO) and the
// CMSV / RIC error bounds that go with them.
#pragma once

#include "sparsecert/core.hpp"
#include "sparsecert/lp.hpp"
#include "sparsecert/parallel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sparsecert {

enum class RecoveryAlgorithm { BP, DS, Lasso };

std::string_view to_string(RecoveryAlgorithm a);

struct RecoveryResult {
  Vector x_hat;
  RecoveryAlgorithm algorithm = RecoveryAlgorithm::BP;
  double objective = 0.0;           // ||x||_1 for BP / DS, the penalized loss for LASSO
  double residual_l2 = 0.0;         // ||y - A x_hat||_2
  double dual_infeasibility = 0.0;  // solver-specific optimality residual
  int iterations = 0;
  bool converged = false;
};

struct BpOptions {
  LpOptions lp;            // eps == 0
  double tol = 1e-7;       // eps > 0: primal and dual residual target
  int max_iter = 200000;
  double penalty = 1.0;    // initial ADMM penalty, adapted by residual balancing
};

// min ||z||_1 s.t. ||y - A z||_2 <= eps.
// eps == 0 is solved as a split-variable LP; eps > 0 by ADMM on
//   min ||x||_1 + I{||y - v||_2 <= eps}  s.t.  x = z, v = A z.
// Throws DomainError when no z satisfies the constraint, SolverError when the
// solver fails.
RecoveryResult solve_bp(const SensingMatrix& a, const Vector& y, double eps,
                        const BpOptions& options = {});

// min ||z||_1 s.t. ||A^T (y - A z)||_inf <= lambda_sigma, as one LP.
RecoveryResult solve_ds(const SensingMatrix& a, const Vector& y, double lambda_sigma,
                        const LpOptions& options = {});

struct LassoOptions {
  double tol = 1e-9;  // largest coordinate change in a sweep
  int max_sweeps = 1000000;
};

// min 1/2 ||y - A z||_2^2 + lambda_sigma ||z||_1 by cyclic coordinate descent.
// Throws SolverError after max_sweeps.
RecoveryResult solve_lasso(const SensingMatrix& a, const Vector& y, double lambda_sigma,
                           const LassoOptions& options = {});

enum class RhoSource { IP, SDR, Oracle };

std::string_view to_string(RhoSource s);

struct BoundInputs {
  Index k = 1;
  double eps = 0.0;
  double lambda_sigma = 0.0;
  double kappa = 0.5;
  double rho_4k = 0.0;     // rho_{4k}, for BP and DS
  double rho_lasso = 0.0;  // rho_{4k / (1 - kappa)^2}
  RhoSource rho_source = RhoSource::SDR;
  std::optional<double> delta_2k;
  std::optional<double> delta_3k;
};

struct BoundReport {
  Index k = 0;
  double bound_bp = 0.0;
  double bound_ds = 0.0;
  double bound_lasso = 0.0;
  RhoSource rho_source = RhoSource::SDR;
  // True only for SDR-derived rho; IP values may overestimate rho.
  bool certified = false;
  std::optional<double> ric_bound_bp;  // needs delta_2k < sqrt(2) - 1
  std::optional<double> ric_bound_ds;  // needs delta_2k + delta_3k < 1
  std::vector<std::string> flags;      // premises that failed, infinite bounds
};

// Sparsity level that the LASSO bound needs: 4k / (1 - kappa)^2.
double lasso_sparsity_level(Index k, double kappa);

// Pure arithmetic. Non-positive rho gives an infinite bound and a flag.
BoundReport evaluate_bounds(const BoundInputs& in);

struct NoiseEvent {
  bool holds = false;
  double lhs = 0.0;  // ||A^T w||_inf
};

// E = { ||A^T w||_inf <= lambda_n sigma }.
NoiseEvent check_noise_event(const SensingMatrix& a, const Vector& w, double lambda_n,
                             double sigma);

// lambda_n = sqrt(2 (1 + t) log n).
double noise_lambda(Index n, double t = 0.0);

// 1 - (sqrt(pi (1 + t) log n) n^t)^{-1}, the lower bound on Pr(E) for unit
// columns and lambda_n = noise_lambda(n, t).
double noise_event_probability_bound(Index n, double t);

struct NoiseEventStudy {
  int draws = 0;
  int hits = 0;
  double frequency = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo estimate of Pr(E) for w ~ N(0, sigma^2 I); draw i uses stream i.
NoiseEventStudy noise_event_frequency(const SensingMatrix& a, double lambda_n, double sigma,
                                      int draws, std::uint64_t seed, Exec exec = Exec::Parallel);

inline constexpr double kErrorResolution = 1e-7;

struct ErrorSparsity {
  double s_h = 0.0;
  double limit = 0.0;
  bool holds = true;
};

// s(x_hat - x) against 4k (BP, DS) or 4k / (1 - kappa)^2 (LASSO), with k the
// support size of x_true. An error vector below solver resolution,
// ||h||_1 <= kErrorResolution * max(1, ||x_true||_1), holds vacuously (s_h is
// still reported).
ErrorSparsity check_error_vector_sparsity(const Vector& x_true, const RecoveryResult& result,
                                          double kappa = 0.5);

}  // namespace sparsecert
