// Lower bounds on the critical sparsity k*: the largest k for which every
// kernel vector z of A puts strictly less than half of its l1 mass on any k
// entries.
#pragma once

#include "sparsecert/core.hpp"
#include "sparsecert/lp.hpp"
#include "sparsecert/parallel.hpp"
#include "sparsecert/sdp.hpp"

#include <string_view>

namespace sparsecert {

enum class VerifyMethod { Linf, L2, Exact };

std::string_view to_string(VerifyMethod m);

struct VerificationResult {
  Index k_lower = 0;
  VerifyMethod method = VerifyMethod::Linf;
  double tau = 0.0;         // +inf for a trivial kernel
  Vector per_index_values;  // L-infinity bank optima max 2 z_i; empty otherwise
  Index kernel_dim = 0;
  double runtime = 0.0;     // wall seconds
  int iterations = 0;       // solver iterations summed over all programs
};

struct VerifyOptions {
  LpOptions lp;
  SdpOptions sdp;
  Exec exec = Exec::Parallel;
  double rank_tol = 1e-10;
};

// Largest integer strictly below tau (1e-9 slack), clamped to [0, n].
Index k_lower_from_tau(double tau, Index n);

// Solves max 2 z_i s.t. Az = 0, ||z||_1 <= 1 for every i and takes
// tau = 1 / max_i. The optimum of each program is taken from its dual bound,
// so tau is a lower bound on min (1/2)||z||_1/||z||_inf up to solver tol.
VerificationResult verify_linf(const SensingMatrix& a, const VerifyOptions& options = {});

// Semidefinite bound: max 4 tr(Z) s.t. Z PSD, tr(A Z A^T) = 0, ||Z||_1 <= 1,
// tau = 1 / optimum.
VerificationResult verify_l2(const SensingMatrix& a, const VerifyOptions& options = {});

struct ExactOracleOptions {
  LpOptions lp;
  Exec exec = Exec::Parallel;
  double tol = 1e-9;
  Index max_n = 14;
  Index max_k = 5;
};

// Exhaustive null space property test for one k: every support of size k and
// every sign pattern on it. Throws SizeGuardError outside the limits.
bool nsp_oracle_exact(const SensingMatrix& a, Index k, const ExactOracleOptions& options = {});

// Largest k <= min(n, options.max_k) passing nsp_oracle_exact, packaged like
// the relaxations; tau carries k itself. Stopping at max_k only proves k* >= k.
VerificationResult verify_exact(const SensingMatrix& a, const ExactOracleOptions& options = {});

}  // namespace sparsecert
