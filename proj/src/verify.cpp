#include "sparsecert/verify.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace sparsecert {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared constraints of the kernel/l1-ball programs in split form
// z = u[0:n] - u[n:2n]:  R z = 0 with R an orthonormal row basis, sum(u) <= 1.
LpProblem kernel_ball_lp(const KernelBasis& kb, Index n) {
  LpProblem p;
  p.c = Vector::Zero(2 * n);
  p.a_eq.resize(kb.rank, 2 * n);
  p.a_eq << kb.row_space, -kb.row_space;
  p.b_eq = Vector::Zero(kb.rank);
  p.g = Matrix::Ones(1, 2 * n);
  p.h = Vector::Ones(1);
  p.nonnegative.assign(static_cast<std::size_t>(2 * n), true);
  return p;
}

void require_optimal(const LpSolution& sol, const std::string& what) {
  if (sol.status != LpStatus::Optimal) {
    throw SolverError(what + ": " + std::string(to_string(sol.status)) + " after " +
                      std::to_string(sol.iterations) + " iterations");
  }
}

VerificationResult trivial_kernel(VerifyMethod method, Index n, Clock::time_point start) {
  VerificationResult r;
  r.method = method;
  r.k_lower = n;
  r.tau = std::numeric_limits<double>::infinity();
  r.kernel_dim = 0;
  r.runtime = seconds_since(start);
  return r;
}

}  // namespace

std::string_view to_string(VerifyMethod m) {
  switch (m) {
    case VerifyMethod::Linf: return "linf";
    case VerifyMethod::L2: return "l2";
    case VerifyMethod::Exact: return "exact";
  }
  return "unknown";
}

Index k_lower_from_tau(double tau, Index n) {
  if (!(tau < std::numeric_limits<double>::infinity())) return n;
  if (!(tau > 0)) return 0;
  const double k = std::ceil(tau - 1e-9) - 1.0;
  if (k <= 0) return 0;
  if (k >= static_cast<double>(n)) return n;
  return static_cast<Index>(k);
}

VerificationResult verify_linf(const SensingMatrix& a, const VerifyOptions& options) {
  const auto start = Clock::now();
  const Index n = a.cols();
  const KernelBasis kb = kernel_basis(a.data(), options.rank_tol);
  if (kb.kernel.cols() == 0) {
    auto r = trivial_kernel(VerifyMethod::Linf, n, start);
    r.per_index_values = Vector::Zero(n);
    return r;
  }
  const LpProblem base = kernel_ball_lp(kb, n);

  struct Slot {
    double value = 0.0;
    int iterations = 0;
  };
  const auto slots = map_indices<Slot>(n, options.exec, [&](std::ptrdiff_t i) {
    LpProblem p = base;
    p.c[i] = -2.0;
    p.c[n + i] = 2.0;
    const LpSolution sol = solve_lp(p, options.lp);
    require_optimal(sol, "L-infinity program for index " + std::to_string(i));
    // max 2 z_i = -min; the dual value bounds the maximum from above.
    return Slot{std::max(-sol.objective, -sol.dual_objective(p)), sol.iterations};
  });

  VerificationResult r;
  r.method = VerifyMethod::Linf;
  r.kernel_dim = kb.kernel.cols();
  r.per_index_values.resize(n);
  double vmax = 0.0;
  for (Index i = 0; i < n; ++i) {
    r.per_index_values[i] = slots[static_cast<std::size_t>(i)].value;
    r.iterations += slots[static_cast<std::size_t>(i)].iterations;
    vmax = std::max(vmax, r.per_index_values[i]);
  }
  r.tau = vmax > options.lp.tol ? 1.0 / vmax : std::numeric_limits<double>::infinity();
  r.k_lower = k_lower_from_tau(r.tau, n);
  r.runtime = seconds_since(start);
  return r;
}

VerificationResult verify_l2(const SensingMatrix& a, const VerifyOptions& options) {
  const auto start = Clock::now();
  const Index n = a.cols();
  if (n > options.sdp.size_cap) {
    throw SizeGuardError("L2 verification needs n <= " + std::to_string(options.sdp.size_cap) +
                         ", got " + std::to_string(n));
  }
  const KernelBasis kb = kernel_basis(a.data(), options.rank_tol);
  if (kb.kernel.cols() == 0) return trivial_kernel(VerifyMethod::L2, n, start);

  // Z PSD with tr(A Z A^T) = 0 forces range(Z) into ker A, so Z = N W N^T with
  // W PSD and N the orthonormal kernel basis. This face has an interior, which
  // the equality form lacks; tr Z = tr W and the budget applies to N W N^T.
  const Index d = kb.kernel.cols();
  SdpProblem p;
  p.cost = 4.0 * Matrix::Identity(d, d);
  p.l1_budget = 1.0;
  p.l1_map = kb.kernel;
  p.sense = SdpProblem::Sense::Maximize;
  const SdpSolution sol = solve_sdp(p, options.sdp);
  if (!std::isfinite(sol.gap)) {
    throw SolverError("L2 program: " + std::string(to_string(sol.status)) + " after " +
                      std::to_string(sol.iterations) + " Newton steps");
  }
  VerificationResult r;
  r.method = VerifyMethod::L2;
  r.kernel_dim = d;
  r.iterations = sol.iterations;
  // Weak duality: if 4 I <= c N^T U N then 4 tr W <= c <U, N W N^T> <= c max|U_ij|.
  // Falls back to the barrier gap when the multiplier is not positive on the kernel.
  double upper = sol.certified_bound(p.sense);
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(kb.kernel.transpose() * sol.l1_dual * kb.kernel,
                                                            Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
  if (lmin > 0) upper = std::max(4.0 / lmin * sol.l1_dual.cwiseAbs().maxCoeff(), sol.objective);
  r.tau = upper > 0 ? 1.0 / upper : std::numeric_limits<double>::infinity();
  r.k_lower = k_lower_from_tau(r.tau, n);
  r.runtime = seconds_since(start);
  return r;
}

namespace {

void check_exact_limits(const SensingMatrix& a, Index k, const ExactOracleOptions& o) {
  if (k < 0 || k > a.cols()) {
    throw DomainError("k must lie in [0, n], got " + std::to_string(k));
  }
  if (a.cols() > o.max_n || k > o.max_k) {
    throw SizeGuardError("exact oracle limited to n <= " + std::to_string(o.max_n) +
                         " and k <= " + std::to_string(o.max_k));
  }
}

// True when every (support, sign) program stays below 1/2 - tol.
bool nsp_holds(const KernelBasis& kb, Index n, Index k, const ExactOracleOptions& o) {
  if (k == 0 || kb.kernel.cols() == 0) return true;
  std::vector<std::vector<Index>> supports;
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    supports.push_back(idx);
    Index pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  const LpProblem base = kernel_ball_lp(kb, n);
  // z -> -z maps the feasible set onto itself, so the first sign is fixed.
  const std::uint64_t patterns = std::uint64_t{1} << (k - 1);
  const auto total = static_cast<std::ptrdiff_t>(supports.size() * patterns);
  std::vector<char> fails(static_cast<std::size_t>(total), 0);
  bool any_fail = false;  // early-exit hint only; the answer comes from `fails`
  for_each_index(total, o.exec, [&](std::ptrdiff_t job) {
    bool seen;
#pragma omp atomic read
    seen = any_fail;
    if (seen) return;
    const auto& s = supports[static_cast<std::size_t>(job) / patterns];
    const std::uint64_t bits = static_cast<std::uint64_t>(job) % patterns;
    LpProblem p = base;
    for (Index j = 0; j < k; ++j) {
      const double sign = (j == 0 || !((bits >> (j - 1)) & 1U)) ? 1.0 : -1.0;
      const Index i = s[static_cast<std::size_t>(j)];
      p.c[i] = -sign;
      p.c[n + i] = sign;
    }
    const LpSolution sol = solve_lp(p, o.lp);
    require_optimal(sol, "exact NSP program");
    // The dual value bounds the maximum from above, which settles ties at
    // exactly 1/2 (the condition is strict) in favour of failure.
    if (std::max(-sol.objective, -sol.dual_objective(p)) >= 0.5 - o.tol) {
      fails[static_cast<std::size_t>(job)] = 1;
#pragma omp atomic write
      any_fail = true;
    }
  });
  for (char f : fails) {
    if (f) return false;
  }
  return true;
}

}  // namespace

bool nsp_oracle_exact(const SensingMatrix& a, Index k, const ExactOracleOptions& options) {
  check_exact_limits(a, k, options);
  return nsp_holds(kernel_basis(a.data()), a.cols(), k, options);
}

VerificationResult verify_exact(const SensingMatrix& a, const ExactOracleOptions& options) {
  const auto start = Clock::now();
  const Index n = a.cols();
  check_exact_limits(a, 0, options);
  const KernelBasis kb = kernel_basis(a.data());
  if (kb.kernel.cols() == 0) return trivial_kernel(VerifyMethod::Exact, n, start);
  Index k = 0;
  const Index limit = std::min(n, options.max_k);
  while (k < limit && nsp_holds(kb, n, k + 1, options)) ++k;
  VerificationResult r;
  r.method = VerifyMethod::Exact;
  r.kernel_dim = kb.kernel.cols();
  r.k_lower = k;
  r.tau = static_cast<double>(k);
  r.runtime = seconds_since(start);
  return r;
}

}  // namespace sparsecert
