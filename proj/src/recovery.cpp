#include "sparsecert/recovery.hpp"

#include "sparsecert/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace sparsecert {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

void check_rhs(const SensingMatrix& a, const Vector& y) {
  if (y.size() != a.rows()) {
    throw DomainError("measurement length " + std::to_string(y.size()) + " does not match " +
                      std::to_string(a.rows()) + " rows");
  }
  if (!y.allFinite()) throw DomainError("measurements must be finite");
}

double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

// Split-variable LP min 1'u, u = (z+, z-) >= 0, plus the caller's rows.
LpProblem split_l1_program(Index n) {
  LpProblem p;
  p.c = Vector::Ones(2 * n);
  p.nonnegative.assign(static_cast<std::size_t>(2 * n), true);
  return p;
}

Vector merge_split(const Vector& u, Index n) { return u.head(n) - u.tail(n); }

RecoveryResult finish(const SensingMatrix& a, const Vector& y, Vector x, RecoveryAlgorithm alg) {
  RecoveryResult r;
  r.algorithm = alg;
  r.residual_l2 = (y - a.data() * x).norm();
  r.objective = x.lpNorm<1>();
  r.x_hat = std::move(x);
  return r;
}

// Smallest achievable ||y - Az||_2.
double least_squares_residual(const Matrix& a, const Vector& y) {
  const Eigen::ColPivHouseholderQR<Matrix> qr(a);
  return (y - a * qr.solve(y)).norm();
}

RecoveryResult solve_bp_exact(const SensingMatrix& a, const Vector& y, const LpOptions& lp) {
  const Index n = a.cols();
  LpProblem p = split_l1_program(n);
  p.a_eq.resize(a.rows(), 2 * n);
  p.a_eq << a.data(), -a.data();
  p.b_eq = y;
  const LpSolution sol = solve_lp(p, lp);
  if (sol.status == LpStatus::Infeasible) {
    throw DomainError("basis pursuit infeasible: y is not in the range of A");
  }
  if (sol.status != LpStatus::Optimal) {
    throw SolverError("basis pursuit LP: " + std::string(to_string(sol.status)) + " after " +
                      std::to_string(sol.iterations) + " iterations");
  }
  RecoveryResult r = finish(a, y, merge_split(sol.u, n), RecoveryAlgorithm::BP);
  r.dual_infeasibility = sol.dual_residual;
  r.iterations = sol.iterations;
  r.converged = true;
  return r;
}

RecoveryResult solve_bp_admm(const SensingMatrix& a, const Vector& y, double eps,
                             const BpOptions& o) {
  const Matrix& am = a.data();
  const Index m = am.rows(), n = am.cols();
  // (I + A^T A)^{-1} b = b - A^T (I + A A^T)^{-1} A b.
  Matrix k = am * am.transpose();
  k.diagonal().array() += 1.0;
  const Eigen::LLT<Matrix> kfac(k);
  auto solve_z = [&](const Vector& b) { return Vector(b - am.transpose() * kfac.solve(am * b)); };
  auto project_ball = [&](const Vector& v) {
    const Vector d = v - y;
    const double dn = d.norm();
    return dn <= eps ? v : Vector(y + (eps / dn) * d);
  };

  Vector x = Vector::Zero(n), v = project_ball(Vector::Zero(m));
  Vector u1 = Vector::Zero(n), u2 = Vector::Zero(m);
  double rho = o.penalty;
  const double scale = std::max(1.0, inf_norm(y));
  RecoveryResult r;
  int it = 0;
  bool done = false;
  double rp = 0.0, rd = 0.0;
  for (; it < o.max_iter && !done; ++it) {
    const Vector z = solve_z(x - u1 + am.transpose() * (v - u2));
    const Vector az = am * z;
    const Vector x_old = x, v_old = v;
    x = z + u1;
    for (Index i = 0; i < n; ++i) x[i] = soft(x[i], 1.0 / rho);
    v = project_ball(az + u2);
    u1 += z - x;
    u2 += az - v;
    rp = std::max(inf_norm(z - x), inf_norm(az - v));
    rd = rho * inf_norm((x - x_old) + am.transpose() * (v - v_old));
    done = rp <= o.tol * scale && rd <= o.tol * scale;
    // Residual balancing; the scaled duals follow the penalty.
    if (!done && it % 10 == 9) {
      if (rp > 10.0 * rd) {
        rho *= 2.0;
        u1 /= 2.0;
        u2 /= 2.0;
      } else if (rd > 10.0 * rp) {
        rho /= 2.0;
        u1 *= 2.0;
        u2 *= 2.0;
      }
    }
  }
  r = finish(a, y, x, RecoveryAlgorithm::BP);
  r.iterations = it;
  r.dual_infeasibility = rd;
  r.converged = done && r.residual_l2 <= eps + 1e-6;
  if (!r.converged) {
    throw SolverError("basis pursuit ADMM did not converge after " + std::to_string(it) +
                      " iterations (primal " + std::to_string(rp) + ", dual " +
                      std::to_string(rd) + ")");
  }
  return r;
}

}  // namespace

std::string_view to_string(RecoveryAlgorithm a) {
  switch (a) {
    case RecoveryAlgorithm::BP: return "BP";
    case RecoveryAlgorithm::DS: return "DS";
    case RecoveryAlgorithm::Lasso: return "LASSO";
  }
  return "?";
}

std::string_view to_string(RhoSource s) {
  switch (s) {
    case RhoSource::IP: return "IP";
    case RhoSource::SDR: return "SDR";
    case RhoSource::Oracle: return "oracle";
  }
  return "?";
}

RecoveryResult solve_bp(const SensingMatrix& a, const Vector& y, double eps,
                        const BpOptions& options) {
  check_rhs(a, y);
  if (!(eps >= 0) || !std::isfinite(eps)) throw DomainError("eps must be finite and >= 0");
  if (y.norm() <= eps) {
    // Zero is feasible and has zero cost.
    RecoveryResult r = finish(a, y, Vector::Zero(a.cols()), RecoveryAlgorithm::BP);
    r.converged = true;
    return r;
  }
  const double floor = least_squares_residual(a.data(), y);
  if (floor > std::max(eps * (1.0 + 1e-12), 1e-10 * y.norm())) {
    throw DomainError("basis pursuit infeasible: eps " + std::to_string(eps) +
                      " is below the least-squares residual " + std::to_string(floor));
  }
  if (eps == 0.0) return solve_bp_exact(a, y, options.lp);
  return solve_bp_admm(a, y, eps, options);
}

RecoveryResult solve_ds(const SensingMatrix& a, const Vector& y, double lambda_sigma,
                        const LpOptions& options) {
  check_rhs(a, y);
  if (!(lambda_sigma >= 0) || !std::isfinite(lambda_sigma)) {
    throw DomainError("lambda_sigma must be finite and >= 0");
  }
  const Matrix& am = a.data();
  const Index n = am.cols();
  const Vector aty = am.transpose() * y;
  if (inf_norm(aty) <= lambda_sigma) {
    RecoveryResult r = finish(a, y, Vector::Zero(n), RecoveryAlgorithm::DS);
    r.converged = true;
    return r;
  }
  const Matrix gram = am.transpose() * am;
  LpProblem p = split_l1_program(n);
  // -lambda_sigma <= A^T y - G z <= lambda_sigma with z = z+ - z-.
  p.g.resize(2 * n, 2 * n);
  p.g << -gram, gram, gram, -gram;
  p.h.resize(2 * n);
  p.h << Vector::Constant(n, lambda_sigma) - aty, Vector::Constant(n, lambda_sigma) + aty;
  const LpSolution sol = solve_lp(p, options);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError("Dantzig selector LP: " + std::string(to_string(sol.status)) + " after " +
                      std::to_string(sol.iterations) + " iterations");
  }
  RecoveryResult r = finish(a, y, merge_split(sol.u, n), RecoveryAlgorithm::DS);
  r.dual_infeasibility = sol.dual_residual;
  r.iterations = sol.iterations;
  r.converged = inf_norm(am.transpose() * (y - am * r.x_hat)) <= lambda_sigma + 1e-6;
  return r;
}

RecoveryResult solve_lasso(const SensingMatrix& a, const Vector& y, double lambda_sigma,
                           const LassoOptions& options) {
  check_rhs(a, y);
  if (!(lambda_sigma > 0) || !std::isfinite(lambda_sigma)) {
    throw DomainError("lambda_sigma must be finite and > 0");
  }
  const Matrix& am = a.data();
  const Index n = am.cols();
  const Vector col_sq = am.colwise().squaredNorm().transpose();
  Vector z = Vector::Zero(n);
  Vector r = y;
  int sweep = 0;
  bool done = false;
  while (!done && sweep < options.max_sweeps) {
    double change = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = z[j];
      const double zj = soft(am.col(j).dot(r) + col_sq[j] * old, lambda_sigma) / col_sq[j];
      if (zj != old) {
        r.noalias() -= (zj - old) * am.col(j);
        z[j] = zj;
        change = std::max(change, std::abs(zj - old));
      }
    }
    ++sweep;
    if (change <= options.tol) {
      // Confirm against a freshly computed residual before stopping.
      r = y - am * z;
      done = true;
    } else if (sweep % 100 == 0) {
      r = y - am * z;
    }
  }
  if (!done) {
    throw SolverError("LASSO coordinate descent did not converge in " +
                      std::to_string(options.max_sweeps) + " sweeps");
  }
  RecoveryResult out = finish(a, y, z, RecoveryAlgorithm::Lasso);
  out.objective = 0.5 * r.squaredNorm() + lambda_sigma * z.lpNorm<1>();
  out.dual_infeasibility = std::max(inf_norm(am.transpose() * r) - lambda_sigma, 0.0);
  out.iterations = sweep;
  out.converged = out.dual_infeasibility <= 1e-7;
  return out;
}

double lasso_sparsity_level(Index k, double kappa) {
  if (!(kappa > 0 && kappa < 1)) throw DomainError("kappa must lie in (0, 1)");
  return 4.0 * static_cast<double>(k) / ((1.0 - kappa) * (1.0 - kappa));
}

BoundReport evaluate_bounds(const BoundInputs& in) {
  if (in.k < 1) throw DomainError("k must be at least 1");
  if (!(in.eps >= 0) || !(in.lambda_sigma >= 0)) {
    throw DomainError("eps and lambda_sigma must be >= 0");
  }
  if (!(in.kappa > 0 && in.kappa < 1)) throw DomainError("kappa must lie in (0, 1)");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double sk = std::sqrt(static_cast<double>(in.k));
  BoundReport b;
  b.k = in.k;
  b.rho_source = in.rho_source;
  b.certified = in.rho_source == RhoSource::SDR;
  if (in.rho_4k > 0) {
    b.bound_bp = 2.0 * in.eps / in.rho_4k;
    b.bound_ds = 4.0 * sk * in.lambda_sigma / (in.rho_4k * in.rho_4k);
  } else {
    b.bound_bp = b.bound_ds = kInf;
    b.flags.emplace_back("rho_4k is not positive; BP and DS bounds are infinite");
  }
  if (in.rho_lasso > 0) {
    b.bound_lasso = (1.0 + in.kappa) / (1.0 - in.kappa) * 2.0 * sk * in.lambda_sigma /
                    (in.rho_lasso * in.rho_lasso);
  } else {
    b.bound_lasso = kInf;
    b.flags.emplace_back("LASSO rho is not positive; LASSO bound is infinite");
  }
  if (!b.certified) b.flags.emplace_back("rho is an estimate, bounds are not certified");

  if (in.delta_2k) {
    const double d2 = *in.delta_2k;
    if (d2 < std::numbers::sqrt2 - 1.0) {
      b.ric_bound_bp = 4.0 * std::sqrt(1.0 + d2) / (1.0 - (1.0 + std::numbers::sqrt2) * d2) * in.eps;
    } else {
      b.flags.emplace_back("delta_2k >= sqrt(2) - 1; RIC bound for BP not available");
    }
    if (in.delta_3k) {
      const double d3 = *in.delta_3k;
      if (d2 + d3 < 1.0) {
        b.ric_bound_ds = 4.0 * sk / (1.0 - d2 - d3) * in.lambda_sigma;
      } else {
        b.flags.emplace_back("delta_2k + delta_3k >= 1; RIC bound for DS not available");
      }
    }
  }
  return b;
}

NoiseEvent check_noise_event(const SensingMatrix& a, const Vector& w, double lambda_n,
                             double sigma) {
  if (w.size() != a.rows()) throw DomainError("noise length does not match the row count");
  NoiseEvent e;
  e.lhs = inf_norm(a.data().transpose() * w);
  e.holds = e.lhs <= lambda_n * sigma;
  return e;
}

double noise_lambda(Index n, double t) {
  if (n < 2) throw DomainError("noise_lambda needs n >= 2");
  return std::sqrt(2.0 * (1.0 + t) * std::log(static_cast<double>(n)));
}

double noise_event_probability_bound(Index n, double t) {
  if (n < 2) throw DomainError("the probability bound needs n >= 2");
  const double ln = std::log(static_cast<double>(n));
  return 1.0 - 1.0 / (std::sqrt(std::numbers::pi * (1.0 + t) * ln) *
                      std::pow(static_cast<double>(n), t));
}

NoiseEventStudy noise_event_frequency(const SensingMatrix& a, double lambda_n, double sigma,
                                      int draws, std::uint64_t seed, Exec exec) {
  if (draws < 1) throw DomainError("draws must be at least 1");
  if (!(sigma > 0)) throw DomainError("sigma must be positive");
  const Index m = a.rows();
  const auto hit = map_indices<char>(draws, exec, [&](std::ptrdiff_t i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    Vector w(m);
    for (Index j = 0; j < m; ++j) w[j] = sigma * rng.normal();
    return static_cast<char>(check_noise_event(a, w, lambda_n, sigma).holds);
  });
  NoiseEventStudy s;
  s.draws = draws;
  s.hits = static_cast<int>(std::count(hit.begin(), hit.end(), 1));
  s.frequency = static_cast<double>(s.hits) / draws;
  s.standard_error = std::sqrt(s.frequency * (1.0 - s.frequency) / draws);
  return s;
}

ErrorSparsity check_error_vector_sparsity(const Vector& x_true, const RecoveryResult& result,
                                          double kappa) {
  if (x_true.size() != result.x_hat.size()) throw DomainError("signal lengths differ");
  const Index k = l0_sparsity(x_true);
  ErrorSparsity e;
  e.limit = result.algorithm == RecoveryAlgorithm::Lasso ? lasso_sparsity_level(k, kappa)
                                                         : 4.0 * static_cast<double>(k);
  const Vector h = result.x_hat - x_true;
  if (h.lpNorm<Eigen::Infinity>() == 0.0) return e;
  e.s_h = l1_sparsity_level(h);
  // The solvers meet ||x_hat||_1 <= ||x||_1 only to their tolerance, so an
  // error vector at that scale has no meaningful direction.
  if (h.lpNorm<1>() <= kErrorResolution * std::max(1.0, x_true.lpNorm<1>())) return e;
  // Relative slack for rounding in solver output.
  e.holds = e.s_h <= e.limit * (1.0 + 1e-9);
  return e;
}

}  // namespace sparsecert
