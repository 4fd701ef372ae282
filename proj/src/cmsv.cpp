#include "sparsecert/cmsv.hpp"

#include "sparsecert/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sparsecert {
namespace {

void check_s(double s, Index n) {
  if (!(s >= 1.0) || !(s <= static_cast<double>(n)) || !std::isfinite(s)) {
    throw DomainError("s must lie in [1, n], got " + std::to_string(s));
  }
}

double spectral_norm_psd(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

Vector unit_sphere_sample(Index n, Rng& rng) {
  Vector v(n);
  do {
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  } while (v.squaredNorm() == 0.0);
  return v.normalized();
}

// One restart of the split program, with M already scaled to unit norm.
// Penalty/barrier continuation on
//   phi(x) = z'Mz + lam c + rho/2 c^2 - mu (sum log x + log(r - sum x)),
// z = p - q, c = z'z - 1, solved by modified Newton with Armijo backtracking.
struct Restart {
  Vector z;
  double kkt = std::numeric_limits<double>::infinity();
};

class SplitProgram {
 public:
  SplitProgram(const Matrix& m, double radius, const CmsvIpOptions& o)
      : m_(m), n_(m.rows()), r_(radius), o_(o) {}

  Restart run(const Vector& z0) const {
    constexpr double kMaxPenalty = 1e4;
    // Split the start, lift both parts off zero, and place it strictly
    // inside the l1 ball.
    Vector x(2 * n_);
    const double lift = 1e-2 / static_cast<double>(n_);
    for (Index i = 0; i < n_; ++i) {
      x[i] = std::max(z0[i], 0.0) + lift;
      x[n_ + i] = std::max(-z0[i], 0.0) + lift;
    }
    x *= 0.9 * r_ / x.sum();

    double lam = 0.0, rho = o_.initial_penalty, mu = o_.initial_barrier;
    double grad_norm = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < o_.outer_iterations; ++outer) {
      grad_norm = minimize(x, lam, rho, mu);
      const Vector z = x.head(n_) - x.tail(n_);
      lam += rho * (z.squaredNorm() - 1.0);
      if (outer + 1 < o_.outer_iterations) {
        // The multiplier update drives feasibility; past a moderate penalty
        // more weight only ill-conditions the Newton systems.
        rho = std::min(10.0 * rho, kMaxPenalty);
        mu /= 10.0;
      }
    }
    Restart out;
    out.z = x.head(n_) - x.tail(n_);
    const double c = std::abs(out.z.squaredNorm() - 1.0);
    out.kkt = std::max({grad_norm, c, mu});
    return out;
  }

 private:
  double value(const Vector& x, double lam, double rho, double mu) const {
    const double slack = r_ - x.sum();
    if (!(slack > 0) || !(x.minCoeff() > 0)) return std::numeric_limits<double>::infinity();
    const Vector z = x.head(n_) - x.tail(n_);
    const double c = z.squaredNorm() - 1.0;
    return z.dot(m_ * z) + lam * c + 0.5 * rho * c * c -
           mu * (x.array().log().sum() + std::log(slack));
  }

  Vector gradient(const Vector& x, double lam, double rho, double mu) const {
    const double slack = r_ - x.sum();
    const Vector z = x.head(n_) - x.tail(n_);
    const double c = z.squaredNorm() - 1.0;
    const Vector gz = 2.0 * (m_ * z) + 2.0 * (lam + rho * c) * z;
    Vector g(2 * n_);
    g.head(n_) = gz;
    g.tail(n_) = -gz;
    g -= mu * x.cwiseInverse();
    g.array() += mu / slack;
    return g;
  }

  // Returns the final gradient infinity norm.
  double minimize(Vector& x, double lam, double rho, double mu) const {
    constexpr double kGradTol = 1e-11;
    double gnorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < o_.max_newton; ++it) {
      const Vector g = gradient(x, lam, rho, mu);
      gnorm = g.lpNorm<Eigen::Infinity>();
      if (gnorm <= kGradTol) break;

      const double slack = r_ - x.sum();
      const Vector z = x.head(n_) - x.tail(n_);
      const double c = z.squaredNorm() - 1.0;
      Matrix hz = 2.0 * m_ + 4.0 * rho * z * z.transpose();
      hz.diagonal().array() += 2.0 * (lam + rho * c);
      Matrix h(2 * n_, 2 * n_);
      h.topLeftCorner(n_, n_) = hz;
      h.bottomRightCorner(n_, n_) = hz;
      h.topRightCorner(n_, n_) = -hz;
      h.bottomLeftCorner(n_, n_) = -hz;
      h.diagonal() += mu * x.cwiseInverse().cwiseAbs2();
      h.array() += mu / (slack * slack);

      // Hessian modification: shift until positive definite.
      Eigen::LLT<Matrix> llt(h);
      double shift = 1e-10 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
      while (llt.info() != Eigen::Success) {
        Matrix hs = h;
        hs.diagonal().array() += shift;
        llt.compute(hs);
        shift *= 10.0;
      }
      const Vector dx = -llt.solve(g);
      const double slope = g.dot(dx);

      double alpha = 1.0;
      for (Index i = 0; i < x.size(); ++i) {
        if (dx[i] < 0) alpha = std::min(alpha, -0.99 * x[i] / dx[i]);
      }
      const double dsum = dx.sum();
      if (dsum > 0) alpha = std::min(alpha, 0.99 * slack / dsum);

      const double f0 = value(x, lam, rho, mu);
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const Vector xt = x + alpha * dx;
        const double ft = value(xt, lam, rho, mu);
        if (!std::isfinite(ft)) continue;
        // Once decreases fall below rounding in phi, accept steps that
        // still shrink the gradient.
        if (ft <= f0 + 1e-4 * alpha * slope ||
            gradient(xt, lam, rho, mu).lpNorm<Eigen::Infinity>() < 0.5 * gnorm) {
          x = xt;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    return gnorm;
  }

  const Matrix& m_;
  Index n_;
  double r_;
  const CmsvIpOptions& o_;
};

}  // namespace

CmsvEstimate compute_cmsv_ip(const SensingMatrix& a, double s, const CmsvIpOptions& options) {
  const Index n = a.cols();
  check_s(s, n);
  if (options.restarts < 1) throw DomainError("restarts must be at least 1");
  const Matrix m = a.data().transpose() * a.data();

  CmsvEstimate est;
  est.s = s;
  est.restarts = options.restarts;
  est.per_restart_values.resize(options.restarts);
  est.per_restart_kkt.resize(options.restarts);
  est.converged_flags.assign(static_cast<std::size_t>(options.restarts), false);

  const double scale = std::max(spectral_norm_psd(m), std::numeric_limits<double>::min());
  const Matrix m_scaled = m / scale;
  const double radius = std::sqrt(s);
  const SplitProgram program(m_scaled, radius, options);

  std::vector<Vector> points(static_cast<std::size_t>(options.restarts));
  for_each_index(options.restarts, options.exec, [&](std::ptrdiff_t i) {
    Rng rng(options.seed, static_cast<std::uint64_t>(i));
    const Vector z0 = unit_sphere_sample(n, rng);
    Vector z;
    double kkt;
    if (s == 1.0) {
      // Only the signed unit vectors are feasible, so the program is finite:
      // scan them all.
      Index j;
      m.diagonal().minCoeff(&j);
      z = Vector::Zero(n);
      z[j] = 1.0;
      kkt = 0.0;
    } else {
      const Restart r = program.run(z0);
      z = r.z;
      kkt = r.kkt;
    }
    const double nz = z.norm();
    bool ok = nz > 0 && std::isfinite(kkt) && kkt <= options.kkt_tol;
    if (nz > 0) z /= nz;
    ok = ok && z.lpNorm<1>() <= radius + 1e-6;
    est.per_restart_values[i] = nz > 0 ? z.dot(m * z) : std::numeric_limits<double>::infinity();
    est.per_restart_kkt[i] = kkt;
    est.converged_flags[static_cast<std::size_t>(i)] = ok;
    points[static_cast<std::size_t>(i)] = z;
  });

  double best = std::numeric_limits<double>::infinity();
  Index best_i = -1;
  for (Index i = 0; i < options.restarts; ++i) {
    if (est.converged_flags[static_cast<std::size_t>(i)] && est.per_restart_values[i] < best) {
      best = est.per_restart_values[i];
      best_i = i;
    }
  }
  if (best_i < 0) {
    std::string msg = "no IP restart converged (KKT residuals:";
    for (Index i = 0; i < std::min<Index>(options.restarts, 8); ++i) {
      msg += " " + std::to_string(est.per_restart_kkt[i]);
    }
    throw SolverError(msg + (options.restarts > 8 ? " ...)" : ")"));
  }
  est.objective_upper = std::max(best, 0.0);
  est.rho_upper = std::sqrt(est.objective_upper);
  est.minimizer = points[static_cast<std::size_t>(best_i)];
  return est;
}

namespace {

// Weak duality with a budget multiplier U: for tr Z = 1 and ||Z||_1 <= s,
// <M, Z> >= lambda_min(M - a U) - s a max|U_ij| for every a >= 0. Valid for
// any U, so it does not depend on how well the barrier path was followed; the
// best a (concave in a) is found by golden section, a = 0 and 1 included.
double sdr_certificate(const Matrix& m, const Matrix& u, double s) {
  const double umax = u.cwiseAbs().maxCoeff();
  auto g = [&](double a) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(m - a * u, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() -
           s * a * umax;
  };
  double best = std::max(g(0.0), g(1.0));
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 2.0;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 40; ++it) {
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + r * (hi - lo);
      g2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - r * (hi - lo);
      g1 = g(x1);
    }
  }
  return std::max({best, g1, g2});
}

}  // namespace

CmsvEstimate cmsv_lower_sdr(const SensingMatrix& a, double s, const CmsvSdrOptions& options) {
  const Index n = a.cols();
  check_s(s, n);
  const Matrix m = a.data().transpose() * a.data();
  CmsvEstimate est;
  est.s = s;
  if (s == 1.0) {
    // ||Z||_1 <= 1 = tr Z forces Z to be diagonal: the relaxation is exact.
    est.objective_lower = m.diagonal().minCoeff();
    est.relaxation_value = est.objective_lower;
  } else {
    SdpProblem p;
    p.cost = m;
    p.eq_matrices = {Matrix::Identity(n, n)};
    p.eq_rhs = Vector::Ones(1);
    p.l1_budget = s;
    const SdpSolution sol = solve_sdp(p, options.sdp);
    if (!std::isfinite(sol.gap)) {
      throw SolverError("SDR program: " + std::string(to_string(sol.status)) + " after " +
                        std::to_string(sol.iterations) + " Newton steps");
    }
    est.objective_lower = std::min(sdr_certificate(m, sol.l1_dual, s), sol.objective);
    est.relaxation_value = sol.objective;
  }
  est.rho_lower = std::sqrt(std::max(est.objective_lower, 0.0));
  return est;
}

Vector project_unit_l1(const Vector& u, double radius) {
  if (!(radius >= 1.0)) throw DomainError("l1 radius must be at least 1");
  const Index n = u.size();
  const double unorm = u.norm();
  Index jmax;
  const double umax = u.cwiseAbs().maxCoeff(&jmax);
  Vector spike = Vector::Zero(n);
  spike[jmax] = u[jmax] < 0 ? -1.0 : 1.0;
  if (unorm == 0.0) return spike;
  Vector x = u / unorm;
  if (x.lpNorm<1>() <= radius) return x;

  auto shrink = [&](double delta) {
    Vector v = u;
    for (Index i = 0; i < n; ++i) {
      const double mag = std::max(std::abs(u[i]) - delta, 0.0);
      v[i] = u[i] < 0 ? -mag : mag;
    }
    return v;
  };
  double lo = 0.0, hi = umax;
  Vector best = spike;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * umax; ++it) {
    const double mid = 0.5 * (lo + hi);
    Vector v = shrink(mid);
    const double vn = v.norm();
    if (vn == 0.0) {
      hi = mid;
      continue;
    }
    v /= vn;
    if (v.lpNorm<1>() <= radius) {
      best = v;
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return best;
}

double cmsv_oracle(const SensingMatrix& a, double s, const CmsvOracleOptions& options) {
  const Index n = a.cols();
  if (n > options.max_n) {
    throw SizeGuardError("CMSV oracle limited to n <= " + std::to_string(options.max_n));
  }
  check_s(s, n);
  if (options.samples < 1) throw DomainError("samples must be at least 1");
  const Matrix& amat = a.data();
  const Matrix m = amat.transpose() * amat;
  const double lip = 2.0 * std::max(spectral_norm_psd(m), 1e-300);
  const double radius = std::sqrt(s);

  const auto values = map_indices<double>(options.samples, options.exec, [&](std::ptrdiff_t i) {
    Rng rng(options.seed, static_cast<std::uint64_t>(i));
    Vector x = project_unit_l1(unit_sphere_sample(n, rng), radius);
    double best = (amat * x).squaredNorm();
    for (int step = 0; step < options.descent_steps; ++step) {
      const Vector next = project_unit_l1(x - (2.0 / lip) * (m * x), radius);
      const double v = (amat * next).squaredNorm();
      best = std::min(best, v);
      if ((next - x).norm() <= 1e-14) break;
      x = next;
    }
    return best;
  });
  return std::sqrt(std::max(*std::min_element(values.begin(), values.end()), 0.0));
}

RicEstimate ric_exact(const SensingMatrix& a, Index k, Exec exec, double max_supports) {
  const Index n = a.cols();
  if (k < 1 || k > n) throw DomainError("k must lie in [1, n], got " + std::to_string(k));
  double count = 1.0;
  for (Index i = 0; i < k; ++i) count = count * static_cast<double>(n - i) / static_cast<double>(i + 1);
  if (count > max_supports) {
    throw SizeGuardError("C(n, k) = " + std::to_string(count) + " supports exceeds the limit " +
                         std::to_string(max_supports));
  }
  std::vector<std::vector<Index>> supports;
  supports.reserve(static_cast<std::size_t>(count));
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    supports.push_back(idx);
    Index pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  const Matrix& amat = a.data();
  const auto deltas = map_indices<double>(static_cast<std::ptrdiff_t>(supports.size()), exec,
                                          [&](std::ptrdiff_t t) {
    const auto& sup = supports[static_cast<std::size_t>(t)];
    Matrix sub(amat.rows(), k);
    for (Index j = 0; j < k; ++j) sub.col(j) = amat.col(sup[static_cast<std::size_t>(j)]);
    const Matrix gram = sub.transpose() * sub;
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues();
    return std::max(ev[k - 1] - 1.0, 1.0 - ev[0]);
  });
  RicEstimate r;
  r.k = k;
  const auto worst = std::max_element(deltas.begin(), deltas.end());
  r.delta_k = std::max(*worst, 0.0);
  r.worst_support = supports[static_cast<std::size_t>(worst - deltas.begin())];
  return r;
}

}  // namespace sparsecert
