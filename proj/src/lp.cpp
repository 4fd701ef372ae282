#include "sparsecert/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace sparsecert {
namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Largest alpha with x + alpha * dx >= 0, restricted to `mask` (capped at 1e30).
double max_step(const Vector& x, const Vector& dx, const std::vector<bool>* mask = nullptr) {
  double alpha = 1e30;
  for (Index i = 0; i < x.size(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
    if (dx[i] < 0) alpha = std::min(alpha, -x[i] / dx[i]);
  }
  return alpha;
}

// Dense Cholesky that replaces tiny or negative pivots by a huge value, which
// zeroes the corresponding solution component. At degenerate optima the
// normal matrix is singular to working precision, and this is the standard
// remedy that keeps interior-point steps usable there.
class PivotCholesky {
 public:
  void compute(Matrix k) {
    const Index n = k.rows();
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (n > 0 ? k.diagonal().cwiseAbs().maxCoeff() : 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j > 0) {
        k.col(j).tail(n - j).noalias() -=
            k.block(j, 0, n - j, j) * k.row(j).head(j).transpose();
      }
      double pivot = k(j, j);
      if (!(pivot > floor)) {
        k(j, j) = 1e64;
        k.col(j).tail(n - j - 1).setZero();
        continue;
      }
      pivot = std::sqrt(pivot);
      k(j, j) = pivot;
      k.col(j).tail(n - j - 1) /= pivot;
    }
    l_ = k.triangularView<Eigen::Lower>();
  }

  Vector solve(const Vector& b) const {
    Vector x = l_.triangularView<Eigen::Lower>().solve(b);
    l_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

 private:
  Matrix l_;
};

// Reduced Newton system
//   [ H   A^T ] [du]   [r1]
//   [ A   0   ] [dy] = [r2],   H = diag(d_u) + G^T diag(d_g) G.
//
// When every variable carries a sign bound, the G block is folded back in as
// extra rows, giving the usual normal equations
//   K = [A; G] D^{-1} [A; G]^T + diag(0, 1/d_g).
// Applying H^{-1} by Woodbury instead cancels catastrophically once D spans
// many orders of magnitude near the optimum. With free variables H is formed
// and factored densely.
class ReducedSystem {
 public:
  ReducedSystem(const Matrix& a, const Matrix& g) : a_(a), g_(g) {}

  void factor(const Vector& d_u, const Vector& d_g) {
    const Index p = a_.rows(), q = g_.rows();
    normal_ = d_u.size() > 0 && d_u.minCoeff() > 0.0;
    if (normal_) {
      d_u_ = d_u;
      d_g_inv_ = d_g.cwiseInverse();
      dinv_ = d_u.cwiseInverse();
      Matrix stacked(p + q, d_u.size());
      if (p > 0) stacked.topRows(p) = a_;
      if (q > 0) stacked.bottomRows(q) = g_;
      Matrix k = stacked * dinv_.asDiagonal() * stacked.transpose();
      if (q > 0) k.diagonal().tail(q) += d_g_inv_;
      // No regularization: on degenerate optima the nonbasic contributions
      // sit many orders below the largest diagonal entry and carry the
      // information the step needs.
      k_chol_.compute(std::move(k));
      return;
    }
    Matrix hmat = g_.transpose() * d_g.asDiagonal() * g_;
    hmat.diagonal() += d_u;
    const double scale = std::max(1.0, hmat.diagonal().maxCoeff());
    double shift = 1e-13 * scale;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Matrix reg_h = hmat;
      reg_h.diagonal().array() += shift;
      h_llt_.compute(reg_h);
      if (h_llt_.info() == Eigen::Success) break;
      shift *= 100.0;
    }
    if (p > 0) {
      h_inv_at_ = h_llt_.solve(a_.transpose());
      Matrix m = a_ * h_inv_at_;
      const double mscale = std::max(1.0, m.diagonal().maxCoeff());
      m.diagonal().array() += 1e-14 * mscale;
      m_ldlt_.compute(m);
    }
  }

  // On the normal-equation path `w` receives diag(d_g) G du, which is far
  // more accurate than forming it from du when slacks are tiny; otherwise it
  // is left empty.
  void solve(const Vector& r1, const Vector& r2, Vector& du, Vector& dy, Vector& w) const {
    const Index p = a_.rows(), q = g_.rows();
    w.resize(0);
    if (normal_) {
      // Unknowns (dy, w) with w = diag(d_g) G du, i.e. the block system
      //   D du + A^T dy + G^T w = r1,  A du = r2,  G du - w / d_g = r3.
      // A few rounds of refinement against that system keep A du = r2 exact
      // to working precision even when D^{-1} is huge on basic variables.
      const Vector r3 = Vector::Zero(q);
      normal_solve(r1, r2, r3, du, dy, w);
      double err = 0.0;
      for (int round = 0; round < 2; ++round) {
        Vector e1, e2, e3;
        err = block_residual(r1, r2, r3, du, dy, w, e1, e2, e3);
        Vector cu, cy, cw;
        normal_solve(e1, e2, e3, cu, cy, cw);
        du += cu;
        dy += cy;
        w += cw;
      }
      Vector e1, e2, e3;
      err = block_residual(r1, r2, r3, du, dy, w, e1, e2, e3);
      if (err > 1e-9) augmented_solve(r1, r2, r3, du, dy, w);
      return;
    }
    if (p == 0) {
      du = h_llt_.solve(r1);
      dy.resize(0);
      return;
    }
    const Vector h_r1 = h_llt_.solve(r1);
    dy = m_ldlt_.solve(a_ * h_r1 - r2);
    du = h_r1 - h_inv_at_ * dy;
  }

 private:
  // Relative residual of the block system; fills the residual blocks.
  double block_residual(const Vector& r1, const Vector& r2, const Vector& r3, const Vector& du,
                        const Vector& dy, const Vector& w, Vector& e1, Vector& e2,
                        Vector& e3) const {
    const Index p = a_.rows(), q = g_.rows();
    e1 = r1 - d_u_.cwiseProduct(du);
    if (p > 0) e1 -= a_.transpose() * dy;
    if (q > 0) e1 -= g_.transpose() * w;
    e2 = p > 0 ? Vector(r2 - a_ * du) : Vector(0);
    e3 = q > 0 ? Vector(r3 - (g_ * du - d_g_inv_.cwiseProduct(w))) : Vector(0);
    // Each block is measured against the size of the terms it balances.
    const double s1 = 1.0 + std::max(inf_norm(r1), inf_norm(d_u_.cwiseProduct(du)));
    const double s2 = 1.0 + std::max(inf_norm(r2), p > 0 ? inf_norm(a_ * du) : 0.0);
    const double s3 = 1.0 + std::max(q > 0 ? inf_norm(g_ * du) : 0.0,
                                     q > 0 ? inf_norm(d_g_inv_.cwiseProduct(w)) : 0.0);
    return std::max({inf_norm(e1) / s1, inf_norm(e2) / s2, inf_norm(e3) / s3});
  }

  // Fallback: the full symmetric indefinite block system by pivoted LU.
  // About (d + p + q)^3 work, so it only runs when the normal equations have
  // lost the small-scale information near a degenerate optimum.
  void augmented_solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& du,
                       Vector& dy, Vector& w) const {
    const Index d = d_u_.size(), p = a_.rows(), q = g_.rows();
    const Index nt = d + p + q;
    Matrix kkt = Matrix::Zero(nt, nt);
    kkt.topLeftCorner(d, d).diagonal() = d_u_;
    if (p > 0) {
      kkt.block(0, d, d, p) = a_.transpose();
      kkt.block(d, 0, p, d) = a_;
    }
    if (q > 0) {
      kkt.block(0, d + p, d, q) = g_.transpose();
      kkt.block(d + p, 0, q, d) = g_;
      kkt.bottomRightCorner(q, q).diagonal() = -d_g_inv_;
    }
    Vector rhs(nt);
    rhs << r1, r2, r3;
    const Eigen::PartialPivLU<Matrix> lu(kkt);
    Vector sol = lu.solve(rhs);
    // One refinement step against the same matrix.
    sol += lu.solve(rhs - kkt * sol);
    if (!sol.allFinite()) return;
    du = sol.head(d);
    dy = sol.segment(d, p);
    w = sol.tail(q);
  }

  void normal_solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& du, Vector& dy,
                    Vector& w) const {
    const Index p = a_.rows(), q = g_.rows();
    const Vector dr1 = dinv_.cwiseProduct(r1);
    Vector rhs(p + q);
    if (p > 0) rhs.head(p) = a_ * dr1 - r2;
    if (q > 0) rhs.tail(q) = g_ * dr1 - r3;
    const Vector sol = p + q > 0 ? Vector(k_chol_.solve(rhs)) : Vector(0);
    dy = sol.head(p);
    w = sol.tail(q);
    Vector back = r1;
    if (p > 0) back -= a_.transpose() * dy;
    if (q > 0) back -= g_.transpose() * w;
    du = dinv_.cwiseProduct(back);
  }

  const Matrix& a_;
  const Matrix& g_;
  bool normal_ = false;
  Vector d_u_;
  Vector d_g_inv_;
  Vector dinv_;
  PivotCholesky k_chol_;
  Eigen::LLT<Matrix> h_llt_;
  Matrix h_inv_at_;
  Eigen::LDLT<Matrix> m_ldlt_;
};

}  // namespace

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

void LpProblem::validate() const {
  const Index d = c.size();
  if (d == 0) throw DomainError("LP has no variables");
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != d)) {
    throw DomainError("LP equality block has inconsistent dimensions");
  }
  if (g.rows() != h.size() || (g.rows() > 0 && g.cols() != d)) {
    throw DomainError("LP inequality block has inconsistent dimensions");
  }
  if (!nonnegative.empty() && static_cast<Index>(nonnegative.size()) != d) {
    throw DomainError("LP sign-bound mask has wrong length");
  }
  if (!c.allFinite() || !a_eq.allFinite() || !b_eq.allFinite() || !g.allFinite() ||
      !h.allFinite()) {
    throw DomainError("LP data has non-finite entries");
  }
}

double LpSolution::dual_objective(const LpProblem& p) const {
  double v = 0.0;
  if (p.b_eq.size() > 0) v -= p.b_eq.dot(dual_eq);
  if (p.h.size() > 0) v -= p.h.dot(dual_ineq);
  return v;
}

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  problem.validate();
  if (!(options.tol > 0)) throw DomainError("LP tolerance must be positive");

  const Index d = problem.num_vars();
  const Index p = problem.a_eq.rows();
  const Index q = problem.g.rows();
  // Rows are equilibrated to unit infinity norm; duals are mapped back on exit.
  auto row_scales = [](const Matrix& m) {
    Vector r = Vector::Ones(m.rows());
    for (Index i = 0; i < m.rows(); ++i) {
      const double nrm = m.row(i).lpNorm<Eigen::Infinity>();
      if (nrm > 0) r[i] = 1.0 / nrm;
    }
    return r;
  };
  const Vector a_scale = row_scales(problem.a_eq);
  const Vector g_scale = row_scales(problem.g);
  const Matrix a = p > 0 ? Matrix(a_scale.asDiagonal() * problem.a_eq) : Matrix(0, d);
  const Matrix g = q > 0 ? Matrix(g_scale.asDiagonal() * problem.g) : Matrix(0, d);
  const Vector b = p > 0 ? Vector(a_scale.cwiseProduct(problem.b_eq)) : Vector(0);
  const Vector h = q > 0 ? Vector(g_scale.cwiseProduct(problem.h)) : Vector(0);
  const Vector& c = problem.c;

  std::vector<bool> bounded = problem.nonnegative;
  if (bounded.empty()) bounded.assign(static_cast<std::size_t>(d), false);
  Vector bmask(d);
  Index nb = 0;
  for (Index j = 0; j < d; ++j) {
    bmask[j] = bounded[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    nb += bounded[static_cast<std::size_t>(j)] ? 1 : 0;
  }
  const double ncomp = static_cast<double>(q + nb);

  // Start: free variables at 0, bounded ones at 1; slacks shifted into the
  // interior; all inequality duals at 1.
  Vector u = bmask;
  Vector s = (q > 0) ? Vector(h - g * u) : Vector(0);
  for (Index i = 0; i < q; ++i) s[i] = std::max(s[i], 1.0);
  Vector y = Vector::Zero(p);
  Vector lam = Vector::Ones(q);
  Vector zeta = bmask;

  const double b_scale = 1.0 + inf_norm(b);
  const double h_scale = 1.0 + inf_norm(h);
  const double c_scale = 1.0 + inf_norm(c);

  LpSolution best;
  double best_merit = std::numeric_limits<double>::infinity();
  ReducedSystem sys(a, g);

  auto record = [&](int iter, LpStatus status, double pres, double dres, double gap) {
    LpSolution sol;
    sol.u = u;
    sol.objective = c.dot(u);
    sol.dual_eq = a_scale.cwiseProduct(y);
    sol.dual_ineq = g_scale.cwiseProduct(lam);
    sol.dual_bound = zeta;
    sol.gap = gap;
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.iterations = iter;
    sol.status = status;
    return sol;
  };

  for (int iter = 0;; ++iter) {
    const Vector r_d = c + a.transpose() * y + g.transpose() * lam - zeta;
    const Vector r_p = a * u - b;
    const Vector r_g = (q > 0) ? Vector(g * u + s - h) : Vector(0);
    const double comp_u = zeta.dot(u.cwiseProduct(bmask));
    const double gap = (q > 0 ? lam.dot(s) : 0.0) + comp_u;
    const double mu = ncomp > 0 ? gap / ncomp : 0.0;

    const double pres = std::max(inf_norm(r_p) / b_scale, inf_norm(r_g) / h_scale);
    const double dres = inf_norm(r_d) / c_scale;
    const double pobj = c.dot(u);
    const double rel_gap = gap / (1.0 + std::abs(pobj));

    const double merit = std::max({pres, dres, rel_gap});
    if (merit < best_merit) {
      best_merit = merit;
      best = record(iter, LpStatus::MaxIter, pres, dres, gap);
    }
    if (pres <= options.tol && dres <= options.tol && rel_gap <= options.tol) {
      return record(iter, LpStatus::Optimal, pres, dres, gap);
    }
    const double primal_size = std::max(inf_norm(u), inf_norm(s));
    const double dual_size = std::max({inf_norm(y), inf_norm(lam), inf_norm(zeta)});
    if (dual_size > 1e12 && dual_size > 1e6 * (1.0 + primal_size)) {
      return record(iter, LpStatus::Infeasible, pres, dres, gap);
    }
    if (primal_size > 1e12 && primal_size > 1e6 * (1.0 + dual_size)) {
      return record(iter, LpStatus::Unbounded, pres, dres, gap);
    }
    if (iter >= options.max_iter) {
      best.iterations = iter;
      return best;
    }

    // Diagonal scalings of the reduced system.
    Vector d_u = Vector::Zero(d);
    for (Index j = 0; j < d; ++j) {
      if (bmask[j] > 0) d_u[j] = zeta[j] / u[j];
    }
    const Vector d_g = (q > 0) ? Vector(lam.cwiseQuotient(s)) : Vector(0);
    sys.factor(d_u, d_g);

    // Solves for a full step given complementarity residuals r_s, r_u.
    auto newton = [&](const Vector& r_s, const Vector& r_u, Vector& du, Vector& dy, Vector& ds,
                      Vector& dlam, Vector& dzeta) {
      Vector r1 = -r_d;
      if (q > 0) r1 -= g.transpose() * (lam.cwiseProduct(r_g) - r_s).cwiseQuotient(s);
      for (Index j = 0; j < d; ++j) {
        if (bmask[j] > 0) r1[j] -= r_u[j] / u[j];
      }
      Vector w;
      sys.solve(r1, -r_p, du, dy, w);
      if (q > 0) {
        const Vector gdu = g * du;
        ds = -r_g - gdu;
        if (w.size() == q) {
          dlam = (lam.cwiseProduct(r_g) - r_s).cwiseQuotient(s) + w;
        } else {
          dlam = (-r_s + lam.cwiseProduct(r_g) + lam.cwiseProduct(gdu)).cwiseQuotient(s);
        }
      } else {
        ds.resize(0);
        dlam.resize(0);
      }
      dzeta = Vector::Zero(d);
      for (Index j = 0; j < d; ++j) {
        if (bmask[j] > 0) dzeta[j] = (-r_u[j] - zeta[j] * du[j]) / u[j];
      }
    };

    auto step_lengths = [&](const Vector& du, const Vector& ds, const Vector& dlam,
                            const Vector& dzeta, double& ap, double& ad) {
      ap = std::min(max_step(u, du, &bounded), q > 0 ? max_step(s, ds) : 1.0);
      ad = std::min(max_step(zeta, dzeta, &bounded), q > 0 ? max_step(lam, dlam) : 1.0);
    };

    // Predictor (affine scaling).
    Vector du, dy, ds, dlam, dzeta;
    Vector r_s = (q > 0) ? Vector(lam.cwiseProduct(s)) : Vector(0);
    Vector r_u = zeta.cwiseProduct(u).cwiseProduct(bmask);
    newton(r_s, r_u, du, dy, ds, dlam, dzeta);
    double ap, ad;
    step_lengths(du, ds, dlam, dzeta, ap, ad);
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);

    double sigma = 0.0;
    if (ncomp > 0) {
      double gap_aff = 0.0;
      if (q > 0) gap_aff += (s + ap * ds).dot(lam + ad * dlam);
      gap_aff += (u + ap * du).cwiseProduct(bmask).dot(zeta + ad * dzeta);
      const double ratio = std::max(0.0, gap_aff) / std::max(gap, 1e-300);
      sigma = std::clamp(ratio * ratio * ratio, 0.0, 1.0);
    }

    // Corrector with centering.
    if (q > 0) r_s += ds.cwiseProduct(dlam) - Vector::Constant(q, sigma * mu);
    r_u += (du.cwiseProduct(dzeta) - Vector::Constant(d, sigma * mu)).cwiseProduct(bmask);
    newton(r_s, r_u, du, dy, ds, dlam, dzeta);
    step_lengths(du, ds, dlam, dzeta, ap, ad);
    ap = std::min(1.0, options.step_fraction * ap);
    ad = std::min(1.0, options.step_fraction * ad);

    u += ap * du;
    if (q > 0) {
      s += ap * ds;
      lam += ad * dlam;
    }
    y += ad * dy;
    zeta += ad * dzeta;
  }
}

}  // namespace sparsecert
