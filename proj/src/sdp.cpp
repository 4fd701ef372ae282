#include "sparsecert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sparsecert {
namespace {

// Upper-triangular coordinates (i <= j) of a symmetric n x n matrix. A
// coordinate's weight is its multiplicity in the full matrix (1 on the
// diagonal, 2 off it), so <C, Z> = sum_p weight_p * C_p * z_p.
struct SymCoords {
  explicit SymCoords(Index n) : n(n) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i <= j; ++i) {
        row.push_back(i);
        col.push_back(j);
        weight.push_back(i == j ? 1.0 : 2.0);
      }
  }
  Index size() const { return static_cast<Index>(row.size()); }

  Vector pack(const Matrix& m) const {
    Vector v(size());
    for (Index p = 0; p < size(); ++p) v[p] = m(row[p], col[p]);
    return v;
  }
  Matrix unpack(const Vector& v) const {
    Matrix m(n, n);
    for (Index p = 0; p < size(); ++p) {
      m(row[p], col[p]) = v[p];
      m(col[p], row[p]) = v[p];
    }
    return m;
  }
  // Coefficients of the linear functional Z -> <A, Z> for symmetric A.
  Vector inner_coeffs(const Matrix& a) const {
    Vector v(size());
    for (Index p = 0; p < size(); ++p) v[p] = weight[p] * a(row[p], col[p]);
    return v;
  }
  Vector weights() const { return Eigen::Map<const Vector>(weight.data(), size()); }

  Index n;
  std::vector<Index> row, col;
  std::vector<double> weight;
};

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// Barrier data for one SDP instance, in packed coordinates.
// Cholesky (blocked, fast) with a pivoted LDL^T fallback for Hessians that
// lost definiteness to rounding.
class HessianFactor {
 public:
  explicit HessianFactor(const Matrix& s) : llt_(s) {
    if (llt_.info() != Eigen::Success) {
      ldlt_.compute(s);
      use_ldlt_ = true;
    }
  }
  bool ok() const { return use_ldlt_ ? ldlt_.info() == Eigen::Success : true; }
  template <typename Rhs>
  Matrix solve(const Rhs& b) const {
    return use_ldlt_ ? Matrix(ldlt_.solve(b)) : Matrix(llt_.solve(b));
  }

 private:
  Eigen::LLT<Matrix> llt_;
  Eigen::LDLT<Matrix> ldlt_;
  bool use_ldlt_ = false;
};

class BarrierProgram {
 public:
  BarrierProgram(const SdpProblem& p)
      : zc_(p.dim()), has_budget_(p.l1_budget.has_value()), budget_(p.l1_budget.value_or(0.0)) {
    const double sign = p.sense == SdpProblem::Sense::Minimize ? 1.0 : -1.0;
    c_ = sign * zc_.inner_coeffs(p.cost);
    neq_ = static_cast<Index>(p.eq_matrices.size());
    aeq_.resize(neq_, zc_.size());
    for (Index i = 0; i < neq_; ++i) aeq_.row(i) = zc_.inner_coeffs(p.eq_matrices[i]).transpose();
    beq_ = neq_ > 0 ? p.eq_rhs : Vector(0);

    if (has_budget_) {
      identity_map_ = p.l1_map.size() == 0;
      const Index out_dim = identity_map_ ? p.dim() : p.l1_map.rows();
      out_dim_ = out_dim;
      const SymCoords uc(out_dim);
      w_ = uc.weights();
      if (!identity_map_) {
        const Matrix& b = p.l1_map;
        map_.resize(uc.size(), zc_.size());
        for (Index q = 0; q < zc_.size(); ++q) {
          const Index i = zc_.row[q], j = zc_.col[q];
          for (Index r = 0; r < uc.size(); ++r) {
            const Index a = uc.row[r], c = uc.col[r];
            map_(r, q) = (i == j) ? b(a, i) * b(c, i) : b(a, i) * b(c, j) + b(a, j) * b(c, i);
          }
        }
      }
    }
  }

  Index nz() const { return zc_.size(); }
  Index nu() const { return w_.size(); }
  Index neq() const { return neq_; }
  double degree() const {
    return static_cast<double>(zc_.n) + (has_budget_ ? 2.0 * static_cast<double>(nu()) + 1.0 : 0.0);
  }

  Vector apply_map(const Vector& z) const { return identity_map_ ? z : Vector(map_ * z); }
  Vector apply_map_t(const Vector& v) const {
    return identity_map_ ? v : Vector(map_.transpose() * v);
  }

  // Strictly feasible start for the inequalities (equalities may be violated).
  void initial_point(Vector& z, Vector& u) const {
    double alpha = 1.0;
    Matrix eye = Matrix::Identity(zc_.n, zc_.n);
    if (has_budget_) {
      const Vector zeta_unit = apply_map(zc_.pack(eye));
      const double l1 = w_.dot(zeta_unit.cwiseAbs());
      alpha = l1 > 0 ? budget_ / (2.0 * l1) : 1.0;
    }
    z = zc_.pack(alpha * eye);
    if (has_budget_) {
      const double delta = budget_ / (4.0 * w_.sum());
      u = apply_map(z).cwiseAbs().array() + delta;
    } else {
      u.resize(0);
    }
  }

  // Barrier objective t*c^T z + phi(z, u); +inf outside the domain.
  double value(double t, const Vector& z, const Vector& u) const {
    Eigen::LLT<Matrix> llt(zc_.unpack(z));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Matrix& l = llt.matrixLLT();
    double logdet = 0.0;
    for (Index i = 0; i < zc_.n; ++i) {
      const double d = l(i, i);
      if (!(d > 0)) return std::numeric_limits<double>::infinity();
      logdet += 2.0 * std::log(d);
    }
    double f = t * c_.dot(z) - logdet;
    if (has_budget_) {
      const Vector zeta = apply_map(z);
      const Vector a = u - zeta, b = u + zeta;
      const double g = budget_ - w_.dot(u);
      if (!(a.minCoeff() > 0 && b.minCoeff() > 0 && g > 0)) {
        return std::numeric_limits<double>::infinity();
      }
      f -= a.array().log().sum() + b.array().log().sum() + std::log(g);
    }
    return f;
  }

  // Newton direction for t*c^T z + phi with the u block eliminated. Returns
  // false when the reduced Hessian could not be factored.
  bool newton(double t, const Vector& z, const Vector& u, Vector& dz, Vector& du,
              double& decrement) const {
    const Matrix zmat = zc_.unpack(z);
    Eigen::LLT<Matrix> zllt(zmat);
    if (zllt.info() != Eigen::Success) return false;
    const Matrix pinv = zllt.solve(Matrix::Identity(zc_.n, zc_.n));

    const Index nz_ = nz();
    Vector grad_z = t * c_;
    for (Index p = 0; p < nz_; ++p) grad_z[p] -= zc_.weight[static_cast<std::size_t>(p)] * pinv(zc_.row[p], zc_.col[p]);

    Matrix s(nz_, nz_);
    for (Index q = 0; q < nz_; ++q) {
      const Index k = zc_.row[q], l = zc_.col[q];
      const double wq = zc_.weight[static_cast<std::size_t>(q)];
      for (Index p = 0; p <= q; ++p) {
        const Index i = zc_.row[p], j = zc_.col[p];
        const double wp = zc_.weight[static_cast<std::size_t>(p)];
        s(p, q) = 0.5 * wp * wq * (pinv(i, k) * pinv(j, l) + pinv(i, l) * pinv(j, k));
      }
    }

    Vector grad_u, inv_a2, inv_b2, dvec, e, vvec;
    double rho_eff = 0.0;
    if (has_budget_) {
      const Vector zeta = apply_map(z);
      const Vector a = u - zeta, b = u + zeta;
      const double g = budget_ - w_.dot(u);
      inv_a2 = a.cwiseInverse().cwiseAbs2();
      inv_b2 = b.cwiseInverse().cwiseAbs2();
      grad_z += apply_map_t(a.cwiseInverse() - b.cwiseInverse());
      grad_u = -a.cwiseInverse() - b.cwiseInverse() + w_ / g;
      dvec = inv_a2 + inv_b2;
      e = inv_b2 - inv_a2;
      const double rho = 1.0 / (g * g);
      rho_eff = rho / (1.0 + rho * w_.cwiseAbs2().cwiseQuotient(dvec).sum());
      vvec = e.cwiseProduct(w_).cwiseQuotient(dvec);
      // 4 alpha beta / (alpha + beta): the z-z curvature left after eliminating u.
      const Vector reduced = 4.0 * inv_a2.cwiseProduct(inv_b2).cwiseQuotient(dvec);
      if (identity_map_) {
        s.diagonal() += reduced;
      } else {
        s.triangularView<Eigen::Upper>() += map_.transpose() * reduced.asDiagonal() * map_;
      }
      const Vector mv = apply_map_t(vvec);
      s.triangularView<Eigen::Upper>() += rho_eff * mv * mv.transpose();
    }
    s.triangularView<Eigen::StrictlyLower>() = s.transpose();

    auto huu_inv = [&](const Vector& r) {
      const Vector rd = r.cwiseQuotient(dvec);
      return Vector(rd - rho_eff * w_.cwiseQuotient(dvec) * w_.dot(rd));
    };

    Vector rhs = -grad_z;
    if (has_budget_) rhs += apply_map_t(e.cwiseProduct(huu_inv(grad_u)));

    const HessianFactor sfac(s);
    if (!sfac.ok()) return false;
    if (neq_ > 0) {
      const Vector r_eq = aeq_ * z - beq_;
      const Matrix y = sfac.solve(aeq_.transpose());
      const Matrix k = aeq_ * y;
      const Vector s_rhs = sfac.solve(rhs);
      const Eigen::LDLT<Matrix> kfac(k);
      Vector nu = kfac.solve(aeq_ * s_rhs + r_eq);
      dz = s_rhs - y * nu;
      // S grows like t^2 along the near-null directions of Z, so the Schur
      // solve loses accuracy late in the path; refine against the full KKT
      // system to stop the equalities from drifting.
      for (int round = 0; round < 3; ++round) {
        const Vector r1 = rhs - s.selfadjointView<Eigen::Upper>() * dz - aeq_.transpose() * nu;
        const Vector r2 = -r_eq - aeq_ * dz;
        const Vector t1 = sfac.solve(r1);
        const Vector dnu = kfac.solve(aeq_ * t1 - r2);
        dz += t1 - y * dnu;
        nu += dnu;
      }
    } else {
      dz = sfac.solve(rhs);
    }
    if (!dz.allFinite()) return false;
    if (has_budget_) {
      du = huu_inv(-grad_u - e.cwiseProduct(apply_map(dz)));
    } else {
      du.resize(0);
    }
    decrement = -(grad_z.dot(dz) + (has_budget_ ? grad_u.dot(du) : 0.0));
    return true;
  }

  // Budget multiplier at a (near-)center for parameter t, see SdpSolution.
  // The barrier terms are linearized along one Newton step, which satisfies
  // the linearized stationarity conditions exactly; the error left by an
  // inexact center is then second order.
  Matrix l1_dual(double t, const Vector& z, const Vector& u) const {
    const Vector zeta = apply_map(z);
    const Vector a = u - zeta, b = u + zeta;
    Vector ia = a.cwiseInverse(), ib = b.cwiseInverse();
    Vector dz, du;
    double dec = 0.0;
    if (newton(t, z, u, dz, du, dec)) {
      const Vector dzeta = apply_map(dz);
      ia -= (du - dzeta).cwiseProduct(ia.cwiseAbs2());
      ib -= (du + dzeta).cwiseProduct(ib.cwiseAbs2());
    }
    const Vector v = (ib - ia).cwiseQuotient(w_) / t;
    return SymCoords(out_dim_).unpack(v);
  }

  double eq_residual(const Vector& z) const {
    if (neq_ == 0) return 0.0;
    return (aeq_ * z - beq_).lpNorm<Eigen::Infinity>() / (1.0 + beq_.lpNorm<Eigen::Infinity>());
  }

  double linear_objective(const Vector& z) const { return c_.dot(z); }
  Matrix unpack(const Vector& z) const { return zc_.unpack(z); }

 private:
  SymCoords zc_;
  Vector c_;
  Index neq_ = 0;
  Matrix aeq_;
  Vector beq_;
  bool has_budget_;
  double budget_;
  bool identity_map_ = true;
  Index out_dim_ = 0;
  Matrix map_;
  Vector w_;
};

}  // namespace

void SdpProblem::validate(Index size_cap) const {
  const Index n = dim();
  if (n < 1 || cost.cols() != n) throw DomainError("SDP cost must be square and nonempty");
  if (n > size_cap || l1_map.rows() > size_cap) {
    throw SizeGuardError("SDP dimension " + std::to_string(std::max(n, l1_map.rows())) +
                         " exceeds size cap " + std::to_string(size_cap));
  }
  if (!cost.allFinite() || !is_symmetric(cost)) throw DomainError("SDP cost must be symmetric");
  if (static_cast<Index>(eq_matrices.size()) != eq_rhs.size()) {
    throw DomainError("SDP equality count mismatch");
  }
  for (const auto& a : eq_matrices) {
    if (a.rows() != n || a.cols() != n) throw DomainError("SDP constraint matrix has wrong shape");
    if (!a.allFinite() || !is_symmetric(a)) throw DomainError("SDP constraint must be symmetric");
  }
  if (l1_budget) {
    if (!(*l1_budget > 0) || !std::isfinite(*l1_budget)) {
      throw DomainError("SDP l1 budget must be positive");
    }
    if (l1_map.size() != 0 && l1_map.cols() != n) throw DomainError("SDP l1 map has wrong shape");
  } else if (l1_map.size() != 0) {
    throw DomainError("SDP l1 map given without a budget");
  }
}

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate(options.size_cap);
  if (!(options.tol > 0)) throw DomainError("SDP tolerance must be positive");
  if (!(options.mu_factor > 1)) throw DomainError("SDP mu_factor must exceed 1");

  const BarrierProgram prog(problem);
  const double theta = prog.degree();
  const double sense = problem.sense == SdpProblem::Sense::Minimize ? 1.0 : -1.0;
  Vector z, u;
  prog.initial_point(z, u);

  constexpr double kArmijo = 0.01;
  constexpr double kBacktrack = 0.5;
  constexpr double kCenteringTol = 1e-14;
  constexpr double kQuadraticRegion = 0.05;
  constexpr double kStallLevel = 1e-8;
  constexpr double kFeasTol = 1e-12;
  constexpr int kStageSteps = 200;

  double t = std::max(1.0, theta / (1.0 + std::abs(prog.linear_objective(z))));
  int steps = 0;
  bool feasible = prog.eq_residual(z) <= kFeasTol;
  bool stalled = false;
  LpStatus status = LpStatus::MaxIter;
  // Last completed center; its gap bound stays valid if the path breaks down.
  Vector z_center, u_center;
  double t_center = 0.0;
  double factor = options.mu_factor;

  while (steps < options.max_iter) {
    // Centering.
    double prev_dec = std::numeric_limits<double>::infinity();
    bool centered = false;
    for (int stage_steps = 0; steps < options.max_iter; ++stage_steps) {
      if (stage_steps == kStageSteps) {
        stalled = true;
        break;
      }
      Vector dz, du;
      double dec = 0.0;
      if (!prog.newton(t, z, u, dz, du, dec)) {
        stalled = true;
        break;
      }
      ++steps;
      if (feasible && dec / 2.0 <= kCenteringTol) {
        centered = true;
        break;
      }
      // Quadratic convergence has stalled at rounding level.
      if (feasible && dec < kStallLevel && dec > 0.25 * prev_dec) {
        centered = true;
        break;
      }
      prev_dec = dec;
      const double f0 = prog.value(t, z, u);
      // Inside the quadratic-convergence region of a self-concordant barrier
      // the full step is taken; Armijo cannot resolve such small decreases
      // once t * <C, Z> dominates the barrier value.
      const bool full_step = feasible && dec < kQuadraticRegion;
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, step *= kBacktrack) {
        const Vector zt = z + step * dz;
        const Vector ut = u + step * du;
        const double ft = prog.value(t, zt, ut);
        if (!std::isfinite(ft)) continue;
        if (!feasible || full_step || ft <= f0 - kArmijo * step * dec) {
          z = zt;
          u = ut;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // No descent possible at working precision; treat as centered.
        if (feasible && dec < kQuadraticRegion) {
          centered = true;
          break;
        }
        stalled = true;
        break;
      }
      if (!feasible && step == 1.0) feasible = true;
      if (!feasible) feasible = prog.eq_residual(z) <= kFeasTol;
    }
    if (stalled || !centered) {
      // Too long a step along the path: retry from the last center with a
      // smaller increase of t, unless that center is already close to optimal
      // (breakdown there is numerical and retrying only burns Newton steps).
      const bool loose = t_center > 0.0 &&
                         theta / t_center > 1e-4 * std::max(1.0, std::abs(sense * prog.linear_objective(z_center)));
      if (loose && factor > 1.2 && steps < options.max_iter) {
        factor = std::sqrt(factor);
        z = z_center;
        u = u_center;
        t = t_center * factor;
        stalled = false;
        continue;
      }
      break;
    }
    z_center = z;
    u_center = u;
    t_center = t;
    const double obj = sense * prog.linear_objective(z);
    if (feasible && theta / t <= options.tol * std::max(1.0, std::abs(obj))) {
      status = LpStatus::Optimal;
      break;
    }
    t *= factor;
  }
  if (status != LpStatus::Optimal && t_center > 0.0) {
    z = z_center;
    u = u_center;
    t = t_center;
  } else if (!feasible) {
    status = LpStatus::Infeasible;
  }

  SdpSolution sol;
  sol.z = prog.unpack(z);
  sol.objective = sense * prog.linear_objective(z);
  // Without a completed center there is no valid gap bound.
  sol.gap = (status == LpStatus::Optimal || t_center > 0.0)
                ? theta / t
                : std::numeric_limits<double>::infinity();
  sol.eq_residual = prog.eq_residual(z);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sol.z, Eigen::EigenvaluesOnly);
  sol.min_eigenvalue = eig.eigenvalues().minCoeff();
  sol.iterations = steps;
  sol.status = status;
  if (problem.l1_budget && std::isfinite(sol.gap)) sol.l1_dual = sense * prog.l1_dual(t, z, u);
  return sol;
}

}  // namespace sparsecert
