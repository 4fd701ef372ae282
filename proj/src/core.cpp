#include "sparsecert/core.hpp"

#include <cmath>
#include <string>

namespace sparsecert {

SensingMatrix::SensingMatrix(Matrix data, bool columns_normalized, std::string provenance)
    : data_(std::move(data)),
      columns_normalized_(columns_normalized),
      provenance_(std::move(provenance)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw DomainError("sensing matrix must have at least one row and one column");
  }
  if (!data_.allFinite()) {
    throw DomainError("sensing matrix has non-finite entries");
  }
  if (columns_normalized_) {
    for (Index j = 0; j < data_.cols(); ++j) {
      if (std::abs(data_.col(j).norm() - 1.0) > 1e-12) {
        throw DomainError("column " + std::to_string(j) + " is not unit norm");
      }
    }
  }
}

SparseSignal SparseSignal::from_values(Vector values, double zero_tol) {
  SparseSignal sig;
  for (Index i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) > zero_tol) sig.support.push_back(i);
  }
  sig.values = std::move(values);
  return sig;
}

NoiseSpec NoiseSpec::bounded(double epsilon) {
  NoiseSpec n;
  n.kind = Kind::BoundedL2;
  n.epsilon = epsilon;
  n.validate();
  return n;
}

NoiseSpec NoiseSpec::gaussian(double sigma, double lambda_n, double kappa) {
  NoiseSpec n;
  n.kind = Kind::Gaussian;
  n.sigma = sigma;
  n.lambda_n = lambda_n;
  n.kappa = kappa;
  n.validate();
  return n;
}

NoiseSpec NoiseSpec::given(Vector w, double lambda_n, double sigma, double kappa) {
  NoiseSpec n;
  n.kind = Kind::Given;
  n.w = std::move(w);
  n.lambda_n = lambda_n;
  n.sigma = sigma;
  n.kappa = kappa;
  n.validate();
  return n;
}

void NoiseSpec::validate() const {
  if (epsilon < 0 || sigma < 0 || lambda_n < 0) {
    throw DomainError("noise parameters must be nonnegative");
  }
  if (!(kappa > 0 && kappa < 1)) throw DomainError("kappa must lie in (0, 1)");
  if (kind == Kind::Given && !w.allFinite()) throw DomainError("noise vector is not finite");
}

double l1_sparsity_level(const Vector& x) {
  if (!x.allFinite()) throw DomainError("l1_sparsity_level: non-finite entries");
  const double l2sq = x.squaredNorm();
  if (l2sq == 0.0) throw DomainError("l1_sparsity_level: zero vector");
  const double l1 = x.lpNorm<1>();
  return l1 * l1 / l2sq;
}

Index l0_sparsity(const Vector& x, double zero_tol) {
  Index k = 0;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > zero_tol) ++k;
  }
  return k;
}

SensingMatrix normalize_columns(const SensingMatrix& a) {
  if (a.columns_normalized()) return a;
  Matrix out = a.data();
  for (Index j = 0; j < out.cols(); ++j) {
    const double nrm = out.col(j).norm();
    if (nrm == 0.0) {
      throw DomainError("normalize_columns: column " + std::to_string(j) + " is zero");
    }
    out.col(j) /= nrm;
  }
  return SensingMatrix(std::move(out), true, a.provenance());
}

KernelBasis kernel_basis(const Matrix& a, double rel_tol) {
  const Index n = a.cols();
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  const double max_diag = qr.maxPivot();
  qr.setThreshold(rel_tol);
  KernelBasis kb;
  kb.rank = max_diag == 0.0 ? 0 : qr.rank();
  Matrix q = qr.householderQ();
  kb.row_space = q.leftCols(kb.rank).transpose();
  kb.kernel = q.rightCols(n - kb.rank);
  return kb;
}

double min_column_norm(const Matrix& a) {
  return a.colwise().norm().minCoeff();
}

}  // namespace sparsecert
