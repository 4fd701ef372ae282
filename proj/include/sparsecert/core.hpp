// Domain types and sparsity measures shared by every sparsecert module.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsecert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy. The CLI maps these onto exit codes.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Support detection threshold for solver outputs; exact inputs use 0.
inline constexpr double kSolverZeroTol = 1e-12;

// Dense m x n sensing matrix. Immutable after construction.
class SensingMatrix {
 public:
  // Throws DomainError when empty, non-finite, or when `columns_normalized`
  // is claimed but some column norm differs from 1 by more than 1e-12.
  explicit SensingMatrix(Matrix data, bool columns_normalized = false,
                         std::string provenance = {});

  const Matrix& data() const { return data_; }
  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  bool columns_normalized() const { return columns_normalized_; }
  const std::string& provenance() const { return provenance_; }

 private:
  Matrix data_;
  bool columns_normalized_;
  std::string provenance_;
};

// A vector together with the indices of its nonzero entries.
struct SparseSignal {
  Vector values;
  std::vector<Index> support;

  static SparseSignal from_values(Vector values, double zero_tol = 0.0);
  Index sparsity() const { return static_cast<Index>(support.size()); }
};

// Noise model attached to a recovery experiment. Exactly one kind is active.
struct NoiseSpec {
  enum class Kind { BoundedL2, Gaussian, Given };

  Kind kind = Kind::Gaussian;
  double epsilon = 0.0;   // BoundedL2: ||w||_2 <= epsilon
  double sigma = 0.0;     // Gaussian: w ~ N(0, sigma^2 I)
  double lambda_n = 0.0;  // tuning parameter for DS / LASSO
  double kappa = 0.5;     // LASSO premise ||A^T w||_inf <= kappa * lambda_n * sigma
  Vector w;               // Given: explicit noise vector

  static NoiseSpec bounded(double epsilon);
  static NoiseSpec gaussian(double sigma, double lambda_n, double kappa = 0.5);
  static NoiseSpec given(Vector w, double lambda_n, double sigma, double kappa = 0.5);

  double lambda_sigma() const { return lambda_n * sigma; }
  void validate() const;
};

// s(x) = ||x||_1^2 / ||x||_2^2. Throws DomainError on the zero vector.
double l1_sparsity_level(const Vector& x);

// Number of entries with |x_i| > zero_tol.
Index l0_sparsity(const Vector& x, double zero_tol = 0.0);

// Scales every column to unit Euclidean norm. Throws DomainError naming the
// first zero column.
SensingMatrix normalize_columns(const SensingMatrix& a);

// Orthonormal bases for the row space and the kernel of A, computed with a
// column-pivoted QR of A^T.
struct KernelBasis {
  Matrix row_space;  // rank x n, orthonormal rows
  Matrix kernel;     // n x (n - rank), orthonormal columns
  Index rank = 0;
};

KernelBasis kernel_basis(const Matrix& a, double rel_tol = 1e-10);

// Smallest column Euclidean norm.
double min_column_norm(const Matrix& a);

}  // namespace sparsecert
