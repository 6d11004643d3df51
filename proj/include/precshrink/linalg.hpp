#pragma once

#include <Eigen/Dense>

namespace precshrink {

/// p x n observation matrix: rows are variables, columns observations.
using DataMatrix = Eigen::MatrixXd;

enum class Regime {
  invertible,  // p < n, S^{-1} exists
  pseudo,      // p >= n, Moore-Penrose inverse S^+
};

const char* to_string(Regime regime) noexcept;

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

/// Rank tolerance p * eps * lambda_max.
double rank_tolerance(const Eigen::VectorXd& ascending_values);

struct PseudoInverse {
  Eigen::MatrixXd matrix;
  int rank = 0;
  bool degenerate = false;  // every eigenvalue fell below the rank tolerance
};

/// U diag(g(lambda)) U' with g = 1/lambda above the rank tolerance, else 0.
PseudoInverse pseudo_inverse(const SymmetricEigen& eig);

struct MatrixNorms {
  double frobenius_sq;
  double trace_norm;
  double spectral;
};

/// Frobenius squared, trace (nuclear) and spectral norm. Symmetric inputs use
/// eigenvalues, general inputs singular values.
MatrixNorms norms(const Eigen::MatrixXd& a);

/// tr(A' B) = sum_ij a_ij b_ij, the Frobenius inner product.
double frobenius_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Sample covariance S = (1/n) Y Y', its eigendecomposition and S^{-1} or S^+.
///
/// Immutable after construction. The regime is `invertible` iff p < n; a p < n
/// sample whose smallest eigenvalue falls under the rank tolerance raises
/// Error{singular_matrix} rather than silently switching to the pseudo path.
class SampleStats {
 public:
  /// Covariance of `y` without mean removal unless `center` is set.
  static SampleStats from_data(const DataMatrix& y, bool center = false);
  /// Wraps an already formed symmetric nonnegative-definite S built from n observations.
  static SampleStats from_covariance(Eigen::MatrixXd s, int n);

  int p() const noexcept { return static_cast<int>(s_.rows()); }
  int n() const noexcept { return n_; }
  double ratio() const noexcept { return static_cast<double>(p()) / n_; }
  Regime regime() const noexcept { return regime_; }

  const Eigen::MatrixXd& covariance() const noexcept { return s_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eig_.values; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eig_.vectors; }
  const SymmetricEigen& eigen() const noexcept { return eig_; }

  /// S^{-1} in the invertible regime, S^+ otherwise.
  const Eigen::MatrixXd& inverse() const noexcept { return inv_.matrix; }
  int rank() const noexcept { return inv_.rank; }
  bool degenerate() const noexcept { return inv_.degenerate; }
  /// Eigenvalues of inverse(): 1/lambda above tolerance, 0 otherwise.
  const Eigen::VectorXd& inverse_eigenvalues() const noexcept { return inv_values_; }

  double inverse_frobenius_sq() const noexcept { return inv_frobenius_sq_; }
  double inverse_trace_norm() const noexcept { return inv_trace_norm_; }

  /// tr(inverse() * theta) via the eigendecomposition: sum_i (u_i' theta u_i) g(lambda_i).
  double trace_inverse_times(const Eigen::MatrixXd& theta) const;

 private:
  SampleStats(Eigen::MatrixXd s, int n);

  Eigen::MatrixXd s_;
  int n_;
  SymmetricEigen eig_;
  Regime regime_;
  PseudoInverse inv_;
  Eigen::VectorXd inv_values_;
  double inv_frobenius_sq_;
  double inv_trace_norm_;
};

/// Covariance-style free function spelling of SampleStats::from_data.
inline SampleStats sample_covariance(const DataMatrix& y, bool center = false) {
  return SampleStats::from_data(y, center);
}

inline PseudoInverse pseudo_inverse(const SampleStats& stats) { return pseudo_inverse(stats.eigen()); }

/// Inverse of a symmetric positive definite matrix by Cholesky; throws
/// Error{singular_matrix} when the factorization fails.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a);

}  // namespace precshrink
