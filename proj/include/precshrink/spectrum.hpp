#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace precshrink {

/// One point mass of a discrete eigenvalue distribution.
struct SpectralAtom {
  double weight;
  double eigenvalue;
};

/// Discrete population spectrum H as weighted point masses.
///
/// Weights sum to one (within 1e-12) and every eigenvalue is strictly
/// positive. Construction validates and throws Error{invalid_input}.
class SpectrumSpec {
 public:
  explicit SpectrumSpec(std::vector<SpectralAtom> atoms);

  static SpectrumSpec identity() { return SpectrumSpec({{1.0, 1.0}}); }
  static SpectrumSpec scaled_identity(double sigma) { return SpectrumSpec({{1.0, sigma}}); }

  const std::vector<SpectralAtom>& atoms() const noexcept { return atoms_; }

 private:
  std::vector<SpectralAtom> atoms_;
};

struct SpectralMoments {
  double m1_inv;  // integral of dH/tau
  double m2_inv;  // integral of dH/tau^2
};

SpectralMoments spectral_moments(const SpectrumSpec& spec);

/// Largest-remainder apportionment of p slots to the given weights.
/// Ties in the remainder go to the earlier weight.
std::vector<int> apportion(const std::vector<double>& weights, int p);

/// Population covariance Sigma = B diag(tau) B' with cached inverse and norms.
class CovarianceModel {
 public:
  /// `eigenvalues` must be positive; `basis` (if given) orthonormal within 1e-10.
  CovarianceModel(Eigen::VectorXd eigenvalues,
                  std::optional<Eigen::MatrixXd> basis = std::nullopt);

  int dimension() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  bool is_diagonal() const noexcept { return diagonal_; }

  const Eigen::MatrixXd& covariance() const noexcept { return sigma_; }
  const Eigen::MatrixXd& precision() const noexcept { return sigma_inv_; }
  /// Sigma^{1/2}; used to map white noise onto the model.
  Eigen::MatrixXd sqrt_covariance() const;
  /// Sigma^{-1/2}.
  Eigen::MatrixXd inv_sqrt_covariance() const;

  double precision_frobenius_sq() const noexcept { return precision_frobenius_sq_; }
  double precision_trace_norm() const noexcept { return precision_trace_norm_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd basis_;
  bool diagonal_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_inv_;
  double precision_frobenius_sq_;
  double precision_trace_norm_;
};

/// Builds Sigma whose eigenvalue counts follow `apportion(weights, p)`, sorted
/// ascending (ties by atom order), optionally rotated by `basis`.
CovarianceModel build_covariance(const SpectrumSpec& spec, int p,
                                 std::optional<Eigen::MatrixXd> basis = std::nullopt);

/// Diagonal eigenvalue vector that build_covariance would use.
Eigen::VectorXd apportioned_eigenvalues(const SpectrumSpec& spec, int p);

}  // namespace precshrink
