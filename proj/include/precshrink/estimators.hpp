#pragma once

#include "precshrink/linalg.hpp"
#include "precshrink/spectrum.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace precshrink {

enum class WeightsRegime { c_lt_1, c_gt_1 };
enum class Provenance { oracle, bona_fide, asymptotic_limit };

const char* to_string(WeightsRegime regime) noexcept;
const char* to_string(Provenance provenance) noexcept;

/// Shrinkage intensities of alpha * (S^{-1} or S^+) + beta * target.
struct ShrinkageWeights {
  double alpha;
  double beta;
  WeightsRegime regime;
  Provenance provenance;
};

/// Symmetric positive definite shrinkage target Pi_0 with cached norms.
///
/// The target may be random as long as it is independent of the sample it is
/// combined with; this is not checked.
class TargetMatrix {
 public:
  explicit TargetMatrix(Eigen::MatrixXd matrix);

  static TargetMatrix identity_over_p(int p);

  int dimension() const noexcept { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  double frobenius_sq() const noexcept { return frobenius_sq_; }
  double trace_norm() const noexcept { return trace_norm_; }

  TargetMatrix scaled(double factor) const;

 private:
  Eigen::MatrixXd matrix_;
  double frobenius_sq_;
  double trace_norm_;
};

/// Stable estimator identifiers shared by the CLI and result files.
namespace estimator_id {
inline constexpr std::string_view sample_inv = "sample_inv";
inline constexpr std::string_view sample_pinv = "sample_pinv";
inline constexpr std::string_view olse_precision = "olse_precision";
inline constexpr std::string_view olse_precision_oracle = "olse_precision_oracle";
inline constexpr std::string_view olse_cov_inv = "olse_cov_inv";
inline constexpr std::string_view ev_oracle = "ev_oracle";
}  // namespace estimator_id

struct PrecisionEstimate {
  Eigen::MatrixXd matrix;
  ShrinkageWeights weights;
  std::string estimator_id;
};

/// Operations that need S^{-1} refuse p/n above this value.
inline constexpr double kNearSingularRatio = 0.95;
/// Relative threshold on the Hessian determinant ||S^-1||^2 ||P||^2 - tr(S^-1 P)^2.
inline constexpr double kDegenerateTargetTol = 1e-12;

/// Oracle intensities for c < 1, minimizing ||a S^{-1} + b Pi_0 - Sigma^{-1}||_F^2.
PrecisionEstimate oracle_olse_lt1(const SampleStats& stats, const CovarianceModel& truth,
                                  const TargetMatrix& target);

/// Oracle intensities for c > 1 with the Moore-Penrose inverse in place of S^{-1}.
PrecisionEstimate oracle_olse_gt1(const SampleStats& stats, const CovarianceModel& truth,
                                  const TargetMatrix& target);

/// Consistent estimator of tr(Sigma^{-1} Theta): (1 - p/n) tr(S^{-1} Theta).
double theta_hat(const SampleStats& stats, const Eigen::MatrixXd& theta);

/// Consistent estimator of (1/p) ||Sigma^{-1}||_F^2.
double rho_hat(const SampleStats& stats);

/// Feasible OLSE for c < 1. With `clamp`, alpha is projected onto [0, 1 - p/n]
/// before beta is derived from it.
PrecisionEstimate bona_fide_olse(const SampleStats& stats, const TargetMatrix& target,
                                 bool clamp = false);

/// Consistent estimator of 1/sigma when Sigma = sigma I and p > n.
double sigma_inv_hat_identity_case(const SampleStats& stats);

/// Linear shrinkage of the covariance toward `target_cov`, and its inverse.
struct CovarianceShrinkage {
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd inverse;
  ShrinkageWeights weights;
};

CovarianceShrinkage olse_covariance(const SampleStats& stats, const Eigen::MatrixXd& target_cov);

/// U diag(U' Sigma^{-1} U) U': the Frobenius-best estimator sharing the sample eigenvectors.
PrecisionEstimate oracle_equivariant(const SampleStats& stats, const CovarianceModel& truth);

}  // namespace precshrink
