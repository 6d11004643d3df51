#include "precshrink/estimators.hpp"

#include "precshrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace precshrink {

const char* to_string(WeightsRegime regime) noexcept {
  return regime == WeightsRegime::c_lt_1 ? "c_lt_1" : "c_gt_1";
}

const char* to_string(Provenance provenance) noexcept {
  switch (provenance) {
    case Provenance::oracle: return "oracle";
    case Provenance::bona_fide: return "bona_fide";
    case Provenance::asymptotic_limit: return "asymptotic_limit";
  }
  return "unknown";
}

TargetMatrix::TargetMatrix(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1)
    throw Error(ErrorCode::invalid_input, "target must be a non-empty square matrix");
  if (!matrix_.allFinite()) throw Error(ErrorCode::invalid_input, "target has non-finite entries");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::invalid_input, "target is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_, Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues()(0) > 0.0))
    throw Error(ErrorCode::invalid_input, "target is not positive definite");
  frobenius_sq_ = frobenius_inner(matrix_, matrix_);
  trace_norm_ = matrix_.trace();
}

TargetMatrix TargetMatrix::identity_over_p(int p) {
  if (p < 1) throw Error(ErrorCode::invalid_input, "dimension must be positive");
  return TargetMatrix(Eigen::MatrixXd::Identity(p, p) / static_cast<double>(p));
}

TargetMatrix TargetMatrix::scaled(double factor) const {
  if (!(factor > 0.0)) throw Error(ErrorCode::invalid_input, "target scale must be positive");
  return TargetMatrix(matrix_ * factor);
}

namespace {

void require_dimension(int p, int q, const char* what) {
  if (p != q)
    throw Error(ErrorCode::invalid_input, std::string(what) + " dimension " + std::to_string(q) +
                                              " does not match sample dimension " + std::to_string(p));
}

void require_invertible(const SampleStats& stats, const char* op) {
  if (stats.regime() != Regime::invertible)
    throw Error(ErrorCode::regime_mismatch, std::string(op) + " requires p < n (got p/n = " +
                                                std::to_string(stats.ratio()) + ")");
  if (stats.ratio() > kNearSingularRatio)
    throw Error(ErrorCode::near_singular_regime,
                std::string(op) + " refuses p/n = " + std::to_string(stats.ratio()) +
                    " inside the near-singular band (> " + std::to_string(kNearSingularRatio) + ")");
}

// Hessian determinant of the quadratic loss in (alpha, beta).
double hessian_det(double inv_fro_sq, double target_fro_sq, double cross) {
  const double det = inv_fro_sq * target_fro_sq - cross * cross;
  if (!(det > kDegenerateTargetTol * inv_fro_sq * target_fro_sq))
    throw Error(ErrorCode::degenerate_target,
                "target is numerically proportional to the sample inverse (relative determinant " +
                    std::to_string(det / (inv_fro_sq * target_fro_sq)) + ")");
  return det;
}

PrecisionEstimate oracle_olse(const SampleStats& stats, const CovarianceModel& truth,
                              const TargetMatrix& target, WeightsRegime regime) {
  require_dimension(stats.p(), truth.dimension(), "covariance model");
  require_dimension(stats.p(), target.dimension(), "target");
  const Eigen::MatrixXd& prec = truth.precision();
  const Eigen::MatrixXd& pi0 = target.matrix();

  const double inv_fro_sq = stats.inverse_frobenius_sq();
  const double pi_fro_sq = target.frobenius_sq();
  const double tr_inv_pi = stats.trace_inverse_times(pi0);
  const double tr_inv_prec = stats.trace_inverse_times(prec);
  const double tr_prec_pi = frobenius_inner(prec, pi0);

  const double det = hessian_det(inv_fro_sq, pi_fro_sq, tr_inv_pi);
  const double alpha = (tr_inv_prec * pi_fro_sq - tr_prec_pi * tr_inv_pi) / det;
  const double beta = (tr_prec_pi * inv_fro_sq - tr_inv_prec * tr_inv_pi) / det;

  return {alpha * stats.inverse() + beta * pi0, {alpha, beta, regime, Provenance::oracle},
          std::string(estimator_id::olse_precision_oracle)};
}

}  // namespace

PrecisionEstimate oracle_olse_lt1(const SampleStats& stats, const CovarianceModel& truth,
                                  const TargetMatrix& target) {
  require_invertible(stats, "oracle_olse_lt1");
  return oracle_olse(stats, truth, target, WeightsRegime::c_lt_1);
}

PrecisionEstimate oracle_olse_gt1(const SampleStats& stats, const CovarianceModel& truth,
                                  const TargetMatrix& target) {
  if (stats.regime() != Regime::pseudo)
    throw Error(ErrorCode::regime_mismatch, "oracle_olse_gt1 requires p >= n (got p/n = " +
                                                std::to_string(stats.ratio()) + ")");
  return oracle_olse(stats, truth, target, WeightsRegime::c_gt_1);
}

double theta_hat(const SampleStats& stats, const Eigen::MatrixXd& theta) {
  require_invertible(stats, "theta_hat");
  return (1.0 - stats.ratio()) * stats.trace_inverse_times(theta);
}

double rho_hat(const SampleStats& stats) {
  require_invertible(stats, "rho_hat");
  const double c = stats.ratio();
  const double p = stats.p();
  const double n = stats.n();
  const double tr = stats.inverse_trace_norm();
  return (1.0 - c) * (1.0 - c) / p * stats.inverse_frobenius_sq() - (1.0 - c) / (p * n) * tr * tr;
}

PrecisionEstimate bona_fide_olse(const SampleStats& stats, const TargetMatrix& target, bool clamp) {
  require_invertible(stats, "bona_fide_olse");
  require_dimension(stats.p(), target.dimension(), "target");
  const double c = stats.ratio();
  const double n = stats.n();
  const double inv_fro_sq = stats.inverse_frobenius_sq();
  const double inv_tr = stats.inverse_trace_norm();
  const double pi_fro_sq = target.frobenius_sq();
  const double tr_inv_pi = stats.trace_inverse_times(target.matrix());

  const double det = hessian_det(inv_fro_sq, pi_fro_sq, tr_inv_pi);
  double alpha = 1.0 - c - (inv_tr * inv_tr / n * pi_fro_sq) / det;
  if (clamp) alpha = std::clamp(alpha, 0.0, 1.0 - c);
  const double beta = tr_inv_pi / pi_fro_sq * (1.0 - c - alpha);

  return {alpha * stats.inverse() + beta * target.matrix(),
          {alpha, beta, WeightsRegime::c_lt_1, Provenance::bona_fide},
          std::string(estimator_id::olse_precision)};
}

double sigma_inv_hat_identity_case(const SampleStats& stats) {
  if (stats.regime() != Regime::pseudo || stats.p() <= stats.n())
    throw Error(ErrorCode::regime_mismatch, "sigma_inv_hat_identity_case requires p > n");
  const double c = stats.ratio();
  return c * ((c - 1.0) / stats.p()) * stats.inverse_trace_norm();
}

CovarianceShrinkage olse_covariance(const SampleStats& stats, const Eigen::MatrixXd& target_cov) {
  require_dimension(stats.p(), static_cast<int>(target_cov.rows()), "covariance target");
  require_dimension(stats.p(), static_cast<int>(target_cov.cols()), "covariance target");
  const Eigen::MatrixXd& s = stats.covariance();
  const double n = stats.n();
  const double s_fro_sq = frobenius_inner(s, s);
  const double s_tr = s.trace();
  const double t_fro_sq = frobenius_inner(target_cov, target_cov);
  const double tr_s_t = frobenius_inner(s, target_cov);

  const double det = s_fro_sq * t_fro_sq - tr_s_t * tr_s_t;
  if (!(det > kDegenerateTargetTol * s_fro_sq * t_fro_sq))
    throw Error(ErrorCode::degenerate_target,
                "covariance target is numerically proportional to the sample covariance");
  const double alpha = 1.0 - (s_tr * s_tr / n * t_fro_sq) / det;
  const double beta = tr_s_t / t_fro_sq * (1.0 - alpha);

  CovarianceShrinkage out;
  out.covariance = alpha * s + beta * target_cov;
  out.inverse = spd_inverse(out.covariance);
  out.weights = {alpha, beta, stats.regime() == Regime::invertible ? WeightsRegime::c_lt_1 : WeightsRegime::c_gt_1,
                 Provenance::bona_fide};
  return out;
}

PrecisionEstimate oracle_equivariant(const SampleStats& stats, const CovarianceModel& truth) {
  require_dimension(stats.p(), truth.dimension(), "covariance model");
  const Eigen::MatrixXd& u = stats.eigenvectors();
  const Eigen::VectorXd a = (u.cwiseProduct(truth.precision() * u)).colwise().sum().transpose();
  Eigen::MatrixXd m = u * a.asDiagonal() * u.transpose();
  m = 0.5 * (m + m.transpose()).eval();
  const double nan = std::nan("");
  return {std::move(m),
          {nan, nan, stats.regime() == Regime::invertible ? WeightsRegime::c_lt_1 : WeightsRegime::c_gt_1,
           Provenance::oracle},
          std::string(estimator_id::ev_oracle)};
}

}  // namespace precshrink
