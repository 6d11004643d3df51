#include "precshrink/asymptotics.hpp"

#include "precshrink/error.hpp"
#include "precshrink/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace precshrink {

namespace {

void require_c_gt1(double c, const char* op) {
  if (!(c > 1.0) || !std::isfinite(c))
    throw Error(ErrorCode::invalid_input, std::string(op) + " requires c > 1, got " + std::to_string(c));
}

void require_c_lt1(double c, const char* op) {
  if (!(c > 0.0 && c < 1.0))
    throw Error(ErrorCode::invalid_input, std::string(op) + " requires 0 < c < 1, got " + std::to_string(c));
}

double resolvent_sum(const Eigen::VectorXd& shifts, double x) {
  return (shifts.array() + x).inverse().sum();
}

double residual_at(const Eigen::VectorXd& shifts, double c, double x) {
  const double p = static_cast<double>(shifts.size());
  return 1.0 / x - c / p * resolvent_sum(shifts, x);
}

bool acceptable(double residual, double x, double tol) {
  return std::abs(residual) < tol * std::max(1.0, 1.0 / x);
}

RootSolution bisect(const Eigen::VectorXd& shifts, double c, int iterations_so_far) {
  // residual_at is positive near 0 and behaves like (1 - c)/x for large x.
  double lo = 1e-12;
  double hi = 1e12;
  int it = 0;
  while (it < 4000) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    ++it;
    if (residual_at(shifts, c, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double r_lo = residual_at(shifts, c, lo);
  const double r_hi = residual_at(shifts, c, hi);
  const double x = std::abs(r_lo) < std::abs(r_hi) ? lo : hi;
  return {x, iterations_so_far + it, std::abs(residual_at(shifts, c, x)), true};
}

}  // namespace

RootSolution solve_resolvent_root(const Eigen::VectorXd& shifts, double c, const SolverOptions& options) {
  require_c_gt1(c, "solve_resolvent_root");
  if (shifts.size() == 0) throw Error(ErrorCode::invalid_input, "empty spectrum");
  if (!(shifts.array() >= 0.0).all() || !shifts.allFinite())
    throw Error(ErrorCode::invalid_input, "resolvent shifts must be finite and nonnegative");
  const double p = static_cast<double>(shifts.size());

  double x = shifts.mean() / (c - 1.0);
  if (!(x > 0.0)) x = 1.0;
  double previous_step = std::numeric_limits<double>::infinity();
  int growing = 0;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    const double target = p / (c * resolvent_sum(shifts, x));
    const double next = (1.0 - options.damping) * x + options.damping * target;
    if (!std::isfinite(next) || next <= 0.0) break;
    const double step = std::abs(next - x);
    x = next;
    if (step <= options.step_tolerance * std::max(1.0, x)) {
      converged = true;
      ++it;
      break;
    }
    growing = step > previous_step ? growing + 1 : 0;
    if (growing >= 10) break;  // oscillating
    previous_step = step;
  }

  if (converged) {
    const double r = residual_at(shifts, c, x);
    if (acceptable(r, x, options.residual_tolerance)) return {x, it, std::abs(r), false};
  }
  RootSolution fallback = bisect(shifts, c, it);
  if (!acceptable(fallback.residual, fallback.value, options.residual_tolerance))
    throw Error(ErrorCode::non_convergence,
                "resolvent equation did not converge (residual " + std::to_string(fallback.residual) + ")");
  return fallback;
}

double psi_limit(const SpectrumSpec& spec, double c) {
  require_c_lt1(c, "psi_limit");
  const auto m = spectral_moments(spec);
  const double q = 1.0 - c;
  return m.m2_inv / (q * q) + c * m.m1_inv * m.m1_inv / (q * q * q);
}

ShrinkageWeights limit_weights_lt1(const CovarianceModel& truth, const TargetMatrix& target, double c) {
  require_c_lt1(c, "limit_weights_lt1");
  if (truth.dimension() != target.dimension())
    throw Error(ErrorCode::invalid_input, "target dimension does not match the covariance model");
  const double p = truth.dimension();
  const double prec_fro_sq = truth.precision_frobenius_sq();
  const double prec_tr = truth.precision_trace_norm();
  const double pi_fro_sq = target.frobenius_sq();
  const double cross = frobenius_inner(truth.precision(), target.matrix());

  const double inflated = prec_fro_sq + c / (p * (1.0 - c)) * prec_tr * prec_tr;
  const double denom = inflated * pi_fro_sq - cross * cross;
  if (!(denom > kDegenerateTargetTol * inflated * pi_fro_sq))
    throw Error(ErrorCode::degenerate_target, "limit intensities undefined for this target");
  const double alpha = (1.0 - c) * (prec_fro_sq * pi_fro_sq - cross * cross) / denom;
  const double beta = cross / pi_fro_sq * (1.0 - alpha / (1.0 - c));
  return {alpha, beta, WeightsRegime::c_lt_1, Provenance::asymptotic_limit};
}

RootSolution solve_x0(const CovarianceModel& truth, double c, const SolverOptions& options) {
  require_c_gt1(c, "solve_x0");
  return solve_resolvent_root(truth.eigenvalues().cwiseInverse(), c, options);
}

double x0_prime(const CovarianceModel& truth, double c, double x0) {
  require_c_gt1(c, "x0_prime");
  if (!(x0 > 0.0)) throw Error(ErrorCode::inconsistent_input, "x0 must be positive");
  const Eigen::ArrayXd shifted = truth.eigenvalues().cwiseInverse().array() + x0;
  const double p = truth.dimension();
  const double denom = 1.0 / (x0 * x0) - c / p * shifted.square().inverse().sum();
  if (!(denom > 0.0))
    throw Error(ErrorCode::inconsistent_input,
                "x'(0) denominator is not positive; x0 does not solve its defining equation");
  return 1.0 / denom;
}

RootSolution solve_y(const CovarianceModel& truth, const Eigen::MatrixXd& theta, double c,
                     const SolverOptions& options) {
  require_c_gt1(c, "solve_y");
  const int p = truth.dimension();
  if (theta.rows() != p || theta.cols() != p)
    throw Error(ErrorCode::invalid_input, "Theta dimension does not match the covariance model");
  const Eigen::MatrixXd root = truth.inv_sqrt_covariance();
  Eigen::MatrixXd rotated = root * theta * root;
  rotated = 0.5 * (rotated + rotated.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rotated, Eigen::EigenvaluesOnly);
  Eigen::VectorXd shifts = solver.eigenvalues();
  if (!(shifts(0) > 0.0)) throw Error(ErrorCode::invalid_input, "Theta must be positive definite");
  return solve_resolvent_root(shifts, c, options);
}

double rank_one_y(const CovarianceModel& truth, const Eigen::VectorXd& xi, const Eigen::VectorXd& eta,
                  double c) {
  require_c_gt1(c, "rank_one_y");
  if (xi.size() != truth.dimension() || eta.size() != truth.dimension())
    throw Error(ErrorCode::invalid_input, "vector dimension does not match the covariance model");
  return eta.dot(truth.precision() * xi) / (c - 1.0);
}

ShrinkageWeights limit_weights_gt1(const CovarianceModel& truth, const TargetMatrix& target, double c) {
  require_c_gt1(c, "limit_weights_gt1");
  if (truth.dimension() != target.dimension())
    throw Error(ErrorCode::invalid_input, "target dimension does not match the covariance model");
  const double p = truth.dimension();
  const double x0 = solve_x0(truth, c).value;
  const double xp = x0_prime(truth, c, x0);
  const double y_prec = solve_y(truth, truth.precision(), c).value;
  const double y_target = solve_y(truth, target.matrix(), c).value;

  // Deterministic equivalents of ||S^+||_F^2, tr(S^+ Sigma^{-1}) and tr(S^+ Pi_0).
  const double inv_fro_sq = p / c * xp;
  const double tr_inv_prec = p / c * y_prec;
  const double tr_inv_pi = p / c * y_target;
  const double pi_fro_sq = target.frobenius_sq();
  const double tr_prec_pi = frobenius_inner(truth.precision(), target.matrix());

  const double det = inv_fro_sq * pi_fro_sq - tr_inv_pi * tr_inv_pi;
  if (!(det > kDegenerateTargetTol * inv_fro_sq * pi_fro_sq))
    throw Error(ErrorCode::degenerate_target, "limit intensities undefined for this target");
  const double alpha = (tr_inv_prec * pi_fro_sq - tr_prec_pi * tr_inv_pi) / det;
  const double beta = (tr_prec_pi * inv_fro_sq - tr_inv_prec * tr_inv_pi) / det;
  return {alpha, beta, WeightsRegime::c_gt_1, Provenance::asymptotic_limit};
}

LimitReport compute_limits(const SpectrumSpec& spec, const CovarianceModel& truth,
                           const std::optional<TargetMatrix>& target, double c) {
  if (!(c > 0.0) || c == 1.0 || !std::isfinite(c))
    throw Error(ErrorCode::invalid_input, "c must be positive and different from 1");
  LimitReport report;
  report.functionals.c = c;
  if (c < 1.0) {
    report.functionals.psi = psi_limit(spec, c);
    if (target) report.weights = limit_weights_lt1(truth, *target, c);
  } else {
    const RootSolution x0 = solve_x0(truth, c);
    report.functionals.x0 = x0;
    report.functionals.x0_prime = x0_prime(truth, c, x0.value);
    if (target) {
      report.y_target = solve_y(truth, target->matrix(), c);
      report.weights = limit_weights_gt1(truth, *target, c);
    }
  }
  return report;
}

}  // namespace precshrink
