#pragma once

#include "precshrink/estimators.hpp"
#include "precshrink/spectrum.hpp"

#include <Eigen/Dense>

#include <optional>

namespace precshrink {

/// Root of 1/x = (c/p) sum_i 1/(a_i + x) with solver diagnostics.
struct RootSolution {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool used_bisection = false;
};

struct SolverOptions {
  double damping = 0.5;
  int max_iterations = 10000;
  double step_tolerance = 1e-12;
  double residual_tolerance = 1e-10;
};

/// Solves 1/x = (c/p) sum 1/(a_i + x) for x > 0 given a_i >= 0 and c > 1.
///
/// Damped fixed-point iteration x <- p / (c sum 1/(a_i + x)) started at
/// mean(a)/(c - 1); falls back to bisection over [1e-12, 1e12] when the
/// iteration diverges, oscillates or stalls above the residual tolerance.
RootSolution solve_resolvent_root(const Eigen::VectorXd& shifts, double c,
                                  const SolverOptions& options = {});

/// Deterministic equivalents of the sample-inverse functionals.
struct LimitFunctionals {
  double c = 0.0;
  // c < 1
  std::optional<double> psi;
  // c > 1
  std::optional<RootSolution> x0;
  std::optional<double> x0_prime;
};

/// Limit of (1/p) ||S^{-1}||_F^2 for 0 < c < 1.
double psi_limit(const SpectrumSpec& spec, double c);

/// Asymptotic optimal intensities for 0 < c < 1.
ShrinkageWeights limit_weights_lt1(const CovarianceModel& truth, const TargetMatrix& target, double c);

/// x(0) for c > 1; traces run over the eigenvalues of Sigma.
RootSolution solve_x0(const CovarianceModel& truth, double c, const SolverOptions& options = {});

/// x'(0) = 1 / (1/x0^2 - (c/p) tr[(Sigma^{-1} + x0 I)^{-2}]); c^{-1} x'(0) is the
/// limit of (1/p) ||S^+||_F^2.
double x0_prime(const CovarianceModel& truth, double c, double x0);

/// y(Theta) for symmetric positive definite Theta and c > 1, solved on the
/// eigenvalues of Sigma^{-1/2} Theta Sigma^{-1/2}. c^{-1} y is the claimed limit
/// of (1/p) tr(Theta S^+).
RootSolution solve_y(const CovarianceModel& truth, const Eigen::MatrixXd& theta, double c,
                     const SolverOptions& options = {});

/// Closed-form y for the rank-one Theta = xi eta': (1/(c-1)) eta' Sigma^{-1} xi.
double rank_one_y(const CovarianceModel& truth, const Eigen::VectorXd& xi,
                  const Eigen::VectorXd& eta, double c);

/// Asymptotic optimal intensities for c > 1, obtained by substituting
/// tr(Theta S^+) -> p c^{-1} y(Theta) and ||S^+||_F^2 -> p c^{-1} x'(0) into the
/// oracle formulas.
ShrinkageWeights limit_weights_gt1(const CovarianceModel& truth, const TargetMatrix& target, double c);

/// Everything the `limits` subcommand reports for one (spectrum, c, target).
struct LimitReport {
  LimitFunctionals functionals;
  std::optional<RootSolution> y_target;
  std::optional<ShrinkageWeights> weights;
};

LimitReport compute_limits(const SpectrumSpec& spec, const CovarianceModel& truth,
                           const std::optional<TargetMatrix>& target, double c);

}  // namespace precshrink
