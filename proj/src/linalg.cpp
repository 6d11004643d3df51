#include "precshrink/linalg.hpp"

#include "precshrink/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace precshrink {

const char* to_string(Regime regime) noexcept {
  return regime == Regime::invertible ? "invertible" : "pseudo";
}

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::non_convergence, "symmetric eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double rank_tolerance(const Eigen::VectorXd& ascending_values) {
  const auto p = ascending_values.size();
  if (p == 0) return 0.0;
  const double top = std::max(0.0, ascending_values(p - 1));
  return static_cast<double>(p) * std::numeric_limits<double>::epsilon() * top;
}

namespace {

Eigen::VectorXd reciprocal_above(const Eigen::VectorXd& values, double tol, int& rank) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(values.size());
  rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > tol) {
      g(i) = 1.0 / values(i);
      ++rank;
    }
  }
  return g;
}

Eigen::MatrixXd reassemble(const Eigen::MatrixXd& u, const Eigen::VectorXd& d) {
  Eigen::MatrixXd m = u * d.asDiagonal() * u.transpose();
  return 0.5 * (m + m.transpose());
}

}  // namespace

PseudoInverse pseudo_inverse(const SymmetricEigen& eig) {
  PseudoInverse out;
  const Eigen::VectorXd g = reciprocal_above(eig.values, rank_tolerance(eig.values), out.rank);
  out.degenerate = out.rank == 0;
  out.matrix = reassemble(eig.vectors, g);
  return out;
}

MatrixNorms norms(const Eigen::MatrixXd& a) {
  MatrixNorms out{};
  out.frobenius_sq = frobenius_inner(a, a);
  if (a.rows() == a.cols() && a.isApprox(a.transpose(), 1e-14)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = solver.eigenvalues().cwiseAbs();
    out.trace_norm = ev.sum();
    out.spectral = ev.size() ? ev.maxCoeff() : 0.0;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd& sv = svd.singularValues();
    out.trace_norm = sv.sum();
    out.spectral = sv.size() ? sv.maxCoeff() : 0.0;
  }
  return out;
}

double frobenius_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

SampleStats SampleStats::from_data(const DataMatrix& y, bool center) {
  if (y.rows() < 1 || y.cols() < 2)
    throw Error(ErrorCode::invalid_input, "data matrix needs p >= 1 variables and n >= 2 observations");
  if (!y.allFinite()) throw Error(ErrorCode::invalid_input, "data matrix has non-finite entries");
  const auto n = y.cols();
  Eigen::MatrixXd s(y.rows(), y.rows());
  if (center) {
    const Eigen::MatrixXd yc = y.colwise() - y.rowwise().mean();
    s.setZero();
    s.selfadjointView<Eigen::Lower>().rankUpdate(yc, 1.0 / static_cast<double>(n));
  } else {
    s.setZero();
    s.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / static_cast<double>(n));
  }
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SampleStats(std::move(s), static_cast<int>(n));
}

SampleStats SampleStats::from_covariance(Eigen::MatrixXd s, int n) {
  if (s.rows() != s.cols() || s.rows() < 1)
    throw Error(ErrorCode::invalid_input, "sample covariance must be a non-empty square matrix");
  if (n < 1) throw Error(ErrorCode::invalid_input, "observation count must be positive");
  if (!s.allFinite()) throw Error(ErrorCode::invalid_input, "sample covariance has non-finite entries");
  return SampleStats(std::move(s), n);
}

SampleStats::SampleStats(Eigen::MatrixXd s, int n) : s_(std::move(s)), n_(n) {
  eig_ = symmetric_eigen(s_);
  const double tol = rank_tolerance(eig_.values);
  if (p() < n_) {
    if (!(eig_.values(0) > tol))
      throw Error(ErrorCode::singular_matrix,
                  "sample covariance is numerically singular although p < n (smallest eigenvalue " +
                      std::to_string(eig_.values(0)) + ")");
    regime_ = Regime::invertible;
  } else {
    regime_ = Regime::pseudo;
  }
  inv_values_ = reciprocal_above(eig_.values, tol, inv_.rank);
  inv_.degenerate = inv_.rank == 0;
  inv_.matrix = reassemble(eig_.vectors, inv_values_);
  inv_frobenius_sq_ = inv_values_.squaredNorm();
  inv_trace_norm_ = inv_values_.sum();
}

double SampleStats::trace_inverse_times(const Eigen::MatrixXd& theta) const {
  if (theta.rows() != p() || theta.cols() != p())
    throw Error(ErrorCode::invalid_input, "matrix dimension does not match the sample");
  const Eigen::MatrixXd& u = eig_.vectors;
  const Eigen::VectorXd quad = (u.cwiseProduct(theta * u)).colwise().sum().transpose();
  return quad.dot(inv_values_);
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::singular_matrix, "matrix is not numerically positive definite");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  if (!inv.allFinite()) throw Error(ErrorCode::singular_matrix, "matrix inverse is not finite");
  return 0.5 * (inv + inv.transpose());
}

}  // namespace precshrink
