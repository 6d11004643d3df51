#include "precshrink/spectrum.hpp"

#include "precshrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace precshrink {

SpectrumSpec::SpectrumSpec(std::vector<SpectralAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error(ErrorCode::invalid_input, "spectrum has no atoms");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.weight) || a.weight < 0.0 || a.weight > 1.0)
      throw Error(ErrorCode::invalid_input,
                  "spectrum weight must lie in [0, 1], got " + std::to_string(a.weight));
    if (!std::isfinite(a.eigenvalue) || a.eigenvalue <= 0.0)
      throw Error(ErrorCode::invalid_input,
                  "spectrum eigenvalue must be positive, got " + std::to_string(a.eigenvalue));
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::invalid_input,
                "spectrum weights sum to " + std::to_string(total) + ", expected 1");
}

SpectralMoments spectral_moments(const SpectrumSpec& spec) {
  SpectralMoments m{0.0, 0.0};
  for (const auto& a : spec.atoms()) {
    m.m1_inv += a.weight / a.eigenvalue;
    m.m2_inv += a.weight / (a.eigenvalue * a.eigenvalue);
  }
  return m;
}

std::vector<int> apportion(const std::vector<double>& weights, int p) {
  if (p < 1) throw Error(ErrorCode::invalid_input, "dimension must be positive");
  const auto k = weights.size();
  std::vector<int> counts(k);
  std::vector<double> remainders(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double raw = weights[i] * p;
    // Guard against 2.9999999999999996-style products landing one seat short.
    const double whole = std::floor(raw + 1e-9);
    counts[i] = static_cast<int>(whole);
    remainders[i] = std::max(0.0, raw - whole);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t j = 0; assigned < p; ++j, ++assigned) ++counts[order[j % k]];
  // Rounding guard can overshoot when weights carry excess mass; trim from the back.
  for (std::size_t j = k; assigned > p && j-- > 0;) {
    while (assigned > p && counts[j] > 0) {
      --counts[j];
      --assigned;
    }
  }
  return counts;
}

Eigen::VectorXd apportioned_eigenvalues(const SpectrumSpec& spec, int p) {
  auto atoms = spec.atoms();
  std::stable_sort(atoms.begin(), atoms.end(), [](const SpectralAtom& a, const SpectralAtom& b) {
    return a.eigenvalue < b.eigenvalue;
  });
  std::vector<double> weights;
  weights.reserve(atoms.size());
  for (const auto& a : atoms) weights.push_back(a.weight);
  const auto counts = apportion(weights, p);

  Eigen::VectorXd tau(p);
  int pos = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (int j = 0; j < counts[i]; ++j) tau(pos++) = atoms[i].eigenvalue;
  return tau;
}

CovarianceModel::CovarianceModel(Eigen::VectorXd eigenvalues, std::optional<Eigen::MatrixXd> basis)
    : eigenvalues_(std::move(eigenvalues)) {
  const auto p = eigenvalues_.size();
  if (p < 1) throw Error(ErrorCode::invalid_input, "covariance dimension must be positive");
  if (!(eigenvalues_.array() > 0.0).all() || !eigenvalues_.allFinite())
    throw Error(ErrorCode::invalid_input, "covariance eigenvalues must be finite and positive");

  diagonal_ = !basis.has_value();
  if (basis) {
    if (basis->rows() != p || basis->cols() != p)
      throw Error(ErrorCode::invalid_input, "basis dimension does not match the spectrum");
    const Eigen::MatrixXd gram = basis->transpose() * *basis;
    const double err = (gram - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    if (err > 1e-10)
      throw Error(ErrorCode::invalid_input, "basis is not orthonormal (max |B'B - I| = " +
                                                std::to_string(err) + ")");
    basis_ = std::move(*basis);
    diagonal_ = basis_.isIdentity(0.0);
  } else {
    basis_ = Eigen::MatrixXd::Identity(p, p);
  }

  const Eigen::VectorXd inv = eigenvalues_.cwiseInverse();
  if (diagonal_) {
    sigma_ = eigenvalues_.asDiagonal();
    sigma_inv_ = inv.asDiagonal();
  } else {
    sigma_ = basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
    sigma_inv_ = basis_ * inv.asDiagonal() * basis_.transpose();
    sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
    sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
  }
  precision_frobenius_sq_ = inv.squaredNorm();
  precision_trace_norm_ = inv.sum();
}

Eigen::MatrixXd CovarianceModel::sqrt_covariance() const {
  const Eigen::VectorXd root = eigenvalues_.cwiseSqrt();
  if (diagonal_) return root.asDiagonal();
  return basis_ * root.asDiagonal() * basis_.transpose();
}

Eigen::MatrixXd CovarianceModel::inv_sqrt_covariance() const {
  const Eigen::VectorXd root = eigenvalues_.cwiseSqrt().cwiseInverse();
  if (diagonal_) return root.asDiagonal();
  return basis_ * root.asDiagonal() * basis_.transpose();
}

CovarianceModel build_covariance(const SpectrumSpec& spec, int p,
                                 std::optional<Eigen::MatrixXd> basis) {
  return CovarianceModel(apportioned_eigenvalues(spec, p), std::move(basis));
}

}  // namespace precshrink
