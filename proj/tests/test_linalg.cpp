#include "precshrink/error.hpp"
#include "precshrink/linalg.hpp"

#include <doctest.h>

#include <random>

using namespace precshrink;
using Eigen::MatrixXd;

namespace {

MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

}  // namespace

TEST_CASE("norms") {
  auto n = norms(MatrixXd::Identity(3, 3));
  CHECK(n.frobenius_sq == doctest::Approx(3));
  CHECK(n.trace_norm == doctest::Approx(3));
  CHECK(n.spectral == doctest::Approx(1));

  n = norms(Eigen::Vector2d(1, -2).asDiagonal().toDenseMatrix());
  CHECK(n.frobenius_sq == doctest::Approx(5));
  CHECK(n.trace_norm == doctest::Approx(3));
  CHECK(n.spectral == doctest::Approx(2));

  n = norms(Eigen::Vector2d(1, 3).asDiagonal().toDenseMatrix());
  CHECK(n.frobenius_sq == doctest::Approx(10));
  CHECK(n.trace_norm == doctest::Approx(4));
  CHECK(n.spectral == doctest::Approx(3));

  // non-symmetric: singular values of [[0,2],[0,0]] are 2, 0
  MatrixXd a(2, 2);
  a << 0, 2, 0, 0;
  n = norms(a);
  CHECK(n.frobenius_sq == doctest::Approx(4));
  CHECK(n.trace_norm == doctest::Approx(2));
  CHECK(n.spectral == doctest::Approx(2));

  CHECK(frobenius_inner(a, a) == doctest::Approx(4));
}

TEST_CASE("sample covariance") {
  const auto stats = SampleStats::from_data(MatrixXd::Identity(2, 2));
  CHECK(stats.covariance().isApprox(0.5 * MatrixXd::Identity(2, 2)));
  CHECK(stats.regime() == Regime::pseudo);  // p = n

  const auto big = SampleStats::from_data(gaussian(10, 1000, 3));
  CHECK(big.regime() == Regime::invertible);
  CHECK(norms(big.covariance() - MatrixXd::Identity(10, 10)).spectral < 0.3);

  const auto wide = SampleStats::from_data(gaussian(4, 2, 5));
  CHECK(wide.regime() == Regime::pseudo);
  CHECK(wide.rank() == 2);
  int nonzero = 0;
  for (int i = 0; i < 4; ++i) nonzero += wide.eigenvalues()(i) > rank_tolerance(wide.eigenvalues());
  CHECK(nonzero == 2);

  // constant rows: singular in the p < n regime is an error, not a fallback
  CHECK_THROWS_AS(SampleStats::from_data(MatrixXd::Ones(3, 10)), Error);
  try {
    SampleStats::from_data(MatrixXd::Ones(3, 10));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_matrix);
  }

  MatrixXd bad = gaussian(2, 5, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SampleStats::from_data(bad), Error);
  CHECK_THROWS_AS(SampleStats::from_data(gaussian(2, 1, 1)), Error);
}

TEST_CASE("centering removes the row mean") {
  MatrixXd y = gaussian(3, 50, 8);
  MatrixXd shifted = y.colwise() + Eigen::Vector3d(5, -2, 1);
  const auto a = SampleStats::from_data(y, true);
  const auto b = SampleStats::from_data(shifted, true);
  CHECK(a.covariance().isApprox(b.covariance(), 1e-10));
}

TEST_CASE("pseudo-inverse") {
  const auto pinv = pseudo_inverse(symmetric_eigen(Eigen::Vector2d(2, 0).asDiagonal().toDenseMatrix()));
  CHECK(pinv.matrix.isApprox(Eigen::Vector2d(0.5, 0).asDiagonal().toDenseMatrix()));
  CHECK(pinv.rank == 1);
  CHECK_FALSE(pinv.degenerate);

  const auto zero = pseudo_inverse(symmetric_eigen(MatrixXd::Zero(3, 3)));
  CHECK(zero.degenerate);
  CHECK(zero.matrix.isZero());

  const auto full = SampleStats::from_data(gaussian(5, 40, 2));
  CHECK((full.inverse() - spd_inverse(full.covariance())).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((full.inverse() - full.covariance().inverse()).cwiseAbs().maxCoeff() < 1e-10);

  // Moore-Penrose identities
  const auto wide = SampleStats::from_data(gaussian(12, 5, 9));
  const MatrixXd& s = wide.covariance();
  const MatrixXd& sp = wide.inverse();
  CHECK((s * sp * s - s).norm() < 1e-10 * s.norm());
  CHECK((sp * s * sp - sp).norm() < 1e-10 * sp.norm());
  CHECK(((s * sp).transpose() - s * sp).norm() < 1e-10);
  CHECK(((sp * s).transpose() - sp * s).norm() < 1e-10);

  // (kS)^+ = S^+ / k
  const auto scaled = SampleStats::from_covariance(3.0 * s, 5);
  CHECK((scaled.inverse() * 3.0 - sp).norm() < 1e-10 * sp.norm());
}

TEST_CASE("dual covariance shares the nonzero spectrum") {
  const MatrixXd y = gaussian(12, 5, 4);
  const auto wide = SampleStats::from_data(y);
  const Eigen::VectorXd dual = symmetric_eigen(y.transpose() * y / 5.0).values;
  for (int i = 0; i < 5; ++i) CHECK(wide.eigenvalues()(7 + i) == doctest::Approx(dual(i)).epsilon(1e-10));
}

TEST_CASE("trace of inverse times theta") {
  const auto stats = SampleStats::from_data(gaussian(6, 30, 12));
  const MatrixXd theta = gaussian(6, 6, 13);
  const MatrixXd sym = theta * theta.transpose();
  CHECK(stats.trace_inverse_times(sym) == doctest::Approx((stats.inverse() * sym).trace()).epsilon(1e-10));
  CHECK(stats.inverse_frobenius_sq() == doctest::Approx(stats.inverse().squaredNorm()).epsilon(1e-10));
  CHECK(stats.inverse_trace_norm() == doctest::Approx(stats.inverse().trace()).epsilon(1e-10));
}

TEST_CASE("spd_inverse rejects singular input") {
  CHECK_THROWS_AS(spd_inverse(MatrixXd::Ones(3, 3)), Error);
}
