#include "precshrink/error.hpp"
#include "precshrink/spectrum.hpp"

#include <doctest.h>

#include <cmath>

using namespace precshrink;

namespace {

SpectrumSpec three_atom() { return SpectrumSpec({{0.2, 1.0}, {0.4, 3.0}, {0.4, 10.0}}); }

int count_equal(const Eigen::VectorXd& v, double x) {
  int k = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) k += v(i) == x;
  return k;
}

}  // namespace

TEST_CASE("spectrum validation") {
  CHECK_THROWS_AS(SpectrumSpec({}), Error);
  CHECK_THROWS_AS(SpectrumSpec({{0.5, 1.0}, {0.4, 2.0}}), Error);
  CHECK_THROWS_AS(SpectrumSpec({{1.0, 0.0}}), Error);
  CHECK_THROWS_AS(SpectrumSpec({{1.2, 1.0}, {-0.2, 2.0}}), Error);
  CHECK_NOTHROW(three_atom());
}

TEST_CASE("apportionment by largest remainder") {
  CHECK(apportion({0.2, 0.4, 0.4}, 10) == std::vector<int>{2, 4, 4});
  // raw 1.4, 2.8, 2.8: floors 1,2,2 then the two .8 remainders win
  CHECK(apportion({0.2, 0.4, 0.4}, 7) == std::vector<int>{1, 3, 3});
  // equal remainders: earlier atom first
  CHECK(apportion({0.5, 0.5}, 3) == std::vector<int>{2, 1});
  CHECK(apportion({1.0 / 3, 1.0 / 3, 1.0 / 3}, 3) == std::vector<int>{1, 1, 1});

  for (int p = 1; p <= 60; ++p) {
    const auto counts = apportion({0.2, 0.4, 0.4}, p);
    int total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      total += counts[i];
      CHECK(std::abs(counts[i] / double(p) - std::vector{0.2, 0.4, 0.4}[i]) <= 1.0 / p);
    }
    CHECK(total == p);
  }
}

TEST_CASE("build_covariance") {
  const auto sigma = build_covariance(three_atom(), 10);
  const auto& ev = sigma.eigenvalues();
  CHECK(count_equal(ev, 1.0) == 2);
  CHECK(count_equal(ev, 3.0) == 4);
  CHECK(count_equal(ev, 10.0) == 4);
  CHECK(sigma.is_diagonal());
  CHECK(sigma.covariance().isApprox(Eigen::MatrixXd(ev.asDiagonal())));
  for (Eigen::Index i = 1; i < ev.size(); ++i) CHECK(ev(i - 1) <= ev(i));

  const auto seven = apportioned_eigenvalues(three_atom(), 7);
  CHECK(count_equal(seven, 1.0) == 1);
  CHECK(count_equal(seven, 3.0) == 3);
  CHECK(count_equal(seven, 10.0) == 3);

  const auto scaled = build_covariance(SpectrumSpec::scaled_identity(2.5), 5);
  CHECK((scaled.covariance() - 2.5 * Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);
  CHECK(scaled.precision().isApprox(0.4 * Eigen::MatrixXd::Identity(5, 5)));
  CHECK(scaled.precision_frobenius_sq() == doctest::Approx(5 * 0.16));
  CHECK(scaled.precision_trace_norm() == doctest::Approx(2.0));
}

TEST_CASE("rotated covariance") {
  const double s = std::sqrt(0.5);
  Eigen::MatrixXd u(2, 2);
  u << s, -s, s, s;
  const CovarianceModel model(Eigen::Vector2d(1.0, 3.0), u);
  CHECK_FALSE(model.is_diagonal());
  CHECK((model.covariance() * model.precision()).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));
  const Eigen::MatrixXd root = model.sqrt_covariance();
  CHECK((root * root).isApprox(model.covariance(), 1e-12));
  CHECK((model.inv_sqrt_covariance() * root).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));

  Eigen::MatrixXd skew(2, 2);
  skew << 1, 0.1, 0, 1;
  CHECK_THROWS_AS(CovarianceModel(Eigen::Vector2d(1.0, 3.0), skew), Error);
  CHECK_THROWS_AS(CovarianceModel(Eigen::Vector2d(1.0, -3.0)), Error);
}

TEST_CASE("spectral moments") {
  auto m = spectral_moments(SpectrumSpec::identity());
  CHECK(m.m1_inv == doctest::Approx(1.0));
  CHECK(m.m2_inv == doctest::Approx(1.0));
  m = spectral_moments(SpectrumSpec::scaled_identity(2.0));
  CHECK(m.m1_inv == doctest::Approx(0.5));
  CHECK(m.m2_inv == doctest::Approx(0.25));
  m = spectral_moments(three_atom());
  CHECK(m.m1_inv == doctest::Approx(0.2 + 0.4 / 3 + 0.04).epsilon(1e-14));
  CHECK(m.m2_inv == doctest::Approx(0.2 + 0.4 / 9 + 0.004).epsilon(1e-14));
}
