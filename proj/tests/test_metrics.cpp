#include "precshrink/error.hpp"
#include "precshrink/metrics.hpp"

#include <doctest.h>

using namespace precshrink;
using Eigen::MatrixXd;

TEST_CASE("frobenius loss") {
  const MatrixXd t = Eigen::Vector2d(1, 3).asDiagonal();
  CHECK(frobenius_loss(t, t) == 0.0);
  CHECK(frobenius_loss(MatrixXd::Zero(3, 3), MatrixXd::Identity(3, 3)) == doctest::Approx(3.0));
  CHECK(frobenius_loss(2 * MatrixXd::Identity(2, 2), t) == doctest::Approx(2.0));
  CHECK_THROWS_AS(frobenius_loss(MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 3)), Error);
}

TEST_CASE("prial") {
  for (double base : {0.5, 1.0, 42.0}) {
    CHECK(prial(base, base) == 0.0);
    CHECK(prial(0.0, base) == 100.0);
    CHECK(prial(2 * base, base) == doctest::Approx(-100.0));
  }
  double last = 101.0;
  for (double loss = 0.0; loss < 3.0; loss += 0.25) {
    const double v = prial(loss, 1.0);
    CHECK(v < last);
    last = v;
  }
  try {
    prial(1.0, 0.0);
    FAIL("expected undefined_prial");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined_prial);
  }
}

TEST_CASE("mean accumulator and report lookup") {
  MeanAccumulator m;
  CHECK(m.mean() == 0.0);
  for (double x : {1.0, 2.0, 6.0}) m.add(x);
  CHECK(m.count() == 3);
  CHECK(m.mean() == doctest::Approx(3.0));

  PrialReport r;
  r.estimators.push_back({"olse_precision", "identity_over_p"});
  r.estimators.push_back({"ev_oracle", ""});
  CHECK(r.find("ev_oracle") != nullptr);
  CHECK(r.find("olse_precision", "identity_over_p") != nullptr);
  CHECK(r.find("olse_precision") == nullptr);
}
