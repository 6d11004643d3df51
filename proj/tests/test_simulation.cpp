#include "precshrink/error.hpp"
#include "precshrink/io.hpp"
#include "precshrink/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace precshrink;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.name = "small";
  cfg.spectrum = *named_spectrum("sigmaH");
  cfg.targets = {TargetSpec::identity_over_p(), TargetSpec::true_precision()};
  cfg.c = 0.5;
  cfg.p_grid = {10, 20};
  cfg.replications = 12;
  cfg.seed = 99;
  cfg.estimators = {"sample_inv", "olse_precision", "olse_precision_oracle", "olse_cov_inv", "ev_oracle"};
  return cfg;
}

std::string csv_of(const ExperimentConfig& cfg, int threads) {
  std::ostringstream out;
  write_results_csv(out, result_rows(cfg, run_experiment(cfg, {threads, false})));
  return out.str();
}

}  // namespace

TEST_CASE("distribution validation") {
  CHECK_NOTHROW(DistributionSpec::gaussian().validate());
  CHECK_NOTHROW(DistributionSpec::student_t(10).validate());
  CHECK_THROWS_AS(DistributionSpec::student_t(2).validate(), Error);
  CHECK_THROWS_AS(DistributionSpec::student_t(3).validate(), Error);
  auto heavy = DistributionSpec::student_t(3);
  heavy.allow_heavy_tails = true;
  CHECK_NOTHROW(heavy.validate());
  heavy.degrees_of_freedom = 1.5;
  CHECK_THROWS_AS(heavy.validate(), Error);
}

TEST_CASE("generated data") {
  const auto truth = build_covariance(SpectrumSpec::identity(), 10);
  std::mt19937_64 a(7), b(7);
  const auto ya = generate_data(truth, 1000, DistributionSpec::gaussian(), a);
  const auto yb = generate_data(truth, 1000, DistributionSpec::gaussian(), b);
  CHECK((ya - yb).norm() == 0.0);
  CHECK(norms(SampleStats::from_data(ya).covariance() - Eigen::MatrixXd::Identity(10, 10)).spectral < 0.3);

  // unit variance after Student-t scaling
  const auto one = build_covariance(SpectrumSpec::identity(), 1);
  std::mt19937_64 rng(8);
  const auto t = generate_data(one, 400000, DistributionSpec::student_t(10), rng);
  const double var = t.squaredNorm() / t.size();
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(t.mean()) < 0.01);
}

TEST_CASE("substreams are distinct") {
  CHECK(substream_seed(1, 10, 0) != substream_seed(1, 10, 1));
  CHECK(substream_seed(1, 10, 0) != substream_seed(1, 11, 0));
  CHECK(substream_seed(1, 10, 0) != substream_seed(2, 10, 0));
  CHECK(substream_seed(1, 10, 0) == substream_seed(1, 10, 0));
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.sample_size(10) == 20);
  cfg.c = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.seed.reset();
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.estimators = {"nonsense"};
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("run_experiment: baseline and perfect estimator") {
  const auto cfg = small_config();
  const auto runs = run_experiment(cfg);
  REQUIRE(runs.size() == 2);
  for (const auto& run : runs) {
    const auto& r = run.report;
    CHECK(r.baseline_id == "sample_inv");
    CHECK(r.n == 2 * r.p);
    CHECK(r.find("sample_inv")->prial_percent == 0.0);
    const auto* perfect = r.find("olse_precision_oracle", "true_precision");
    REQUIRE(perfect != nullptr);
    CHECK(perfect->prial_percent == 100.0);
    CHECK(perfect->mean_loss == 0.0);
    for (const auto& s : r.estimators) {
      CHECK(s.status == RowStatus::ok);
      CHECK(s.replications == 12);
      CHECK(s.mean_loss >= 0.0);
      CHECK(std::isfinite(s.mean_loss));
    }
  }
}

TEST_CASE("run_experiment: regime routing and skipped rows") {
  auto cfg = small_config();
  cfg.c = 2.0;
  cfg.targets = {TargetSpec::identity_over_p()};
  cfg.estimators = {"sample_inv", "sample_pinv", "olse_precision", "olse_precision_oracle", "ev_oracle"};
  const auto runs = run_experiment(cfg);
  for (const auto& run : runs) {
    const auto& r = run.report;
    CHECK(r.baseline_id == "sample_pinv");
    CHECK(r.find("sample_inv")->status == RowStatus::skipped);
    CHECK_FALSE(r.find("sample_inv")->reason.empty());
    CHECK(r.find("olse_precision", "identity_over_p")->status == RowStatus::skipped);
    CHECK(r.find("olse_precision_oracle", "identity_over_p")->status == RowStatus::ok);
    CHECK(r.find("ev_oracle")->status == RowStatus::ok);
  }

  cfg = small_config();
  cfg.c = 0.96;
  cfg.p_grid = {48};
  const auto near = run_experiment(cfg);
  CHECK(near[0].report.find("olse_precision", "identity_over_p")->status == RowStatus::skipped);
}

TEST_CASE("run_experiment is independent of the thread count") {
  const auto cfg = small_config();
  const std::string one = csv_of(cfg, 1);
  CHECK(one == csv_of(cfg, 8));
  CHECK(one == csv_of(cfg, 3));
  auto other = cfg;
  other.seed = 100;
  CHECK(one != csv_of(other, 1));
}

TEST_CASE("builtin experiments") {
  const auto all = builtin_experiments();
  CHECK(all.size() == 6);
  const auto fig1 = *find_builtin("fig1");
  const auto& atoms = fig1.spectrum.atoms();
  REQUIRE(atoms.size() == 3);
  CHECK(atoms[0].weight == 0.2);
  CHECK(atoms[0].eigenvalue == 1.0);
  CHECK(atoms[1].eigenvalue == 3.0);
  CHECK(atoms[2].eigenvalue == 10.0);
  CHECK(fig1.c == doctest::Approx(1.0 / 3.0));

  const auto fig2 = *find_builtin("fig2");
  const TargetSpec* prior4 = nullptr;
  for (const auto& t : fig2.targets)
    if (t.name == "prior4") prior4 = &t;
  REQUIRE(prior4 != nullptr);
  const auto& p4 = prior4->prior->atoms();
  REQUIRE(p4.size() == 3);
  CHECK(p4[0].weight == 0.2);
  CHECK(p4[0].eigenvalue == 0.1);
  CHECK(p4[1].eigenvalue == 1.0);
  CHECK(p4[2].eigenvalue == 1000.0);

  auto fig5 = *find_builtin("fig5");
  CHECK(fig5.c == 1.5);
  fig5.p_grid = {12};
  fig5.replications = 2;
  CHECK(run_experiment(fig5)[0].report.baseline_id == "sample_pinv");

  CHECK(find_builtin("fig3a")->c == 0.5);
  CHECK(find_builtin("fig3b")->c == 0.8);
  CHECK(find_builtin("fig4")->distribution.kind == DistributionKind::student_t);
  CHECK(find_builtin("fig4")->distribution.degrees_of_freedom == 10.0);
  CHECK_FALSE(find_builtin("fig9").has_value());
  for (const auto& cfg : all) CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("Monte Carlo consistency of the functional estimators") {
  // Sigma = I, Theta = I/p, p = 100, n = 300
  const auto truth = build_covariance(SpectrumSpec::identity(), 100);
  std::mt19937_64 rng(3);
  MeanAccumulator theta;
  for (int r = 0; r < 60; ++r) {
    const auto stats = SampleStats::from_data(generate_data(truth, 300, DistributionSpec::gaussian(), rng));
    theta.add(theta_hat(stats, Eigen::MatrixXd::Identity(100, 100) / 100));
  }
  CHECK(theta.mean() == doctest::Approx(1.0).epsilon(0.03));

  MeanAccumulator rho;
  for (int r = 0; r < 60; ++r)
    rho.add(rho_hat(SampleStats::from_data(generate_data(truth, 200, DistributionSpec::gaussian(), rng))));
  CHECK(rho.mean() == doctest::Approx(1.0).epsilon(0.05));
}
