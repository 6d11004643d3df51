#include "precshrink/error.hpp"
#include "precshrink/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace precshrink;

namespace {

const char* kConfig = R"(# custom run
[experiment]
name = custom
c = 0.5
p_grid = 8, 16
replications = 5
seed = 7
estimators = sample_inv, olse_precision, ev_oracle

[distribution]
kind = student_t
df = 10

[spectrum]
atom = 0.2, 1
atom = 0.8, 3

[target flat]
kind = identity_over_p

[target sep]
kind = prior
name = sigmaH0
)";

std::string parse_error_text(const std::string& text) {
  try {
    parse_config(text, "cfg.ini");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kConfig);
  CHECK(cfg.name == "custom");
  CHECK(cfg.c == 0.5);
  CHECK(cfg.p_grid == std::vector<int>{8, 16});
  CHECK(cfg.replications == 5);
  CHECK(cfg.seed == 7u);
  CHECK(cfg.estimators.size() == 3);
  CHECK(cfg.distribution.kind == DistributionKind::student_t);
  CHECK(cfg.distribution.degrees_of_freedom == 10.0);
  REQUIRE(cfg.spectrum.atoms().size() == 2);
  CHECK(cfg.spectrum.atoms()[1].eigenvalue == 3.0);
  REQUIRE(cfg.targets.size() == 2);
  CHECK(cfg.targets[0].name == "flat");
  CHECK(cfg.targets[1].kind == TargetKind::prior);
  CHECK(cfg.targets[1].prior.has_value());
}

TEST_CASE("config errors carry line and field") {
  std::string cfg = kConfig;
  cfg.replace(cfg.find("c = 0.5"), 7, "c = abc");
  auto msg = parse_error_text(cfg);
  CHECK(msg.find("cfg.ini:4") != std::string::npos);
  CHECK(msg.find("c") != std::string::npos);

  msg = parse_error_text("[experiment]\nbogus = 1\n");
  CHECK(msg.find("cfg.ini:2") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);

  msg = parse_error_text("[nowhere]\n");
  CHECK(msg.find("cfg.ini:1") != std::string::npos);

  msg = parse_error_text("[experiment]\nname\n");
  CHECK(msg.find("cfg.ini:2") != std::string::npos);

  cfg = kConfig;
  cfg.replace(cfg.find("atom = 0.8, 3"), 13, "atom = 0.7, 3");
  msg = parse_error_text(cfg);
  CHECK(msg.find("spectrum") != std::string::npos);
}

TEST_CASE("spectrum text and json") {
  auto s = parse_spectrum_text("0.2:1, 0.4:3, 0.4:10");
  REQUIRE(s.atoms().size() == 3);
  CHECK(s.atoms()[2].eigenvalue == 10.0);
  CHECK(parse_spectrum_text("sigmaH").atoms().size() == 3);
  CHECK_THROWS_AS(parse_spectrum_text("0.2-1"), Error);
  CHECK_THROWS_AS(parse_spectrum_text("unknown_name"), Error);

  const auto path = std::filesystem::temp_directory_path() / "precshrink_spec_test.json";
  {
    std::ofstream out(path);
    out << R"([{"weight": 0.2, "eigenvalue": 1}, {"weight": 0.8, "eigenvalue": 2}])";
  }
  s = load_spectrum_json(path.string());
  CHECK(s.atoms()[1].weight == 0.8);
  {
    std::ofstream out(path);
    out << R"([{"weight": 0.2}])";
  }
  CHECK_THROWS_AS(load_spectrum_json(path.string()), Error);
  std::filesystem::remove(path);
}

TEST_CASE("matrix csv") {
  std::istringstream ok("1,2,3\n4,5,6\n\n");
  const auto m = read_matrix_csv(ok);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);

  std::istringstream ragged("1,2,3\n4,5\n");
  try {
    read_matrix_csv(ragged, "data.csv");
    FAIL("expected ragged error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("data.csv:2") != std::string::npos);
  }
  std::istringstream text("1,2\n3,x\n");
  try {
    read_matrix_csv(text, "data.csv");
    FAIL("expected non-numeric error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("data.csv:2") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }

  Eigen::MatrixXd r(2, 2);
  r << 0.1, 1.0 / 3.0, -2.5e-300, 7e12;
  std::stringstream buf;
  write_matrix_csv(buf, r);
  CHECK((read_matrix_csv(buf) - r).norm() == 0.0);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -1e-300, 123456789.123456789, 100.0})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()).empty());
}

TEST_CASE("results csv round-trip") {
  auto cfg = parse_config(kConfig);
  cfg.replications = 3;
  const auto rows = result_rows(cfg, run_experiment(cfg));
  CHECK(rows.size() == 2 * 4);  // per p: baseline, olse_precision x 2 targets, ev_oracle
  std::stringstream buf;
  write_results_csv(buf, rows);
  CHECK(buf.str().rfind(kResultHeader, 0) == 0);
  const auto back = read_results_csv(buf);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].experiment == rows[i].experiment);
    CHECK(back[i].p == rows[i].p);
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].c == rows[i].c);
    CHECK(back[i].distribution == rows[i].distribution);
    CHECK(back[i].estimator_id == rows[i].estimator_id);
    CHECK(back[i].target == rows[i].target);
    CHECK(back[i].mean_loss == rows[i].mean_loss);
    CHECK(back[i].prial_percent == rows[i].prial_percent);
    if (std::isnan(rows[i].mean_alpha)) {
      CHECK(std::isnan(back[i].mean_alpha));
    } else {
      CHECK(back[i].mean_alpha == rows[i].mean_alpha);
      CHECK(back[i].mean_beta == rows[i].mean_beta);
    }
    CHECK(back[i].replications == rows[i].replications);
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].status == rows[i].status);
  }
}
