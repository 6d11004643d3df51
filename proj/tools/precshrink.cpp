// Command-line front end: simulate, estimate, limits.

#include "precshrink/asymptotics.hpp"
#include "precshrink/error.hpp"
#include "precshrink/estimators.hpp"
#include "precshrink/io.hpp"
#include "precshrink/simulation.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace ps = precshrink;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct SimulateArgs {
  std::string config;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::string p_grid;
  int threads = 1;
  std::string out;
};

struct EstimateArgs {
  std::string data;
  std::string target = "identity_over_p";
  bool center = false;
  bool clamp = false;
  bool pinv = false;
  std::string orientation = "rows";
  std::string out;
};

struct LimitsArgs {
  std::string spectrum;
  double c = 0.0;
  std::string target;
  int p = 100;
};

ps::SpectrumSpec resolve_spectrum(const std::string& text) {
  if (std::filesystem::is_regular_file(text)) return ps::load_spectrum_json(text);
  return ps::parse_spectrum_text(text);
}

// "identity_over_p", "true_precision" or "inverse-of:<spectrum>".
ps::TargetSpec resolve_target(const std::string& text) {
  if (text == "identity_over_p") return ps::TargetSpec::identity_over_p();
  if (text == "true_precision") return ps::TargetSpec::true_precision();
  constexpr std::string_view prefix = "inverse-of:";
  if (text.rfind(prefix, 0) == 0) return ps::TargetSpec::from_prior(text, resolve_spectrum(text.substr(prefix.size())));
  throw ps::Error(ps::ErrorCode::invalid_input,
                  "unknown target '" + text + "' (identity_over_p, true_precision, inverse-of:<spectrum>)");
}

int run_simulate(const SimulateArgs& args) {
  ps::ExperimentConfig cfg;
  if (std::filesystem::is_regular_file(args.config)) {
    cfg = ps::load_config(args.config);
  } else if (auto builtin = ps::find_builtin(args.config)) {
    cfg = *builtin;
  } else {
    std::cerr << "error: '" << args.config << "' is neither a config file nor a builtin experiment"
              << " (fig1, fig2, fig3a, fig3b, fig4, fig5)\n";
    return kExitUsage;
  }
  if (args.reps) cfg.replications = *args.reps;
  if (args.seed) cfg.seed = *args.seed;
  if (!args.p_grid.empty()) {
    cfg.p_grid.clear();
    std::stringstream ss(args.p_grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        const int p = std::stoi(item, &used);
        if (used != item.size() || p < 1) throw std::invalid_argument(item);
        cfg.p_grid.push_back(p);
      } catch (const std::exception&) {
        std::cerr << "error: --p-grid entry '" << item << "' is not a positive integer\n";
        return kExitUsage;
      }
    }
  }
  if (!cfg.seed) {
    std::cerr << "error: --seed is required when the config does not provide one\n";
    return kExitUsage;
  }

  const auto runs = ps::run_experiment(cfg, {args.threads, false});
  const auto rows = ps::result_rows(cfg, runs);
  if (args.out.empty()) {
    ps::write_results_csv(std::cout, rows);
  } else {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << args.out << "\n";
      return kExitUsage;
    }
    ps::write_results_csv(out, rows);
  }
  return 0;
}

int run_estimate(const EstimateArgs& args) {
  Eigen::MatrixXd y = ps::read_matrix_csv(args.data);
  if (args.orientation == "columns") y.transposeInPlace();
  const ps::SampleStats stats = ps::SampleStats::from_data(y, args.center);
  const int p = stats.p();
  // Generic data has full rank min(p, n), one less after centering.
  const int expected_rank = std::min(p, stats.n() - (args.center ? 1 : 0));
  if (stats.rank() < expected_rank)
    throw ps::Error(ps::ErrorCode::singular_matrix,
                    "sample covariance has rank " + std::to_string(stats.rank()) + " < " +
                        std::to_string(expected_rank) + " (collinear or constant data)");
  const ps::TargetSpec target_spec = resolve_target(args.target);
  if (target_spec.kind == ps::TargetKind::true_precision)
    throw ps::Error(ps::ErrorCode::invalid_input, "true_precision is an oracle target; real data has no truth");
  // Targets are laid out in the identity basis.
  const ps::CovarianceModel frame(Eigen::VectorXd::Ones(p));

  Eigen::MatrixXd estimate;
  std::string estimator;
  double alpha = 0.0;
  double beta = 0.0;
  if (stats.regime() == ps::Regime::invertible) {
    const auto result = ps::bona_fide_olse(stats, target_spec.precision_target(frame), args.clamp);
    estimate = result.matrix;
    estimator = result.estimator_id;
    alpha = result.weights.alpha;
    beta = result.weights.beta;
  } else if (args.pinv) {
    estimate = stats.inverse();
    estimator = std::string(ps::estimator_id::sample_pinv);
    alpha = 1.0;
  } else if (target_spec.kind == ps::TargetKind::identity_over_p && p > stats.n()) {
    const double sigma_inv = ps::sigma_inv_hat_identity_case(stats);
    estimate = sigma_inv * Eigen::MatrixXd::Identity(p, p);
    estimator = "olse_precision_identity_case";
    beta = p * sigma_inv;
  } else {
    std::cerr << "error: p/n = " << stats.ratio()
              << " >= 1: a feasible shrinkage estimator exists only for the identity_over_p target"
                 " (scaled-identity covariance); pass --pinv for the raw pseudo-inverse\n";
    return kExitUsage;
  }

  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << args.out << "\n";
      return kExitUsage;
    }
    ps::write_matrix_csv(out, estimate);
  }
  std::cout << "estimator = " << estimator << "\n"
            << "p = " << p << "\n"
            << "n = " << stats.n() << "\n"
            << "ratio = " << ps::format_double(stats.ratio()) << "\n"
            << "regime = " << ps::to_string(stats.regime()) << "\n"
            << "target = " << args.target << "\n"
            << "alpha = " << ps::format_double(alpha) << "\n"
            << "beta = " << ps::format_double(beta) << "\n";
  if (args.out.empty()) ps::write_matrix_csv(std::cout, estimate);
  return 0;
}

int run_limits(const LimitsArgs& args) {
  if (args.c == 1.0) {
    std::cerr << "error: c = 1 is not supported\n";
    return kExitUsage;
  }
  const ps::SpectrumSpec spec = resolve_spectrum(args.spectrum);
  const ps::CovarianceModel truth = ps::build_covariance(spec, args.p);
  std::optional<ps::TargetMatrix> target;
  if (!args.target.empty()) target = resolve_target(args.target).precision_target(truth);

  const auto report = ps::compute_limits(spec, truth, target, args.c);
  auto line = [](const char* key, double v) { std::cout << key << " = " << ps::format_double(v) << "\n"; };
  line("c", args.c);
  std::cout << "p = " << args.p << "\n";
  if (report.functionals.psi) line("psi", *report.functionals.psi);
  if (report.functionals.x0) {
    line("x0", report.functionals.x0->value);
    line("x0_residual", report.functionals.x0->residual);
    std::cout << "x0_iterations = " << report.functionals.x0->iterations << "\n";
    line("x0_prime", *report.functionals.x0_prime);
    line("limit_pinv_frobenius_sq_over_p", *report.functionals.x0_prime / args.c);
    line("limit_pinv_trace_over_p", report.functionals.x0->value / args.c);
  }
  if (report.y_target) {
    line("y_target", report.y_target->value);
    line("y_target_residual", report.y_target->residual);
  }
  if (report.weights) {
    line("alpha", report.weights->alpha);
    line("beta", report.weights->beta);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear shrinkage estimation of large precision matrices"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo PRIAL study, written as CSV");
  simulate->add_option("config", sim.config, "Config file or builtin name (fig1..fig5)")->required();
  simulate->add_option("--reps", sim.reps, "Replications per dimension")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--p-grid", sim.p_grid, "Comma-separated dimensions");
  simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out, "Output CSV (default stdout)");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Shrinkage precision estimate from a data matrix");
  estimate->add_option("data", est.data, "CSV matrix, rows = variables by default")->required();
  estimate->add_option("--target", est.target, "identity_over_p or inverse-of:<spectrum json|atoms|name>");
  estimate->add_flag("--center", est.center, "Subtract the sample mean (off by default)");
  estimate->add_flag("--clamp", est.clamp, "Project alpha onto [0, 1 - p/n]");
  estimate->add_flag("--pinv", est.pinv, "For p >= n, return the raw pseudo-inverse");
  estimate->add_option("--orientation", est.orientation, "rows: rows are variables; columns: columns are variables")
      ->check(CLI::IsMember({"rows", "columns"}));
  estimate->add_option("--out", est.out, "Write the estimated precision matrix here");

  LimitsArgs lim;
  auto* limits = app.add_subcommand("limits", "Deterministic equivalents and limit intensities");
  limits->add_option("--spectrum", lim.spectrum, "Named spectrum, w:e atoms, or JSON file")->required();
  limits->add_option("--c", lim.c, "Concentration ratio p/n")->required()->check(CLI::PositiveNumber);
  limits->add_option("--target", lim.target, "identity_over_p, true_precision or inverse-of:<spectrum>");
  limits->add_option("--p", lim.p, "Dimension used for the finite-p functionals")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*estimate) return run_estimate(est);
    if (*limits) return run_limits(lim);
  } catch (const ps::Error& e) {
    std::cerr << "error (" << ps::to_string(e.code()) << "): " << e.what() << "\n";
    return ps::is_numeric_failure(e.code()) ? kExitNumeric : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
