#include "precshrink/simulation.hpp"

#include "precshrink/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace precshrink {

void DistributionSpec::validate() const {
  if (kind == DistributionKind::gaussian) return;
  if (!(degrees_of_freedom > 2.0) || !std::isfinite(degrees_of_freedom))
    throw Error(ErrorCode::invalid_input, "student_t needs more than 2 degrees of freedom for a finite variance");
  if (degrees_of_freedom <= 4.0 && !allow_heavy_tails)
    throw Error(ErrorCode::invalid_input,
                "student_t with df <= 4 lacks 4+eps moments; set allow_heavy_tails to run anyway");
}

std::string DistributionSpec::label() const {
  if (kind == DistributionKind::gaussian) return "gaussian";
  char buf[64];
  std::snprintf(buf, sizeof buf, "student_t(%g)", degrees_of_freedom);
  return buf;
}

TargetMatrix TargetSpec::precision_target(const CovarianceModel& truth) const {
  const int p = truth.dimension();
  switch (kind) {
    case TargetKind::identity_over_p: return TargetMatrix::identity_over_p(p);
    case TargetKind::true_precision: return TargetMatrix(truth.precision());
    case TargetKind::prior: {
      if (!prior) throw Error(ErrorCode::invalid_input, "target '" + name + "' has no prior spectrum");
      const Eigen::VectorXd tau = apportioned_eigenvalues(*prior, p);
      if (truth.is_diagonal()) return TargetMatrix(Eigen::MatrixXd(tau.cwiseInverse().asDiagonal()));
      return TargetMatrix(build_covariance(*prior, p, truth.basis()).precision());
    }
  }
  throw Error(ErrorCode::invalid_input, "unknown target kind");
}

Eigen::MatrixXd TargetSpec::covariance_target(const CovarianceModel& truth) const {
  const int p = truth.dimension();
  switch (kind) {
    case TargetKind::identity_over_p:
      return Eigen::MatrixXd::Identity(p, p) / static_cast<double>(p);
    case TargetKind::true_precision: return truth.covariance();
    case TargetKind::prior: {
      if (!prior) throw Error(ErrorCode::invalid_input, "target '" + name + "' has no prior spectrum");
      if (truth.is_diagonal()) return apportioned_eigenvalues(*prior, p).asDiagonal();
      return build_covariance(*prior, p, truth.basis()).covariance();
    }
  }
  throw Error(ErrorCode::invalid_input, "unknown target kind");
}

bool is_known_estimator(const std::string& id) {
  using namespace estimator_id;
  return id == sample_inv || id == sample_pinv || id == olse_precision ||
         id == olse_precision_oracle || id == olse_cov_inv || id == ev_oracle;
}

namespace {

bool uses_target(const std::string& id) {
  return id == estimator_id::olse_precision || id == estimator_id::olse_precision_oracle ||
         id == estimator_id::olse_cov_inv;
}

}  // namespace

int ExperimentConfig::sample_size(int p) const {
  return static_cast<int>(std::lround(static_cast<double>(p) / c));
}

void ExperimentConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::invalid_input, "c must be positive");
  if (c == 1.0) throw Error(ErrorCode::invalid_input, "c = 1 is not supported");
  if (p_grid.empty()) throw Error(ErrorCode::invalid_input, "p_grid is empty");
  for (int p : p_grid) {
    if (p < 1) throw Error(ErrorCode::invalid_input, "p_grid entries must be positive");
    if (sample_size(p) < 2)
      throw Error(ErrorCode::invalid_input, "p = " + std::to_string(p) + " gives n = round(p/c) < 2");
  }
  if (replications < 1) throw Error(ErrorCode::invalid_input, "replications must be at least 1");
  if (!seed) throw Error(ErrorCode::invalid_input, "a seed is required");
  distribution.validate();
  if (estimators.empty()) throw Error(ErrorCode::invalid_input, "no estimators requested");
  bool needs_target = false;
  for (const auto& id : estimators) {
    if (!is_known_estimator(id)) throw Error(ErrorCode::invalid_input, "unknown estimator '" + id + "'");
    needs_target = needs_target || uses_target(id);
  }
  if (needs_target && targets.empty())
    throw Error(ErrorCode::invalid_input, "estimators need at least one target");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].name.empty()) throw Error(ErrorCode::invalid_input, "target without a name");
    if (targets[i].kind == TargetKind::prior && !targets[i].prior)
      throw Error(ErrorCode::invalid_input, "target '" + targets[i].name + "' needs a prior spectrum");
    for (std::size_t j = 0; j < i; ++j)
      if (targets[j].name == targets[i].name)
        throw Error(ErrorCode::invalid_input, "duplicate target name '" + targets[i].name + "'");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, int p, int replication) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(p));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(replication) << 1 | 1ULL));
  return h;
}

DataMatrix generate_data(const CovarianceModel& truth, int n, const DistributionSpec& dist,
                         std::mt19937_64& stream) {
  dist.validate();
  if (n < 1) throw Error(ErrorCode::invalid_input, "sample size must be positive");
  const int p = truth.dimension();
  DataMatrix x(p, n);
  if (dist.kind == DistributionKind::gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < p; ++i) x(i, j) = normal(stream);
  } else {
    const double df = dist.degrees_of_freedom;
    const double scale = std::sqrt((df - 2.0) / df);
    std::student_t_distribution<double> t(df);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < p; ++i) x(i, j) = scale * t(stream);
  }
  if (truth.is_diagonal()) return truth.eigenvalues().cwiseSqrt().asDiagonal() * x;
  return truth.sqrt_covariance() * x;
}

namespace {

struct DimensionSetup {
  int p;
  int n;
  CovarianceModel truth;
  Regime regime;
  std::vector<EvaluationSlot> slots;
  std::map<std::string, TargetMatrix> precision_targets;
  std::map<std::string, Eigen::MatrixXd> covariance_targets;
};

std::string static_skip_reason(const std::string& id, Regime regime, double ratio) {
  using namespace estimator_id;
  if (id == sample_inv && regime != Regime::invertible) return "sample inverse requires p < n";
  if (id == sample_pinv && regime != Regime::pseudo) return "pseudo-inverse baseline is only used when p >= n";
  if (id == olse_precision) {
    if (regime != Regime::invertible)
      return "bona fide precision OLSE is only available for p < n";
    if (ratio > kNearSingularRatio) return "p/n inside the near-singular band";
  }
  if (id == olse_precision_oracle && regime == Regime::invertible && ratio > kNearSingularRatio)
    return "p/n inside the near-singular band";
  return {};
}

DimensionSetup prepare(const ExperimentConfig& config, int p) {
  DimensionSetup setup{p, config.sample_size(p), build_covariance(config.spectrum, p), Regime::invertible, {}, {}, {}};
  setup.regime = p < setup.n ? Regime::invertible : Regime::pseudo;
  const double ratio = static_cast<double>(p) / setup.n;
  const std::string baseline =
      std::string(setup.regime == Regime::invertible ? estimator_id::sample_inv : estimator_id::sample_pinv);

  setup.slots.push_back({baseline, "", ""});
  for (const auto& id : config.estimators) {
    if (id == baseline) continue;
    if (uses_target(id)) {
      for (const auto& t : config.targets)
        setup.slots.push_back({id, t.name, static_skip_reason(id, setup.regime, ratio)});
    } else {
      setup.slots.push_back({id, "", static_skip_reason(id, setup.regime, ratio)});
    }
  }
  for (const auto& t : config.targets) {
    setup.precision_targets.emplace(t.name, t.precision_target(setup.truth));
    setup.covariance_targets.emplace(t.name, t.covariance_target(setup.truth));
  }
  return setup;
}

SlotOutcome evaluate(const EvaluationSlot& slot, const DimensionSetup& setup, const SampleStats& stats,
                     bool clamp) {
  using namespace estimator_id;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd& prec = setup.truth.precision();
  SlotOutcome out{nan, nan, nan, {}};
  const auto& id = slot.estimator_id;
  if (id == sample_inv || id == sample_pinv) {
    out.loss = frobenius_loss(stats.inverse(), prec);
  } else if (id == ev_oracle) {
    out.loss = frobenius_loss(oracle_equivariant(stats, setup.truth).matrix, prec);
  } else if (id == olse_precision || id == olse_precision_oracle) {
    const TargetMatrix& target = setup.precision_targets.at(slot.target);
    PrecisionEstimate est = id == olse_precision ? bona_fide_olse(stats, target, clamp)
                            : stats.regime() == Regime::invertible
                                ? oracle_olse_lt1(stats, setup.truth, target)
                                : oracle_olse_gt1(stats, setup.truth, target);
    out.loss = frobenius_loss(est.matrix, prec);
    out.alpha = est.weights.alpha;
    out.beta = est.weights.beta;
  } else if (id == olse_cov_inv) {
    const CovarianceShrinkage est = olse_covariance(stats, setup.covariance_targets.at(slot.target));
    out.loss = frobenius_loss(est.inverse, prec);
    out.alpha = est.weights.alpha;
    out.beta = est.weights.beta;
  } else {
    throw Error(ErrorCode::invalid_input, "unknown estimator '" + id + "'");
  }
  if (!std::isfinite(out.loss) || out.loss < 0.0)
    throw Error(ErrorCode::inconsistent_input, "non-finite loss for '" + id + "'");
  return out;
}

ReplicationResult run_replication(const ExperimentConfig& config, const DimensionSetup& setup, int r) {
  std::mt19937_64 stream(substream_seed(*config.seed, setup.p, r));
  const DataMatrix y = generate_data(setup.truth, setup.n, config.distribution, stream);
  ReplicationResult result{r, std::vector<SlotOutcome>(setup.slots.size())};

  std::optional<SampleStats> stats;
  std::string stats_error;
  try {
    stats.emplace(SampleStats::from_data(y, config.center));
  } catch (const Error& e) {
    stats_error = e.what();
  }
  for (std::size_t k = 0; k < setup.slots.size(); ++k) {
    const auto& slot = setup.slots[k];
    if (!slot.skip_reason.empty()) continue;
    if (!stats) {
      result.outcomes[k].error = stats_error;
      continue;
    }
    try {
      result.outcomes[k] = evaluate(slot, setup, *stats, config.clamp);
    } catch (const Error& e) {
      result.outcomes[k].error = e.what();
    }
  }
  return result;
}

PrialReport aggregate(const DimensionSetup& setup, double c, const std::vector<ReplicationResult>& reps) {
  PrialReport report;
  report.p = setup.p;
  report.n = setup.n;
  report.c = c;
  report.baseline_id = setup.slots.front().estimator_id;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t k = 0; k < setup.slots.size(); ++k) {
    const auto& slot = setup.slots[k];
    EstimatorSummary s;
    s.estimator_id = slot.estimator_id;
    s.target = slot.target;
    if (!slot.skip_reason.empty()) {
      s.status = RowStatus::skipped;
      s.reason = slot.skip_reason;
      s.mean_loss = s.prial_percent = s.mean_alpha = s.mean_beta = nan;
      report.estimators.push_back(std::move(s));
      continue;
    }
    MeanAccumulator loss, alpha, beta;
    std::string error;
    for (const auto& rep : reps) {
      const auto& o = rep.outcomes[k];
      if (!o.error.empty()) {
        error = "replication " + std::to_string(rep.index) + ": " + o.error;
        break;
      }
      loss.add(o.loss);
      alpha.add(o.alpha);
      beta.add(o.beta);
    }
    if (!error.empty()) {
      s.status = RowStatus::skipped;
      s.reason = error;
      s.mean_loss = s.prial_percent = s.mean_alpha = s.mean_beta = nan;
    } else {
      s.mean_loss = loss.mean();
      s.mean_alpha = alpha.mean();
      s.mean_beta = beta.mean();
      s.replications = loss.count();
    }
    report.estimators.push_back(std::move(s));
  }

  const auto& base = report.estimators.front();
  for (auto& s : report.estimators) {
    if (s.status != RowStatus::ok) continue;
    if (base.status != RowStatus::ok || !(base.mean_loss > 0.0)) {
      s.status = RowStatus::skipped;
      s.reason = "baseline loss unavailable: PRIAL undefined";
      s.prial_percent = nan;
      continue;
    }
    s.prial_percent = prial(s.mean_loss, base.mean_loss);
  }
  return report;
}

}  // namespace

std::vector<DimensionRun> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const int threads = std::max(1, options.threads);
  std::vector<DimensionRun> runs;
  runs.reserve(config.p_grid.size());

  for (int p : config.p_grid) {
    const DimensionSetup setup = prepare(config, p);
    std::vector<ReplicationResult> reps(static_cast<std::size_t>(config.replications));

    std::atomic<int> next{0};
    auto worker = [&] {
      for (int r = next++; r < config.replications; r = next++)
        reps[static_cast<std::size_t>(r)] = run_replication(config, setup, r);
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < std::min(threads, config.replications); ++t) pool.emplace_back(worker);
    }

    DimensionRun run;
    run.report = aggregate(setup, config.c, reps);
    run.slots = setup.slots;
    if (options.keep_replications) run.replications = std::move(reps);
    runs.push_back(std::move(run));
  }
  return runs;
}

std::optional<SpectrumSpec> named_spectrum(const std::string& name) {
  if (name == "identity") return SpectrumSpec::identity();
  if (name == "sigmaH") return SpectrumSpec({{0.2, 1.0}, {0.4, 3.0}, {0.4, 10.0}});
  if (name == "sigmaH0" || name == "prior2") return SpectrumSpec({{0.2, 1.0}, {0.4, 2.0}, {0.4, 4.0}});
  if (name == "prior1") return SpectrumSpec({{0.2, 1.0}, {0.4, 5.0}, {0.4, 10.0}});
  if (name == "prior3") return SpectrumSpec({{0.2, 1.0}, {0.4, 2.0}, {0.4, 60.0}});
  if (name == "prior4") return SpectrumSpec({{0.2, 0.1}, {0.4, 1.0}, {0.4, 1000.0}});
  if (name == "prior5") return SpectrumSpec({{0.2, 0.1}, {0.4, 0.5}, {0.4, 1.0}});
  return std::nullopt;
}

namespace {

std::vector<int> multiples(int step, int count) {
  std::vector<int> grid;
  for (int k = 1; k <= count; ++k) grid.push_back(step * k);
  return grid;
}

ExperimentConfig figure_base(std::string name, double c, std::vector<int> grid) {
  ExperimentConfig cfg;
  cfg.name = std::move(name);
  cfg.spectrum = *named_spectrum("sigmaH");
  cfg.c = c;
  cfg.p_grid = std::move(grid);
  cfg.replications = 1000;
  cfg.seed = 1;
  cfg.targets = {TargetSpec::identity_over_p(), TargetSpec::from_prior("sigmaH0", *named_spectrum("sigmaH0"))};
  cfg.estimators = {std::string(estimator_id::sample_inv), std::string(estimator_id::olse_precision),
                    std::string(estimator_id::olse_precision_oracle), std::string(estimator_id::olse_cov_inv),
                    std::string(estimator_id::ev_oracle)};
  return cfg;
}

}  // namespace

std::vector<ExperimentConfig> builtin_experiments() {
  std::vector<ExperimentConfig> out;
  out.push_back(figure_base("fig1", 1.0 / 3.0, multiples(5, 40)));

  ExperimentConfig fig2 = figure_base("fig2", 1.0 / 3.0, multiples(5, 40));
  fig2.targets = {TargetSpec::identity_over_p(), TargetSpec::true_precision()};
  for (int i = 1; i <= 5; ++i) {
    const std::string n = "prior" + std::to_string(i);
    fig2.targets.push_back(TargetSpec::from_prior(n, *named_spectrum(n)));
  }
  fig2.estimators = {std::string(estimator_id::sample_inv), std::string(estimator_id::olse_precision),
                     std::string(estimator_id::ev_oracle)};
  out.push_back(std::move(fig2));

  out.push_back(figure_base("fig3a", 0.5, multiples(5, 40)));
  out.push_back(figure_base("fig3b", 0.8, multiples(20, 10)));

  ExperimentConfig fig4 = figure_base("fig4", 1.0 / 3.0, multiples(50, 10));
  fig4.distribution = DistributionSpec::student_t(10.0);
  out.push_back(std::move(fig4));

  ExperimentConfig fig5 = figure_base("fig5", 1.5, multiples(20, 20));
  fig5.targets = {TargetSpec::identity_over_p()};
  fig5.estimators = {std::string(estimator_id::sample_pinv), std::string(estimator_id::olse_precision_oracle),
                     std::string(estimator_id::olse_cov_inv), std::string(estimator_id::ev_oracle)};
  out.push_back(std::move(fig5));
  return out;
}

std::optional<ExperimentConfig> find_builtin(const std::string& name) {
  for (auto& cfg : builtin_experiments())
    if (cfg.name == name) return cfg;
  return std::nullopt;
}

}  // namespace precshrink
