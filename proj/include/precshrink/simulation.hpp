#pragma once

#include "precshrink/estimators.hpp"
#include "precshrink/linalg.hpp"
#include "precshrink/metrics.hpp"
#include "precshrink/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace precshrink {

enum class DistributionKind { gaussian, student_t };

struct DistributionSpec {
  DistributionKind kind = DistributionKind::gaussian;
  double degrees_of_freedom = 0.0;  // student_t only
  bool allow_heavy_tails = false;   // permit 2 < df <= 4 for exploratory runs

  static DistributionSpec gaussian() { return {}; }
  static DistributionSpec student_t(double df) { return {DistributionKind::student_t, df, false}; }

  /// df <= 2 is always rejected; df <= 4 needs allow_heavy_tails.
  void validate() const;
  std::string label() const;
};

enum class TargetKind { identity_over_p, true_precision, prior };

/// Named shrinkage target. A `prior` is a covariance spectrum Sigma_0; the
/// precision target is its matrix inverse.
struct TargetSpec {
  std::string name;
  TargetKind kind = TargetKind::identity_over_p;
  std::optional<SpectrumSpec> prior;

  static TargetSpec identity_over_p() { return {"identity_over_p", TargetKind::identity_over_p, std::nullopt}; }
  static TargetSpec true_precision() { return {"true_precision", TargetKind::true_precision, std::nullopt}; }
  static TargetSpec from_prior(std::string name, SpectrumSpec prior) {
    return {std::move(name), TargetKind::prior, std::move(prior)};
  }

  /// Pi_0 for the precision estimators.
  TargetMatrix precision_target(const CovarianceModel& truth) const;
  /// Sigma_0 for the covariance shrinkage benchmark.
  Eigen::MatrixXd covariance_target(const CovarianceModel& truth) const;
};

struct ExperimentConfig {
  std::string name;
  SpectrumSpec spectrum = SpectrumSpec::identity();
  std::vector<TargetSpec> targets;
  double c = 0.5;
  std::vector<int> p_grid;
  DistributionSpec distribution;
  int replications = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> estimators;
  bool clamp = false;
  bool center = false;

  /// n = round(p / c).
  int sample_size(int p) const;
  void validate() const;
};

/// Seed of the independent stream owned by replication r at dimension p.
std::uint64_t substream_seed(std::uint64_t seed, int p, int replication);

/// Y = Sigma^{1/2} X with X i.i.d. zero-mean unit-variance entries.
DataMatrix generate_data(const CovarianceModel& truth, int n, const DistributionSpec& dist,
                         std::mt19937_64& stream);

/// One (estimator, target) evaluated in every replication.
struct EvaluationSlot {
  std::string estimator_id;
  std::string target;  // TargetSpec name, empty when unused
  std::string skip_reason;  // set when the slot cannot run at this dimension
};

struct SlotOutcome {
  double loss = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::string error;  // non-empty if the estimator failed in this replication
};

struct ReplicationResult {
  int index = 0;
  std::vector<SlotOutcome> outcomes;  // parallel to DimensionRun::slots
};

struct DimensionRun {
  PrialReport report;
  std::vector<EvaluationSlot> slots;
  std::vector<ReplicationResult> replications;  // only with keep_replications
};

struct RunOptions {
  int threads = 1;
  bool keep_replications = false;
};

/// Monte Carlo PRIAL study over the configured dimension grid. Results do not
/// depend on the thread count.
std::vector<DimensionRun> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Experiments behind the published figures: fig1, fig2, fig3a, fig3b, fig4, fig5.
std::vector<ExperimentConfig> builtin_experiments();
std::optional<ExperimentConfig> find_builtin(const std::string& name);

/// Named spectra used by the builtins: "identity", "sigmaH", "sigmaH0", "prior1".."prior5".
std::optional<SpectrumSpec> named_spectrum(const std::string& name);

bool is_known_estimator(const std::string& id);

}  // namespace precshrink
