#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace precshrink {

/// ||estimate - truth_inv||_F^2.
double frobenius_loss(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth_inv);

/// Percentage relative improvement in average loss over the baseline.
double prial(double mean_loss_estimator, double mean_loss_baseline);

enum class RowStatus { ok, skipped };

/// Aggregate for one (estimator, target) pair at one dimension.
struct EstimatorSummary {
  std::string estimator_id;
  std::string target;  // empty for estimators without a target
  double mean_loss = 0.0;
  double prial_percent = 0.0;
  double mean_alpha = 0.0;  // NaN when the estimator has no intensities
  double mean_beta = 0.0;
  int replications = 0;
  RowStatus status = RowStatus::ok;
  std::string reason;  // why a row was skipped
};

struct PrialReport {
  int p = 0;
  int n = 0;
  double c = 0.0;
  std::string baseline_id;
  std::vector<EstimatorSummary> estimators;

  const EstimatorSummary* find(const std::string& id, const std::string& target = {}) const;
};

/// Running mean accumulated in replication order.
class MeanAccumulator {
 public:
  void add(double value) {
    ++count_;
    sum_ += value;
  }
  int count() const noexcept { return count_; }
  double mean() const noexcept { return count_ ? sum_ / count_ : 0.0; }

 private:
  int count_ = 0;
  double sum_ = 0.0;
};

}  // namespace precshrink
