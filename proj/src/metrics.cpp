#include "precshrink/metrics.hpp"

#include "precshrink/error.hpp"

#include <cmath>

namespace precshrink {

double frobenius_loss(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth_inv) {
  if (estimate.rows() != truth_inv.rows() || estimate.cols() != truth_inv.cols())
    throw Error(ErrorCode::invalid_input, "loss operands have different dimensions");
  return (estimate - truth_inv).squaredNorm();
}

double prial(double mean_loss_estimator, double mean_loss_baseline) {
  if (!(mean_loss_baseline > 0.0) || !std::isfinite(mean_loss_baseline))
    throw Error(ErrorCode::undefined_prial, "PRIAL needs a positive finite baseline loss");
  return (1.0 - mean_loss_estimator / mean_loss_baseline) * 100.0;
}

const EstimatorSummary* PrialReport::find(const std::string& id, const std::string& target) const {
  for (const auto& e : estimators)
    if (e.estimator_id == id && e.target == target) return &e;
  return nullptr;
}

}  // namespace precshrink
