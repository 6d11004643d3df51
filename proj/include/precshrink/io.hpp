#pragma once

#include "precshrink/simulation.hpp"
#include "precshrink/spectrum.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace precshrink {

/// Experiment config text format:
///
///     # comment
///     [experiment]
///     name = custom
///     c = 0.5
///     p_grid = 20, 40
///     replications = 100
///     seed = 7
///     estimators = sample_inv, olse_precision, ev_oracle
///     clamp = false
///     center = false
///
///     [distribution]
///     kind = student_t          # or gaussian
///     df = 10
///
///     [spectrum]
///     atom = 0.2, 1             # weight, eigenvalue; or `name = sigmaH`
///     atom = 0.8, 3
///
///     [target sep]
///     kind = prior              # identity_over_p | true_precision | prior
///     name = sigmaH0            # or atom lines
///
/// Errors are Error{parse_error} with "source:line: field: message" text.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// "w:e, w:e, ..." or a named spectrum.
SpectrumSpec parse_spectrum_text(const std::string& text);
/// JSON array of {"weight": w, "eigenvalue": e}.
SpectrumSpec load_spectrum_json(const std::string& path);

/// Rectangular numeric comma-separated matrix. Blank lines are ignored.
Eigen::MatrixXd read_matrix_csv(std::istream& in, const std::string& source = "<matrix>");
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

/// 17 significant digits; NaN is written as an empty field.
std::string format_double(double value);

struct ResultRow {
  std::string experiment;
  int p = 0;
  int n = 0;
  double c = 0.0;
  std::string distribution;
  std::string estimator_id;
  std::string target;
  double mean_loss = 0.0;
  double prial_percent = 0.0;
  double mean_alpha = 0.0;
  double mean_beta = 0.0;
  int replications = 0;
  std::uint64_t seed = 0;
  std::string status;
  std::string reason;
};

extern const char* const kResultHeader;

std::vector<ResultRow> result_rows(const ExperimentConfig& config, const std::vector<DimensionRun>& runs);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

}  // namespace precshrink
