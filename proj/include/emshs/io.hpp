#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "emshs/em.hpp"
#include "emshs/eval.hpp"
#include "emshs/simgen.hpp"

namespace emshs {

using nlohmann::json;

/// Comma-separated numbers, one observation per row. A first row that does not
/// parse as numbers is taken as a header and skipped.
Eigen::MatrixXd parse_csv(std::string_view text);
Eigen::MatrixXd read_csv_file(const std::string& path);
/// Single-column CSV as a vector.
Eigen::VectorXd read_vector_file(const std::string& path);
void write_csv_file(const std::string& path, const Eigen::MatrixXd& m,
                    const std::vector<std::string>& header = {});
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const json& doc);

/// Parsed run configuration. `mu_grid` is set only when the file names one.
struct RunConfig {
  Hyperparameters hyper;
  std::optional<std::vector<double>> mu_grid;
  std::size_t workers = 1;
};

/// Unknown keys and invalid values raise ConfigError.
RunConfig parse_run_config(const json& doc);
ScenarioSpec parse_scenario_spec(const json& doc);
json scenario_spec_to_json(const ScenarioSpec& spec);

/**
 * Fit document: 1-based sparse beta pairs, dense alpha, sigma2, 1-based
 * selected indices, iteration count, convergence flag, (q, logpost) trace and
 * wall time, plus the standardization needed to predict on raw rows. With
 * `original_scale` beta is divided by the column scales and an intercept is
 * reported.
 */
json fit_to_json(const FitResult& fit, bool original_scale = false);
/// Enough of a FitResult for predict(): beta (standardized), alpha, sigma2,
/// selected and standardization.
FitResult fit_from_json(const json& doc);

json tuning_to_json(const TuningResult& result);
json truth_to_json(const SyntheticTruth& truth, const ScenarioSpec& spec);
/// Timing fields are included only when `with_timing` is set, so summaries of
/// equal runs compare byte for byte.
json summary_to_json(const BenchmarkSummary& summary, bool with_timing = false);

}  // namespace emshs
