#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qgl/cli_io.hpp"

namespace qgl {

/// Version string recorded in run manifests.
inline constexpr std::string_view qgl_version = "1.0.0";

/// Model-ready data: returns and features aligned on the same dates, gaps filled.
struct PreparedData {
    TimeSeriesDataset aligned;
    std::optional<Eigen::VectorXd> prices;  ///< raw levels when the target is a price
    std::size_t train_rows = 0;             ///< aligned rows dated before the split
    std::optional<Date> split;
    std::size_t filled_cells = 0;
};

/**
 * @brief Turns a loaded table into aligned returns and features.
 *
 * Fills gaps with the configured policy (training rows are those dated before
 * the split), converts prices to log returns, applies the feature transform
 * and drops the first row so every row has a return.
 */
[[nodiscard]] PreparedData prepare_data(const TimeSeriesDataset& raw, const RunConfig& config);

struct SelectionOutcome {
    Ranking ranking;
    std::vector<std::size_t> retained_columns;  ///< aligned column indices in rank order
    std::vector<std::string> retained_names;
};

struct PipelineResult {
    std::string command;
    std::string diagnostics_text;
    std::optional<SelectionOutcome> selection;
    std::vector<std::string> feature_names;  ///< retained features in model column order
    GroupStructure groups;                   ///< over the retained features
    std::vector<std::pair<std::string, std::pair<double, CvResult>>> cv_tables;
    std::vector<ForecastRecord> records;
    std::map<std::string, std::vector<ForecastStream>> streams;  ///< by model name
    std::vector<ModelMetrics> metrics;
    /// File name to content for every report written (manifest excluded).
    std::map<std::string, std::string> artifacts;
};

/**
 * @brief Runs one command and writes its reports plus a manifest to the output directory.
 *
 * Commands: diagnose, select, cv, forecast, evaluate, pipeline. The manifest
 * (manifest.json) echoes the resolved configuration and is itself a valid
 * configuration. Wall-clock timings go to run_timings.json so that every other
 * artifact is byte-identical across repeated runs. Throws RunError.
 */
PipelineResult execute(std::string_view command, const RunConfig& config);

/// execute() with errors logged and mapped to exit statuses (0 on success).
int run_command(std::string_view command, const RunConfig& config);

}  // namespace qgl
