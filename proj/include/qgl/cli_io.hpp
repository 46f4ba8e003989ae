#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qgl/core_model.hpp"
#include "qgl/diagnostics.hpp"
#include "qgl/evaluation.hpp"
#include "qgl/feature_select.hpp"
#include "qgl/forecast.hpp"
#include "qgl/model_selection.hpp"
#include "qgl/solver.hpp"

namespace qgl {

/// Process exit status per failure category.
enum class ErrorCategory { Config = 2, Input = 3, Numerical = 4, Io = 5 };

[[nodiscard]] std::string_view category_name(ErrorCategory category);

/// Error carrying the category that decides the exit status.
class RunError : public std::runtime_error {
public:
    RunError(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}
    [[nodiscard]] ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Reads QGL_LOG_LEVEL (error, warn, info, debug); defaults to warn.
[[nodiscard]] LogLevel log_level_from_env();
/// Writes "[level] message" to stderr when @p level is enabled.
void log_message(LogLevel level, std::string_view message);

/// A method to run, optionally with fixed hyperparameters that bypass CV.
struct MethodEntry {
    Method method = Method::LSQG;
    std::string label;  ///< report name; the method name when empty
    std::optional<Hyperparams> fixed;

    [[nodiscard]] std::string name() const;
};

struct GridConfig {
    double t_min = -5.0;
    double t_max = 1.01;
    double step = 0.2;
    std::vector<double> alpha_values{1e-4};
    std::vector<double> power_weights{-0.4, -0.2, 0.0, 0.2, 0.4};
};

struct SelectConfig {
    std::optional<std::size_t> top_k;  ///< keep every feature when absent
    bool quantile_loss = false;
};

struct SolverSettings {
    std::size_t max_iterations = 50000;
    double tolerance = 1e-6;
    double mu_scale = 1e-4;
    double mu_min_scale = 1e-7;
    double continuation_factor = 0.5;
};

struct RunConfig {
    std::filesystem::path input;
    std::string date_column = "date";
    std::string target_column = "target";
    TargetKind target_kind = TargetKind::LogReturn;
    std::vector<std::string> feature_columns;  ///< every other column when empty
    std::string feature_transform = "none";     ///< none, log_return or diff
    std::optional<Date> split_date;             ///< first test date
    std::vector<MethodEntry> methods{MethodEntry{}};
    std::vector<double> taus{0.25, 0.5, 0.75};
    GridConfig grid;
    std::size_t cv_folds = 5;
    double min_train_fraction = 0.6;
    FillPolicy fill_policy = FillPolicy::TrainMean;
    std::map<std::string, int> groups;  ///< one group for everything when empty
    SelectConfig select;
    std::size_t refit_stride = 1;
    bool retune_every_step = false;
    bool include_future = true;
    bool standardize = true;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "qgl_output";
    SolverSettings solver;
    std::optional<std::filesystem::path> evaluate_actual;
    std::optional<std::filesystem::path> evaluate_predicted;

    [[nodiscard]] SolverConfig solver_config() const;
    [[nodiscard]] SearchGrid search_grid(double tau) const;
    /// Throws RunError(Config) on invalid values.
    void validate() const;
};

/**
 * @brief Parses a JSON run configuration.
 *
 * Relative paths resolve against @p base_dir. A run manifest is accepted too,
 * in which case its embedded resolved configuration is used.
 * Throws RunError(Config) on malformed JSON, unknown keys or invalid values.
 */
[[nodiscard]] RunConfig parse_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir);

/// Reads and parses a configuration file. Throws RunError(Io) when unreadable.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration as pretty JSON with absolute paths; parse_config inverts it.
[[nodiscard]] std::string config_to_json(const RunConfig& config);

/// Raw table from load_csv: the target column as read and the chosen features.
struct LoadedTable {
    TimeSeriesDataset dataset;
    std::size_t non_finite_cells = 0;
};

/**
 * @brief Reads a headered CSV into a dataset sorted by date.
 *
 * Numbers are parsed independently of the locale. Empty, NA, NaN and inf
 * cells become NaN for a later fill policy. Throws RunError(Input) for missing
 * columns, unparseable cells (row and column named) and duplicate dates, and
 * RunError(Io) when the file cannot be read.
 */
[[nodiscard]] LoadedTable load_csv(const std::filesystem::path& path, const RunConfig& config);

/// Parses CSV text; the same contract as load_csv.
[[nodiscard]] LoadedTable parse_csv(std::string_view text, const RunConfig& config);

/// Shortest round-trip decimal form; "nan" and "inf" for non-finite values.
[[nodiscard]] std::string format_real(double v);

/// Column suffix of a quantile: 0.25 -> "25", 0.025 -> "2.5".
[[nodiscard]] std::string tau_label(double tau);

/// CV table: method, tau, lambda, alpha, power_weight, fold, pinball_loss, converged.
/// One row per grid cell with fold "mean".
[[nodiscard]] std::string cv_scores_csv(
    const std::vector<std::pair<std::string, std::pair<double, CvResult>>>& tables);

/// Forecast table: date, actual, pred_q.. per tau, model, converged.
[[nodiscard]] std::string forecasts_csv(const std::vector<ForecastRecord>& records);

/// Parses forecasts_csv output back into records.
[[nodiscard]] std::vector<ForecastRecord> parse_forecasts_csv(std::string_view text);

struct ModelMetrics {
    std::string model;
    std::optional<double> tau;  ///< absent for externally supplied predictions
    MetricsReport report;
};

/// model, tau, MSE, MAE, RMSE, MAPE, mape_skipped, n.
[[nodiscard]] std::string metrics_csv(const std::vector<ModelMetrics>& rows);

/// One row per (model, metric) with a column per tau; metrics MSE, MAE, RMSE, MAPE, pinball.
[[nodiscard]] std::string metrics_by_tau_csv(const std::vector<ForecastRecord>& records);

/// name, entry_lambda, coefficient_at_cv_lambda, rank, retained, group.
[[nodiscard]] std::string feature_selection_csv(const Ranking& ranking, std::size_t retained,
                                                const std::map<std::string, int>& groups);

}  // namespace qgl
