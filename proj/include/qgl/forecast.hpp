#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qgl/core_model.hpp"
#include "qgl/model_selection.hpp"
#include "qgl/solver.hpp"

namespace qgl {

/// r_t = ln(P_t) - ln(P_{t-1}). Throws for length < 2 or a non-positive or non-finite price.
[[nodiscard]] Eigen::VectorXd log_returns(const Eigen::VectorXd& prices);

enum class FillPolicy { TrainMean, PaperParity, BackwardFill };

[[nodiscard]] std::string_view fill_policy_name(FillPolicy policy);
/// Accepts train_mean, paper_parity, backward_fill. Throws std::invalid_argument otherwise.
[[nodiscard]] FillPolicy parse_fill_policy(std::string_view text);

/**
 * @brief Replaces non-finite entries.
 *
 * train_mean uses the mean of finite values in [0, train_end); paper_parity the
 * mean of finite values in [train_end, n); backward_fill the next finite value,
 * with trailing gaps taking the last finite value. Throws std::invalid_argument
 * when the series has no finite value or the averaging window has none.
 */
[[nodiscard]] Eigen::VectorXd fill_missing(const Eigen::VectorXd& series, FillPolicy policy,
                                           std::size_t train_end);

/// fill_missing applied to the target and every feature column.
[[nodiscard]] TimeSeriesDataset fill_dataset(const TimeSeriesDataset& dataset, FillPolicy policy,
                                             std::size_t train_end);

/// Number of leading rows dated strictly before @p split.
[[nodiscard]] std::size_t rows_before(const TimeSeriesDataset& dataset, const Date& split);

/**
 * @brief One-step-ahead supervised pairs: row i holds x_i and y_{i+1}, dated d_{i+1}.
 *
 * The result has n - 1 rows. Throws std::invalid_argument for n < 2.
 */
[[nodiscard]] TimeSeriesDataset lagged_pairs(const TimeSeriesDataset& aligned);

struct ForecastRecord {
    Date date;
    std::optional<double> actual;        ///< absent only for the future step
    std::map<double, double> predictions;  ///< tau -> predicted return
    std::string model;
    bool converged = true;
};

struct ForecastSettings {
    std::vector<double> taus{0.25, 0.5, 0.75};
    /// Lambda, alpha and power-weight candidates; the tau field is overwritten per stream.
    SearchGrid grid = SearchGrid::defaults(0.5);
    std::size_t cv_folds = 5;
    double min_train_fraction = 0.6;
    std::size_t refit_stride = 1;
    bool retune_every_step = false;
    bool include_future = true;
    SolverConfig solver;
    /// Skips cross-validation and uses these hyperparameters for every tau.
    std::optional<Hyperparams> fixed;
    /// Model name written to records; defaults to the method name.
    std::string label;
};

struct ForecastStream {
    double tau = 0.5;
    Hyperparams hyper;
    std::optional<CvResult> cv;  ///< absent when hyperparameters were fixed
    FitResult initial_fit;       ///< fit on the initial training window
    std::size_t refits = 0;
    std::size_t unconverged_fits = 0;
};

struct ForecastOutput {
    std::vector<ForecastRecord> records;
    std::vector<ForecastStream> streams;  ///< one per tau, in request order
};

/**
 * @brief Expanding-window one-step-ahead quantile forecasts.
 *
 * @p aligned holds x_t and y_t on the same date. The supervised pairs are
 * (x_t, y_{t+1}); the test period is the pairs dated on or after @p split.
 * For every tau, hyperparameters are chosen by cross_validate on the pairs
 * before the split (unless fixed), then the model is refit every refit_stride
 * steps on all pairs before the predicted date, warm-starting from the previous
 * fit of the same stream. With include_future, one more record is dated
 * Date::next_after the last date and carries no actual. A prediction dated
 * t+1 depends only on data dated up to t.
 *
 * Throws std::invalid_argument for an empty test period, an empty tau set,
 * tau outside (0,1), a zero stride or an initial window too small for the folds.
 */
[[nodiscard]] ForecastOutput expanding_window_forecast(const TimeSeriesDataset& aligned,
                                                       const GroupStructure* groups,
                                                       Method method, const Date& split,
                                                       const ForecastSettings& settings);

struct QuantileProfile {
    std::vector<double> taus;
    std::map<double, std::vector<double>> series;  ///< tau -> predictions in record order
    std::vector<Date> dates;
    std::size_t crossings = 0;  ///< dates whose predictions are not nondecreasing in tau
    std::vector<Date> crossing_dates;
};

/// Per-tau aligned predictions plus a crossing report; never re-sorts predictions.
/// Throws std::invalid_argument for empty input or inconsistent tau sets.
[[nodiscard]] QuantileProfile quantile_profile(const std::vector<ForecastRecord>& records);

}  // namespace qgl
