#include "qgl/forecast.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qgl {

Eigen::VectorXd log_returns(const Eigen::VectorXd& prices) {
    if (prices.size() < 2) {
        throw std::invalid_argument("log_returns: need at least two prices");
    }
    for (Eigen::Index i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw std::invalid_argument("log_returns: price at position " + std::to_string(i) +
                                        " is not a positive finite number");
        }
    }
    Eigen::VectorXd out(prices.size() - 1);
    for (Eigen::Index i = 1; i < prices.size(); ++i) {
        out[i - 1] = std::log(prices[i]) - std::log(prices[i - 1]);
    }
    return out;
}

std::string_view fill_policy_name(FillPolicy policy) {
    switch (policy) {
        case FillPolicy::TrainMean:
            return "train_mean";
        case FillPolicy::PaperParity:
            return "paper_parity";
        case FillPolicy::BackwardFill:
            return "backward_fill";
    }
    return "train_mean";
}

FillPolicy parse_fill_policy(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "train_mean") {
        return FillPolicy::TrainMean;
    }
    if (lower == "paper_parity") {
        return FillPolicy::PaperParity;
    }
    if (lower == "backward_fill") {
        return FillPolicy::BackwardFill;
    }
    throw std::invalid_argument("unknown fill policy '" + std::string(text) +
                                "' (expected train_mean, paper_parity or backward_fill)");
}

Eigen::VectorXd fill_missing(const Eigen::VectorXd& series, FillPolicy policy,
                             std::size_t train_end) {
    const auto n = static_cast<std::size_t>(series.size());
    if (series.allFinite()) {
        return series;
    }
    bool any = false;
    for (double v : series) {
        any = any || std::isfinite(v);
    }
    if (!any) {
        throw std::invalid_argument("fill_missing: series has no finite value");
    }
    Eigen::VectorXd out = series;
    if (policy == FillPolicy::BackwardFill) {
        std::optional<double> next;
        for (std::size_t i = n; i-- > 0;) {
            const auto k = static_cast<Eigen::Index>(i);
            if (std::isfinite(out[k])) {
                next = out[k];
            } else if (next) {
                out[k] = *next;
            }
        }
        // Trailing gaps have no later value: carry the last finite one forward.
        std::optional<double> last;
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if (std::isfinite(out[k])) {
                last = out[k];
            } else if (last) {
                out[k] = *last;
            }
        }
        return out;
    }
    const std::size_t split = std::min(train_end, n);
    const std::size_t begin = policy == FillPolicy::TrainMean ? 0 : split;
    const std::size_t end = policy == FillPolicy::TrainMean ? split : n;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const double v = series[static_cast<Eigen::Index>(i)];
        if (std::isfinite(v)) {
            sum += v;
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument(std::string("fill_missing: no finite value in the ") +
                                    (policy == FillPolicy::TrainMean ? "training" : "test") +
                                    " period to average");
    }
    const double mean = sum / static_cast<double>(count);
    for (double& v : out) {
        if (!std::isfinite(v)) {
            v = mean;
        }
    }
    return out;
}

TimeSeriesDataset fill_dataset(const TimeSeriesDataset& dataset, FillPolicy policy,
                               std::size_t train_end) {
    Eigen::VectorXd target = dataset.target();
    if (!target.allFinite()) {
        try {
            target = fill_missing(target, policy, train_end);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("target: ") + e.what());
        }
    }
    Eigen::MatrixXd features = dataset.features();
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        if (features.col(j).allFinite()) {
            continue;
        }
        try {
            features.col(j) = fill_missing(features.col(j), policy, train_end);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("feature '" +
                                        dataset.feature_names()[static_cast<std::size_t>(j)] +
                                        "': " + e.what());
        }
    }
    return TimeSeriesDataset(dataset.dates(), std::move(target), std::move(features),
                             dataset.feature_names(), dataset.target_kind());
}

std::size_t rows_before(const TimeSeriesDataset& dataset, const Date& split) {
    const auto& dates = dataset.dates();
    return static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), split) -
                                    dates.begin());
}

TimeSeriesDataset lagged_pairs(const TimeSeriesDataset& aligned) {
    const std::size_t n = aligned.n_rows();
    if (n < 2) {
        throw std::invalid_argument("lagged_pairs: need at least two rows");
    }
    const auto m = static_cast<Eigen::Index>(n - 1);
    std::vector<Date> dates(aligned.dates().begin() + 1, aligned.dates().end());
    return TimeSeriesDataset(std::move(dates), aligned.target().tail(m),
                             aligned.features().topRows(m), aligned.feature_names(),
                             aligned.target_kind());
}

namespace {

CvResult tune(const TimeSeriesDataset& window, const GroupStructure* groups, Method method,
              double tau, const ForecastSettings& settings) {
    SearchGrid grid = settings.grid;
    grid.tau = tau;
    const std::size_t n = window.n_rows();
    const auto min_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(settings.min_train_fraction * static_cast<double>(n)));
    return cross_validate(window, groups, grid, method, settings.cv_folds, min_train,
                          settings.solver);
}

}  // namespace

ForecastOutput expanding_window_forecast(const TimeSeriesDataset& aligned,
                                         const GroupStructure* groups, Method method,
                                         const Date& split, const ForecastSettings& settings) {
    if (settings.taus.empty()) {
        throw std::invalid_argument("forecast: at least one tau is required");
    }
    for (double tau : settings.taus) {
        if (!(tau > 0.0 && tau < 1.0)) {
            throw std::invalid_argument("forecast: tau values must lie in (0,1)");
        }
    }
    if (settings.refit_stride < 1) {
        throw std::invalid_argument("forecast: refit_stride must be at least 1");
    }
    if (!(settings.min_train_fraction > 0.0 && settings.min_train_fraction < 1.0)) {
        throw std::invalid_argument("forecast: min_train_fraction must lie in (0,1)");
    }
    const TimeSeriesDataset pairs = lagged_pairs(aligned);
    const std::size_t test_begin = rows_before(pairs, split);
    const std::size_t n_pairs = pairs.n_rows();
    if (test_begin >= n_pairs) {
        throw std::invalid_argument("forecast: no test rows dated on or after " + split.iso());
    }
    if (test_begin < 2) {
        throw std::invalid_argument("forecast: the training window before " + split.iso() +
                                    " holds fewer than two rows");
    }
    const std::string model =
        settings.label.empty() ? std::string(method_name(method)) : settings.label;

    // Rows to predict: the test pairs, then optionally the future step whose
    // features are the last aligned row.
    const std::size_t n_steps = n_pairs - test_begin + (settings.include_future ? 1 : 0);
    ForecastOutput out;
    out.records.resize(n_steps);
    for (std::size_t s = 0; s < n_steps; ++s) {
        ForecastRecord& rec = out.records[s];
        const std::size_t i = test_begin + s;
        rec.model = model;
        if (i < n_pairs) {
            rec.date = pairs.dates()[i];
            rec.actual = pairs.target()[static_cast<Eigen::Index>(i)];
        } else {
            const auto& d = aligned.dates();
            rec.date = Date::next_after(d[d.size() - 2], d.back());
        }
    }

    for (double tau : settings.taus) {
        ForecastStream stream;
        stream.tau = tau;
        const TimeSeriesDataset initial = pairs.slice(0, test_begin);
        if (settings.fixed) {
            stream.hyper = *settings.fixed;
        } else {
            stream.cv = tune(initial, groups, method, tau, settings);
            stream.hyper = stream.cv->best;
        }
        std::optional<FitResult> current;
        for (std::size_t s = 0; s < n_steps; ++s) {
            const std::size_t i = test_begin + s;
            if (s % settings.refit_stride == 0) {
                const TimeSeriesDataset window = pairs.slice(0, i);
                if (settings.retune_every_step && s > 0 && !settings.fixed) {
                    stream.hyper = tune(window, groups, method, tau, settings).best;
                }
                FitResult next = fit_preset(method, window, groups, tau, stream.hyper,
                                            settings.solver, current ? &*current : nullptr);
                ++stream.refits;
                if (!next.converged) {
                    ++stream.unconverged_fits;
                }
                if (s == 0) {
                    stream.initial_fit = next;
                }
                current = std::move(next);
            }
            const Eigen::RowVectorXd row = i < n_pairs
                                               ? Eigen::RowVectorXd(pairs.features().row(
                                                     static_cast<Eigen::Index>(i)))
                                               : Eigen::RowVectorXd(aligned.features().bottomRows(1));
            ForecastRecord& rec = out.records[s];
            rec.predictions[tau] = current->predict_row(row);
            rec.converged = rec.converged && current->converged;
        }
        out.streams.push_back(std::move(stream));
    }
    return out;
}

QuantileProfile quantile_profile(const std::vector<ForecastRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("quantile_profile: no records");
    }
    QuantileProfile profile;
    for (const auto& [tau, value] : records.front().predictions) {
        profile.taus.push_back(tau);
    }
    if (profile.taus.empty()) {
        throw std::invalid_argument("quantile_profile: records carry no predictions");
    }
    for (const ForecastRecord& rec : records) {
        if (rec.predictions.size() != profile.taus.size()) {
            throw std::invalid_argument("quantile_profile: inconsistent tau sets across records");
        }
        std::size_t k = 0;
        double previous = 0.0;
        bool crossed = false;
        for (const auto& [tau, value] : rec.predictions) {
            if (tau != profile.taus[k]) {
                throw std::invalid_argument(
                    "quantile_profile: inconsistent tau sets across records");
            }
            profile.series[tau].push_back(value);
            if (k > 0 && value < previous) {
                crossed = true;
            }
            previous = value;
            ++k;
        }
        profile.dates.push_back(rec.date);
        if (crossed) {
            ++profile.crossings;
            profile.crossing_dates.push_back(rec.date);
        }
    }
    return profile;
}

}  // namespace qgl
