#include "qgl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qgl/loss.hpp"

namespace qgl {

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::string_view> kCommands{"diagnose", "select",   "cv",
                                              "forecast", "evaluate", "pipeline"};

/// Runs @p body and converts library exceptions into categorized RunErrors.
template <typename F>
auto guarded(std::string_view stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const RunError&) {
        throw;
    } catch (const std::filesystem::filesystem_error& e) {
        throw RunError(ErrorCategory::Io, std::string(stage) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw RunError(ErrorCategory::Input, std::string(stage) + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw RunError(ErrorCategory::Numerical, std::string(stage) + ": " + e.what());
    }
}

Eigen::VectorXd column_transform(const Eigen::VectorXd& column, const std::string& transform,
                                 bool drop_first) {
    if (transform == "log_return") {
        return log_returns(column);
    }
    if (transform == "diff") {
        return column.tail(column.size() - 1) - column.head(column.size() - 1);
    }
    return drop_first ? Eigen::VectorXd(column.tail(column.size() - 1)) : column;
}

std::string fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RunError(ErrorCategory::Io, "cannot write '" + path.string() + "'");
    }
    out << content;
    if (!out) {
        throw RunError(ErrorCategory::Io, "failed writing '" + path.string() + "'");
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RunError(ErrorCategory::Io, "cannot read '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Last column of a headered single-series CSV.
Eigen::VectorXd read_series(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    std::vector<double> values;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (header) {
            header = false;
            continue;
        }
        const std::string cell = line.substr(line.rfind(',') == std::string::npos ? 0 : line.rfind(',') + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            if (used != cell.size()) {
                throw std::invalid_argument(cell);
            }
            values.push_back(v);
        } catch (const std::exception&) {
            throw RunError(ErrorCategory::Input, path.filename().string() + ": line " +
                                                     std::to_string(line_no) +
                                                     ": unparseable number '" + cell + "'");
        }
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double evaluation_tau(const std::vector<double>& taus) {
    double best = taus.front();
    for (double t : taus) {
        if (std::abs(t - 0.5) < std::abs(best - 0.5)) {
            best = t;
        }
    }
    return best;
}

std::vector<ModelMetrics> metrics_from_records(const std::vector<ForecastRecord>& records) {
    std::vector<std::string> models;
    for (const ForecastRecord& rec : records) {
        if (std::find(models.begin(), models.end(), rec.model) == models.end()) {
            models.push_back(rec.model);
        }
    }
    std::vector<ModelMetrics> out;
    for (const std::string& model : models) {
        std::vector<double> taus;
        std::vector<double> actual;
        std::vector<double> predicted;
        double tau = 0.5;
        for (const ForecastRecord& rec : records) {
            if (rec.model != model) {
                continue;
            }
            if (taus.empty()) {
                for (const auto& [t, v] : rec.predictions) {
                    taus.push_back(t);
                }
                tau = evaluation_tau(taus);
            }
            if (rec.actual) {
                actual.push_back(*rec.actual);
                predicted.push_back(rec.predictions.at(tau));
            }
        }
        ModelMetrics m;
        m.model = model;
        m.tau = tau;
        m.report = evaluate(
            Eigen::Map<const Eigen::VectorXd>(actual.data(), static_cast<Eigen::Index>(actual.size())),
            Eigen::Map<const Eigen::VectorXd>(predicted.data(),
                                              static_cast<Eigen::Index>(predicted.size())));
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

PreparedData prepare_data(const TimeSeriesDataset& raw, const RunConfig& config) {
    PreparedData out;
    out.split = config.split_date;
    const std::size_t raw_train = out.split ? rows_before(raw, *out.split) : raw.n_rows();
    if (raw.n_rows() < 3) {
        throw std::invalid_argument("prepare: need at least three rows");
    }
    std::size_t gaps = 0;
    for (double v : raw.target()) {
        gaps += std::isfinite(v) ? 0 : 1;
    }
    for (Eigen::Index j = 0; j < raw.features().cols(); ++j) {
        for (Eigen::Index i = 0; i < raw.features().rows(); ++i) {
            gaps += std::isfinite(raw.features()(i, j)) ? 0 : 1;
        }
    }
    out.filled_cells = gaps;
    const TimeSeriesDataset filled = fill_dataset(raw, config.fill_policy, raw_train);

    const bool price = config.target_kind == TargetKind::Price;
    const bool drop_first = price || config.feature_transform != "none";
    Eigen::VectorXd target;
    if (price) {
        out.prices = filled.target();
        target = log_returns(filled.target());
    } else {
        target = drop_first ? Eigen::VectorXd(filled.target().tail(filled.n_rows() - 1))
                            : filled.target();
    }
    const auto rows = static_cast<Eigen::Index>(target.size());
    Eigen::MatrixXd features(rows, filled.features().cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        try {
            features.col(j) =
                column_transform(filled.features().col(j), config.feature_transform, drop_first);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("feature '" +
                                        filled.feature_names()[static_cast<std::size_t>(j)] +
                                        "': " + e.what());
        }
    }
    std::vector<Date> dates(filled.dates().begin() + (drop_first ? 1 : 0), filled.dates().end());
    out.aligned = TimeSeriesDataset(std::move(dates), std::move(target), std::move(features),
                                    filled.feature_names(), TargetKind::LogReturn);
    out.train_rows = out.split ? rows_before(out.aligned, *out.split) : out.aligned.n_rows();
    return out;
}

PipelineResult execute(std::string_view command, const RunConfig& config) {
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
        throw RunError(ErrorCategory::Config,
                       "unknown command '" + std::string(command) +
                           "' (expected diagnose, select, cv, forecast, evaluate or pipeline)");
    }
    config.validate();
    const auto started = Clock::now();
    std::vector<std::pair<std::string, double>> timings;
    auto lap = [&](const std::string& stage, Clock::time_point since) {
        timings.emplace_back(stage,
                             std::chrono::duration<double, std::milli>(Clock::now() - since).count());
    };

    PipelineResult result;
    result.command = std::string(command);
    const bool needs_split = command == "forecast" || command == "pipeline";
    if (needs_split && !config.split_date) {
        throw RunError(ErrorCategory::Config, "config: '" + result.command +
                                                  "' needs a split_date");
    }

    std::vector<std::string> order;  // artifact write order
    auto add_artifact = [&](const std::string& name, std::string content) {
        result.artifacts[name] = std::move(content);
        order.push_back(name);
    };

    if (command == "evaluate") {
        auto t0 = Clock::now();
        guarded("evaluate", [&] {
            if (config.evaluate_actual || config.evaluate_predicted) {
                if (!config.evaluate_actual || !config.evaluate_predicted) {
                    throw RunError(ErrorCategory::Config,
                                   "config: evaluate needs both 'actual' and 'predicted'");
                }
                ModelMetrics m;
                m.model = "external";
                m.report = evaluate(read_series(*config.evaluate_actual),
                                    read_series(*config.evaluate_predicted));
                result.metrics.push_back(m);
                add_artifact("metrics.csv", metrics_csv(result.metrics));
                return 0;
            }
            result.records =
                parse_forecasts_csv(read_text(config.output_dir / "forecasts.csv"));
            result.metrics = metrics_from_records(result.records);
            add_artifact("metrics.csv", metrics_csv(result.metrics));
            add_artifact("metrics_by_tau.csv", metrics_by_tau_csv(result.records));
            return 0;
        });
        lap("evaluate", t0);
    } else {
        auto t0 = Clock::now();
        const LoadedTable table = load_csv(config.input, config);
        const PreparedData data = guarded("prepare", [&] { return prepare_data(table.dataset, config); });
        lap("load", t0);
        if (data.split && (data.train_rows < 3 || data.train_rows >= data.aligned.n_rows())) {
            throw RunError(ErrorCategory::Config,
                           "config: split_date " + data.split->iso() +
                               " must leave at least three training rows and one test row");
        }
        log_message(LogLevel::Info, "loaded " + std::to_string(data.aligned.n_rows()) +
                                        " rows, " + std::to_string(data.aligned.n_features()) +
                                        " features, " + std::to_string(data.filled_cells) +
                                        " filled cells");

        if (command == "diagnose" || command == "pipeline") {
            t0 = Clock::now();
            result.diagnostics_text = guarded("diagnose", [&] {
                std::vector<DiagnosticsRow> rows =
                    diagnose_series(config.target_column + " log return", data.aligned.target());
                if (data.prices) {
                    std::vector<DiagnosticsRow> levels =
                        diagnose_series(config.target_column, *data.prices);
                    rows.insert(rows.end(), levels.begin(), levels.end());
                }
                return format_diagnostics(rows);
            });
            add_artifact("diagnostics.txt", result.diagnostics_text);
            lap("diagnose", t0);
        }

        const TimeSeriesDataset pairs = guarded("prepare", [&] { return lagged_pairs(data.aligned); });
        const std::size_t initial_rows =
            data.split ? rows_before(pairs, *data.split) : pairs.n_rows();
        const TimeSeriesDataset initial = pairs.slice(0, initial_rows);

        std::vector<std::size_t> columns(data.aligned.n_features());
        for (std::size_t j = 0; j < columns.size(); ++j) {
            columns[j] = j;
        }
        const bool run_select = command == "select" || command == "pipeline" ||
                                ((command == "cv" || command == "forecast") && config.select.top_k);
        if (run_select) {
            t0 = Clock::now();
            SelectionOutcome sel;
            const std::size_t p = data.aligned.n_features();
            const std::size_t k = config.select.top_k.value_or(p);
            if (k > p) {
                throw RunError(ErrorCategory::Config, "config: select.top_k=" + std::to_string(k) +
                                                          " exceeds " + std::to_string(p) +
                                                          " features");
            }
            sel.ranking = guarded("select", [&] {
                RankOptions opts;
                opts.quantile_loss = config.select.quantile_loss;
                opts.tau = evaluation_tau(config.taus);
                opts.lambda_values = config.search_grid(0.5).lambda_values;
                opts.cv_folds = config.cv_folds;
                opts.min_train_fraction = config.min_train_fraction;
                opts.solver = config.solver_config();
                return importance_rank(initial, opts);
            });
            for (std::size_t r = 0; r < k; ++r) {
                sel.retained_columns.push_back(sel.ranking.features[r].column);
                sel.retained_names.push_back(sel.ranking.features[r].name);
            }
            columns = sel.retained_columns;
            add_artifact("feature_selection.csv",
                         feature_selection_csv(sel.ranking, k, config.groups));
            result.selection = std::move(sel);
            lap("select", t0);
        }

        const TimeSeriesDataset model_data = data.aligned.select_columns(columns);
        result.feature_names = model_data.feature_names();
        const std::vector<std::string>& names = result.feature_names;
        try {
            result.groups = config.groups.empty() ? single_group(names.size())
                                                  : assign_groups(names, config.groups);
        } catch (const std::invalid_argument& e) {
            throw RunError(ErrorCategory::Config, std::string("config: groups: ") + e.what());
        }

        if (command == "cv") {
            t0 = Clock::now();
            const TimeSeriesDataset window = lagged_pairs(model_data).slice(0, initial_rows);
            const auto min_train = std::max<std::size_t>(
                1, static_cast<std::size_t>(config.min_train_fraction *
                                            static_cast<double>(window.n_rows())));
            for (const MethodEntry& m : config.methods) {
                if (m.fixed) {
                    continue;
                }
                for (double tau : config.taus) {
                    CvResult cv = guarded("cv", [&] {
                        return cross_validate(window, &result.groups, config.search_grid(tau),
                                              m.method, config.cv_folds, min_train,
                                              config.solver_config());
                    });
                    log_message(LogLevel::Info, "cv " + m.name() + " tau=" + format_real(tau) +
                                                    " lambda=" + format_real(cv.best.lambda));
                    result.cv_tables.push_back({m.name(), {tau, std::move(cv)}});
                }
            }
            add_artifact("cv_scores.csv", cv_scores_csv(result.cv_tables));
            lap("cv", t0);
        }

        if (command == "forecast" || command == "pipeline") {
            t0 = Clock::now();
            for (const MethodEntry& m : config.methods) {
                ForecastSettings settings;
                settings.taus = config.taus;
                settings.grid = config.search_grid(0.5);
                settings.cv_folds = config.cv_folds;
                settings.min_train_fraction = config.min_train_fraction;
                settings.refit_stride = config.refit_stride;
                settings.retune_every_step = config.retune_every_step;
                settings.include_future = config.include_future;
                settings.solver = config.solver_config();
                settings.fixed = m.fixed;
                settings.label = m.name();
                const auto m0 = Clock::now();
                ForecastOutput fo = guarded("forecast", [&] {
                    return expanding_window_forecast(model_data, &result.groups, m.method,
                                                     *data.split, settings);
                });
                lap("forecast " + m.name(), m0);
                for (const ForecastStream& s : fo.streams) {
                    if (s.cv) {
                        result.cv_tables.push_back({m.name(), {s.tau, *s.cv}});
                    }
                    if (s.unconverged_fits > 0) {
                        log_message(LogLevel::Warn,
                                    m.name() + " tau=" + format_real(s.tau) + ": " +
                                        std::to_string(s.unconverged_fits) + " of " +
                                        std::to_string(s.refits) +
                                        " refits stopped before the solver tolerance");
                    }
                }
                result.records.insert(result.records.end(), fo.records.begin(), fo.records.end());
                result.streams[m.name()] = std::move(fo.streams);
            }
            add_artifact("cv_scores.csv", cv_scores_csv(result.cv_tables));
            add_artifact("forecasts.csv", forecasts_csv(result.records));
            lap("forecast", t0);
        }

        if (command == "pipeline") {
            t0 = Clock::now();
            result.metrics = guarded("evaluate", [&] { return metrics_from_records(result.records); });
            add_artifact("metrics.csv", metrics_csv(result.metrics));
            add_artifact("metrics_by_tau.csv",
                         guarded("evaluate", [&] { return metrics_by_tau_csv(result.records); }));
            lap("evaluate", t0);
        }
    }

    // Manifest: everything needed to re-run, and no wall-clock data.
    nlohmann::ordered_json manifest;
    manifest["format"] = "qgl-manifest-1";
    manifest["command"] = result.command;
    manifest["version"] = std::string(qgl_version);
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["seed"] = config.seed;
    manifest["config"] = nlohmann::ordered_json::parse(config_to_json(config));
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const std::string& name : order) {
        const std::string& content = result.artifacts.at(name);
        files.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", fnv1a64(content)}});
    }
    manifest["artifacts"] = files;
    if (result.selection) {
        manifest["selected_features"] = result.selection->retained_names;
        manifest["group_labels"] = result.groups.labels();
    }
    nlohmann::ordered_json streams = nlohmann::ordered_json::array();
    for (const MethodEntry& m : config.methods) {
        auto it = result.streams.find(m.name());
        if (it == result.streams.end()) {
            continue;
        }
        for (const ForecastStream& s : it->second) {
            std::vector<std::string> support;
            for (std::size_t j : s.initial_fit.support()) {
                support.push_back(result.feature_names[j]);
            }
            streams.push_back({{"model", m.name()},
                               {"tau", s.tau},
                               {"lambda", s.hyper.lambda},
                               {"alpha", s.hyper.alpha},
                               {"power_weight", s.hyper.gamma1},
                               {"tuned", s.cv.has_value()},
                               {"refits", s.refits},
                               {"unconverged_fits", s.unconverged_fits},
                               {"support", support}});
        }
    }
    if (!streams.empty()) {
        manifest["streams"] = streams;
        nlohmann::ordered_json crossings;
        for (const MethodEntry& m : config.methods) {
            std::vector<ForecastRecord> own;
            for (const ForecastRecord& rec : result.records) {
                if (rec.model == m.name()) {
                    own.push_back(rec);
                }
            }
            if (!own.empty()) {
                crossings[m.name()] = quantile_profile(own).crossings;
            }
        }
        manifest["quantile_crossings"] = crossings;
    }

    guarded("write", [&] {
        std::filesystem::create_directories(config.output_dir);
        for (const std::string& name : order) {
            write_file(config.output_dir / name, result.artifacts.at(name));
        }
        write_file(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
        nlohmann::ordered_json timing;
        timing["command"] = result.command;
        nlohmann::ordered_json stages = nlohmann::ordered_json::array();
        for (const auto& [stage, ms] : timings) {
            stages.push_back({{"stage", stage}, {"milliseconds", ms}});
        }
        timing["stages"] = stages;
        timing["total_milliseconds"] =
            std::chrono::duration<double, std::milli>(Clock::now() - started).count();
        write_file(config.output_dir / "run_timings.json", timing.dump(2) + "\n");
        return 0;
    });
    return result;
}

int run_command(std::string_view command, const RunConfig& config) {
    try {
        const PipelineResult r = execute(command, config);
        log_message(LogLevel::Info, std::string(command) + ": wrote " +
                                        std::to_string(r.artifacts.size() + 1) + " files to " +
                                        config.output_dir.string());
        return 0;
    } catch (const RunError& e) {
        log_message(LogLevel::Error, std::string(category_name(e.category())) + " error: " +
                                         e.what());
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        log_message(LogLevel::Error, std::string("numerical error: ") + e.what());
        return static_cast<int>(ErrorCategory::Numerical);
    }
}

}  // namespace qgl
