#include "qgl/cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qgl/loss.hpp"

namespace qgl {

using nlohmann::json;

std::string_view category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::Config:
            return "config";
        case ErrorCategory::Input:
            return "input";
        case ErrorCategory::Numerical:
            return "numerical";
        case ErrorCategory::Io:
            return "io";
    }
    return "unknown";
}

LogLevel log_level_from_env() {
    const char* raw = std::getenv("QGL_LOG_LEVEL");
    if (raw == nullptr) {
        return LogLevel::Warn;
    }
    std::string v(raw);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "error") {
        return LogLevel::Error;
    }
    if (v == "info") {
        return LogLevel::Info;
    }
    if (v == "debug") {
        return LogLevel::Debug;
    }
    return LogLevel::Warn;
}

void log_message(LogLevel level, std::string_view message) {
    static const LogLevel threshold = log_level_from_env();
    if (static_cast<int>(level) > static_cast<int>(threshold)) {
        return;
    }
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << '[' << names[static_cast<int>(level)] << "] " << message << '\n';
}

std::string MethodEntry::name() const {
    return label.empty() ? std::string(method_name(method)) : label;
}

SolverConfig RunConfig::solver_config() const {
    SolverConfig c;
    c.max_iterations = solver.max_iterations;
    c.tolerance = solver.tolerance;
    c.mu_scale = solver.mu_scale;
    c.mu_min_scale = solver.mu_min_scale;
    c.continuation_factor = solver.continuation_factor;
    c.standardize = standardize;
    return c;
}

SearchGrid RunConfig::search_grid(double tau) const {
    SearchGrid g;
    g.lambda_values = lambda_grid(grid.t_min, grid.t_max, grid.step);
    g.alpha_values = grid.alpha_values;
    g.power_weights = grid.power_weights;
    g.tau = tau;
    return g;
}

namespace {

[[noreturn]] void config_error(const std::string& message) {
    throw RunError(ErrorCategory::Config, "config: " + message);
}

[[noreturn]] void input_error(const std::string& message) {
    throw RunError(ErrorCategory::Input, message);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RunError(ErrorCategory::Io, "cannot read '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void check_keys(const json& object, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (allowed.count(it.key()) == 0) {
            config_error("unknown key '" + it.key() + "' in " + where);
        }
    }
}

template <typename T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        config_error("key '" + key + "' has the wrong type");
    }
}

std::vector<double> real_list(const json& j, const std::string& key) {
    if (!j.is_array()) {
        config_error("key '" + key + "' must be an array of numbers");
    }
    std::vector<double> out;
    for (const json& v : j) {
        if (!v.is_number()) {
            config_error("key '" + key + "' must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative()) {
        path = base / path;
    }
    return path.lexically_normal();
}

MethodEntry parse_method_entry(const json& j) {
    MethodEntry entry;
    try {
        if (j.is_string()) {
            entry.method = parse_method(j.get<std::string>());
            return entry;
        }
        if (!j.is_object()) {
            config_error("methods entries must be names or objects");
        }
        check_keys(j, {"method", "label", "lambda", "alpha", "power_weight"}, "a methods entry");
        if (!j.contains("method")) {
            config_error("methods entry without 'method'");
        }
        entry.method = parse_method(get_as<std::string>(j.at("method"), "method"));
        if (j.contains("label")) {
            entry.label = get_as<std::string>(j.at("label"), "label");
        }
        if (j.contains("lambda")) {
            Hyperparams h;
            h.lambda = get_as<double>(j.at("lambda"), "lambda");
            if (j.contains("alpha")) {
                h.alpha = get_as<double>(j.at("alpha"), "alpha");
            } else if (entry.method == Method::LSQG || entry.method == Method::LASQG) {
                h.alpha = 1e-4;
            }
            const double pw = j.contains("power_weight")
                                  ? get_as<double>(j.at("power_weight"), "power_weight")
                                  : 0.0;
            h.gamma1 = pw;
            h.gamma2 = pw;
            entry.fixed = h;
        } else if (j.contains("alpha") || j.contains("power_weight")) {
            config_error("fixed alpha or power_weight requires a fixed lambda");
        }
    } catch (const std::invalid_argument& e) {
        config_error(e.what());
    }
    return entry;
}

nlohmann::ordered_json method_to_json(const MethodEntry& m) {
    nlohmann::ordered_json j;
    j["method"] = std::string(method_name(m.method));
    if (!m.label.empty()) {
        j["label"] = m.label;
    }
    if (m.fixed) {
        j["lambda"] = m.fixed->lambda;
        j["alpha"] = m.fixed->alpha;
        j["power_weight"] = m.fixed->gamma1;
    }
    return j;
}

}  // namespace

void RunConfig::validate() const {
    if (input.empty()) {
        config_error("'input' is required");
    }
    if (methods.empty()) {
        config_error("at least one method is required");
    }
    if (taus.empty()) {
        config_error("at least one tau is required");
    }
    std::set<double> seen;
    for (double t : taus) {
        if (!(t > 0.0 && t < 1.0)) {
            config_error("tau values must lie in (0,1)");
        }
        if (!seen.insert(t).second) {
            config_error("duplicate tau " + format_real(t));
        }
    }
    std::set<std::string> labels;
    for (const MethodEntry& m : methods) {
        if (!labels.insert(m.name()).second) {
            config_error("duplicate method label '" + m.name() + "'");
        }
        if (m.fixed && (!(m.fixed->lambda >= 0.0) || !(m.fixed->alpha >= 0.0 && m.fixed->alpha <= 1.0))) {
            config_error("fixed hyperparameters of '" + m.name() + "' are out of range");
        }
    }
    try {
        search_grid(0.5).validate();
    } catch (const std::invalid_argument& e) {
        config_error(e.what());
    }
    if (cv_folds < 1) {
        config_error("cv_folds must be at least 1");
    }
    if (!(min_train_fraction > 0.0 && min_train_fraction < 1.0)) {
        config_error("min_train_fraction must lie in (0,1)");
    }
    if (refit_stride < 1) {
        config_error("refit_stride must be at least 1");
    }
    if (feature_transform != "none" && feature_transform != "log_return" &&
        feature_transform != "diff") {
        config_error("feature_transform must be none, log_return or diff");
    }
    for (const auto& [name, label] : groups) {
        if (label < 1) {
            config_error("group labels must be positive (feature '" + name + "')");
        }
    }
    try {
        solver_config().validate();
    } catch (const std::invalid_argument& e) {
        config_error(e.what());
    }
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_error(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) {
        config_error("top level must be an object");
    }
    if (root.contains("format") && root.at("format") == "qgl-manifest-1") {
        if (!root.contains("config")) {
            config_error("manifest carries no 'config'");
        }
        return parse_config(root.at("config").dump(), base_dir);
    }
    check_keys(root,
               {"input", "date_column", "target_column", "target_kind", "feature_columns",
                "feature_transform", "split_date", "methods", "taus", "grid", "cv_folds",
                "min_train_fraction", "fill_policy", "groups", "select", "refit_stride",
                "retune_every_step", "include_future", "standardize", "seed", "output_dir",
                "solver", "evaluate"},
               "the configuration");
    RunConfig c;
    c.output_dir = resolve(base_dir, c.output_dir.string());
    for (auto it = root.begin(); it != root.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (key == "input") {
            c.input = resolve(base_dir, get_as<std::string>(v, key));
        } else if (key == "date_column") {
            c.date_column = get_as<std::string>(v, key);
        } else if (key == "target_column") {
            c.target_column = get_as<std::string>(v, key);
        } else if (key == "target_kind") {
            const std::string kind = lower(get_as<std::string>(v, key));
            if (kind == "price") {
                c.target_kind = TargetKind::Price;
            } else if (kind == "log_return") {
                c.target_kind = TargetKind::LogReturn;
            } else {
                config_error("target_kind must be price or log_return");
            }
        } else if (key == "feature_columns") {
            c.feature_columns = get_as<std::vector<std::string>>(v, key);
        } else if (key == "feature_transform") {
            c.feature_transform = lower(get_as<std::string>(v, key));
        } else if (key == "split_date") {
            if (!v.is_null()) {
                try {
                    c.split_date = Date::parse(get_as<std::string>(v, key));
                } catch (const std::invalid_argument& e) {
                    config_error(e.what());
                }
            }
        } else if (key == "methods") {
            if (!v.is_array()) {
                config_error("'methods' must be an array");
            }
            c.methods.clear();
            for (const json& m : v) {
                c.methods.push_back(parse_method_entry(m));
            }
        } else if (key == "taus") {
            c.taus = real_list(v, key);
        } else if (key == "grid") {
            check_keys(v, {"t_min", "t_max", "step", "alpha", "power_weight"}, "grid");
            if (v.contains("t_min")) c.grid.t_min = get_as<double>(v.at("t_min"), "grid.t_min");
            if (v.contains("t_max")) c.grid.t_max = get_as<double>(v.at("t_max"), "grid.t_max");
            if (v.contains("step")) c.grid.step = get_as<double>(v.at("step"), "grid.step");
            if (v.contains("alpha")) c.grid.alpha_values = real_list(v.at("alpha"), "grid.alpha");
            if (v.contains("power_weight")) {
                c.grid.power_weights = real_list(v.at("power_weight"), "grid.power_weight");
            }
        } else if (key == "cv_folds") {
            c.cv_folds = get_as<std::size_t>(v, key);
        } else if (key == "min_train_fraction") {
            c.min_train_fraction = get_as<double>(v, key);
        } else if (key == "fill_policy") {
            try {
                c.fill_policy = parse_fill_policy(get_as<std::string>(v, key));
            } catch (const std::invalid_argument& e) {
                config_error(e.what());
            }
        } else if (key == "groups") {
            c.groups = get_as<std::map<std::string, int>>(v, key);
        } else if (key == "select") {
            check_keys(v, {"top_k", "quantile_loss"}, "select");
            if (v.contains("top_k") && !v.at("top_k").is_null()) {
                c.select.top_k = get_as<std::size_t>(v.at("top_k"), "select.top_k");
            }
            if (v.contains("quantile_loss")) {
                c.select.quantile_loss = get_as<bool>(v.at("quantile_loss"), "select.quantile_loss");
            }
        } else if (key == "refit_stride") {
            c.refit_stride = get_as<std::size_t>(v, key);
        } else if (key == "retune_every_step") {
            c.retune_every_step = get_as<bool>(v, key);
        } else if (key == "include_future") {
            c.include_future = get_as<bool>(v, key);
        } else if (key == "standardize") {
            c.standardize = get_as<bool>(v, key);
        } else if (key == "seed") {
            c.seed = get_as<std::uint64_t>(v, key);
        } else if (key == "output_dir") {
            c.output_dir = resolve(base_dir, get_as<std::string>(v, key));
        } else if (key == "solver") {
            check_keys(v, {"max_iterations", "tolerance", "mu_scale", "mu_min_scale",
                           "continuation_factor"},
                       "solver");
            auto& s = c.solver;
            if (v.contains("max_iterations")) {
                s.max_iterations = get_as<std::size_t>(v.at("max_iterations"), "solver.max_iterations");
            }
            if (v.contains("tolerance")) s.tolerance = get_as<double>(v.at("tolerance"), "solver.tolerance");
            if (v.contains("mu_scale")) s.mu_scale = get_as<double>(v.at("mu_scale"), "solver.mu_scale");
            if (v.contains("mu_min_scale")) {
                s.mu_min_scale = get_as<double>(v.at("mu_min_scale"), "solver.mu_min_scale");
            }
            if (v.contains("continuation_factor")) {
                s.continuation_factor =
                    get_as<double>(v.at("continuation_factor"), "solver.continuation_factor");
            }
        } else if (key == "evaluate") {
            check_keys(v, {"actual", "predicted"}, "evaluate");
            if (v.contains("actual")) {
                c.evaluate_actual = resolve(base_dir, get_as<std::string>(v.at("actual"), "evaluate.actual"));
            }
            if (v.contains("predicted")) {
                c.evaluate_predicted =
                    resolve(base_dir, get_as<std::string>(v.at("predicted"), "evaluate.predicted"));
            }
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::filesystem::path base = path.parent_path();
    if (base.empty()) {
        base = ".";
    }
    return parse_config(text, std::filesystem::absolute(base));
}

std::string config_to_json(const RunConfig& c) {
    // ordered_json keeps the documented key order in the manifest.
    nlohmann::ordered_json j;
    j["input"] = c.input.string();
    j["date_column"] = c.date_column;
    j["target_column"] = c.target_column;
    j["target_kind"] = c.target_kind == TargetKind::Price ? "price" : "log_return";
    j["feature_columns"] = c.feature_columns;
    j["feature_transform"] = c.feature_transform;
    j["split_date"] = c.split_date ? nlohmann::ordered_json(c.split_date->iso()) : nlohmann::ordered_json(nullptr);
    j["methods"] = nlohmann::ordered_json::array();
    for (const MethodEntry& m : c.methods) {
        j["methods"].push_back(method_to_json(m));
    }
    j["taus"] = c.taus;
    j["grid"] = {{"t_min", c.grid.t_min},
                 {"t_max", c.grid.t_max},
                 {"step", c.grid.step},
                 {"alpha", c.grid.alpha_values},
                 {"power_weight", c.grid.power_weights}};
    j["cv_folds"] = c.cv_folds;
    j["min_train_fraction"] = c.min_train_fraction;
    j["fill_policy"] = std::string(fill_policy_name(c.fill_policy));
    j["groups"] = c.groups;
    j["select"] = {{"top_k", c.select.top_k ? nlohmann::ordered_json(*c.select.top_k) : nlohmann::ordered_json(nullptr)},
                   {"quantile_loss", c.select.quantile_loss}};
    j["refit_stride"] = c.refit_stride;
    j["retune_every_step"] = c.retune_every_step;
    j["include_future"] = c.include_future;
    j["standardize"] = c.standardize;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir.string();
    j["solver"] = {{"max_iterations", c.solver.max_iterations},
                   {"tolerance", c.solver.tolerance},
                   {"mu_scale", c.solver.mu_scale},
                   {"mu_min_scale", c.solver.mu_min_scale},
                   {"continuation_factor", c.solver.continuation_factor}};
    if (c.evaluate_actual || c.evaluate_predicted) {
        nlohmann::ordered_json e = nlohmann::ordered_json::object();
        if (c.evaluate_actual) e["actual"] = c.evaluate_actual->string();
        if (c.evaluate_predicted) e["predicted"] = c.evaluate_predicted->string();
        j["evaluate"] = e;
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// CSV input

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    out.push_back(std::move(cell));
    for (std::string& s : out) {
        const auto first = s.find_first_not_of(" \t\r");
        const auto last = s.find_last_not_of(" \t\r");
        s = first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty()) {
            lines.push_back(line);
        }
        start = end + 1;
    }
    return lines;
}

/// Parses a numeric cell; missing markers give NaN, anything else unparseable gives nullopt.
std::optional<double> parse_cell(const std::string& cell) {
    const std::string l = lower(cell);
    if (l.empty() || l == "na" || l == "nan" || l == "null" || l == "inf" || l == "+inf" ||
        l == "-inf" || l == "infinity" || l == "-infinity") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (*begin == '+') {
        ++begin;
    }
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return v;
}

}  // namespace

LoadedTable parse_csv(std::string_view text, const RunConfig& config) {
    const std::vector<std::string_view> lines = split_lines(text);
    if (lines.empty()) {
        input_error("input: file is empty");
    }
    const std::vector<std::string> header = split_csv_line(lines[0]);
    auto find = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            input_error("input: missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_col = find(config.date_column);
    const std::size_t target_col = find(config.target_column);
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> names;
    if (config.feature_columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != date_col && c != target_col) {
                feature_cols.push_back(c);
                names.push_back(header[c]);
            }
        }
    } else {
        for (const std::string& name : config.feature_columns) {
            feature_cols.push_back(find(name));
            names.push_back(name);
        }
    }

    struct Row {
        Date date;
        double target;
        std::vector<double> features;
    };
    std::vector<Row> rows;
    LoadedTable out;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::vector<std::string> cells = split_csv_line(lines[r]);
        if (cells.size() != header.size()) {
            input_error("input: line " + std::to_string(r + 1) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
        }
        Row row;
        try {
            row.date = Date::parse(cells[date_col]);
        } catch (const std::invalid_argument&) {
            input_error("input: line " + std::to_string(r + 1) + ", column '" +
                        config.date_column + "': unparseable date '" + cells[date_col] + "'");
        }
        auto number = [&](std::size_t c) {
            std::optional<double> v = parse_cell(cells[c]);
            if (!v) {
                input_error("input: line " + std::to_string(r + 1) + ", column '" + header[c] +
                            "': unparseable number '" + cells[c] + "'");
            }
            if (!std::isfinite(*v)) {
                ++out.non_finite_cells;
            }
            return *v;
        };
        row.target = number(target_col);
        for (std::size_t c : feature_cols) {
            row.features.push_back(number(c));
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            input_error("input: duplicate date " + rows[i].date.iso());
        }
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(feature_cols.size());
    std::vector<Date> dates;
    Eigen::VectorXd target(n);
    Eigen::MatrixXd features(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Row& row = rows[static_cast<std::size_t>(i)];
        dates.push_back(row.date);
        target[i] = row.target;
        for (Eigen::Index j = 0; j < p; ++j) {
            features(i, j) = row.features[static_cast<std::size_t>(j)];
        }
    }
    out.dataset = TimeSeriesDataset(std::move(dates), std::move(target), std::move(features),
                                    std::move(names), config.target_kind);
    return out;
}

LoadedTable load_csv(const std::filesystem::path& path, const RunConfig& config) {
    return parse_csv(read_file(path), config);
}

// ---------------------------------------------------------------------------
// Report writers

std::string format_real(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string tau_label(double tau) {
    // Round away representation noise such as 0.07 * 100 = 7.000000000000001.
    const double pct = std::round(tau * 100.0 * 1e9) / 1e9;
    return format_real(pct);
}

std::string cv_scores_csv(
    const std::vector<std::pair<std::string, std::pair<double, CvResult>>>& tables) {
    std::string out = "method,tau,lambda,alpha,power_weight,fold,pinball_loss,converged\n";
    for (const auto& [model, entry] : tables) {
        const auto& [tau, cv] = entry;
        for (const CvCell& cell : cv.cells) {
            out += model + ',' + format_real(tau) + ',' + format_real(cell.lambda) + ',' +
                   format_real(cell.alpha) + ',' + format_real(cell.power_weight) + ",mean," +
                   format_real(cell.mean_loss) + ',' + (cell.converged ? "true" : "false") + '\n';
        }
    }
    return out;
}

std::string forecasts_csv(const std::vector<ForecastRecord>& records) {
    std::vector<double> taus;
    if (!records.empty()) {
        for (const auto& [tau, v] : records.front().predictions) {
            taus.push_back(tau);
        }
    }
    std::string out = "date,actual";
    for (double tau : taus) {
        out += ",pred_q" + tau_label(tau);
    }
    out += ",model,converged\n";
    for (const ForecastRecord& rec : records) {
        out += rec.date.iso() + ',' + (rec.actual ? format_real(*rec.actual) : std::string());
        for (double tau : taus) {
            auto it = rec.predictions.find(tau);
            out += ',' + (it == rec.predictions.end() ? std::string() : format_real(it->second));
        }
        out += ',' + rec.model + ',' + (rec.converged ? "true" : "false") + '\n';
    }
    return out;
}

std::vector<ForecastRecord> parse_forecasts_csv(std::string_view text) {
    const std::vector<std::string_view> lines = split_lines(text);
    if (lines.empty()) {
        input_error("forecasts: file is empty");
    }
    const std::vector<std::string> header = split_csv_line(lines[0]);
    if (header.size() < 5 || header[0] != "date" || header[1] != "actual" ||
        header[header.size() - 2] != "model" || header.back() != "converged") {
        input_error("forecasts: unexpected header");
    }
    std::vector<double> taus;
    for (std::size_t c = 2; c + 2 < header.size(); ++c) {
        if (header[c].rfind("pred_q", 0) != 0) {
            input_error("forecasts: unexpected column '" + header[c] + "'");
        }
        std::optional<double> pct = parse_cell(header[c].substr(6));
        if (!pct || !std::isfinite(*pct)) {
            input_error("forecasts: cannot read the quantile of column '" + header[c] + "'");
        }
        taus.push_back(*pct / 100.0);
    }
    std::vector<ForecastRecord> records;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::vector<std::string> cells = split_csv_line(lines[r]);
        if (cells.size() != header.size()) {
            input_error("forecasts: line " + std::to_string(r + 1) + " has the wrong cell count");
        }
        ForecastRecord rec;
        try {
            rec.date = Date::parse(cells[0]);
        } catch (const std::invalid_argument&) {
            input_error("forecasts: line " + std::to_string(r + 1) + ": bad date");
        }
        if (!cells[1].empty()) {
            std::optional<double> a = parse_cell(cells[1]);
            if (!a) {
                input_error("forecasts: line " + std::to_string(r + 1) + ": bad actual");
            }
            rec.actual = *a;
        }
        for (std::size_t k = 0; k < taus.size(); ++k) {
            std::optional<double> v = parse_cell(cells[k + 2]);
            if (!v) {
                input_error("forecasts: line " + std::to_string(r + 1) + ": bad prediction");
            }
            rec.predictions[taus[k]] = *v;
        }
        rec.model = cells[cells.size() - 2];
        rec.converged = cells.back() == "true";
        records.push_back(std::move(rec));
    }
    return records;
}

std::string metrics_csv(const std::vector<ModelMetrics>& rows) {
    std::string out = "model,tau,MSE,MAE,RMSE,MAPE,mape_skipped,n\n";
    for (const ModelMetrics& m : rows) {
        out += m.model + ',' + (m.tau ? format_real(*m.tau) : std::string("NA")) + ',' + format_real(m.report.mse) + ',' +
               format_real(m.report.mae) + ',' + format_real(m.report.rmse) + ',' +
               (m.report.mape ? format_real(*m.report.mape) : std::string("NA")) + ',' +
               std::to_string(m.report.mape_skipped) + ',' + std::to_string(m.report.n) + '\n';
    }
    return out;
}

std::string metrics_by_tau_csv(const std::vector<ForecastRecord>& records) {
    std::vector<std::string> models;
    for (const ForecastRecord& rec : records) {
        if (std::find(models.begin(), models.end(), rec.model) == models.end()) {
            models.push_back(rec.model);
        }
    }
    std::vector<double> taus;
    if (!records.empty()) {
        for (const auto& [tau, v] : records.front().predictions) {
            taus.push_back(tau);
        }
    }
    std::string out = "model,metric";
    for (double tau : taus) {
        out += ",q" + tau_label(tau);
    }
    out += '\n';
    for (const std::string& model : models) {
        std::vector<MetricsReport> reports;
        std::vector<double> pinballs;
        for (double tau : taus) {
            std::vector<double> a;
            std::vector<double> p;
            for (const ForecastRecord& rec : records) {
                if (rec.model == model && rec.actual) {
                    a.push_back(*rec.actual);
                    p.push_back(rec.predictions.at(tau));
                }
            }
            const Eigen::Map<const Eigen::VectorXd> av(a.data(), static_cast<Eigen::Index>(a.size()));
            const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
            reports.push_back(evaluate(av, pv));
            pinballs.push_back(mean_pinball(av - pv, tau));
        }
        const char* metric_names[] = {"MSE", "MAE", "RMSE", "MAPE", "pinball"};
        for (int m = 0; m < 5; ++m) {
            out += model + ',' + metric_names[m];
            for (std::size_t k = 0; k < taus.size(); ++k) {
                const MetricsReport& r = reports[k];
                std::string cell;
                switch (m) {
                    case 0: cell = format_real(r.mse); break;
                    case 1: cell = format_real(r.mae); break;
                    case 2: cell = format_real(r.rmse); break;
                    case 3: cell = r.mape ? format_real(*r.mape) : std::string("NA"); break;
                    default: cell = format_real(pinballs[k]); break;
                }
                out += ',' + cell;
            }
            out += '\n';
        }
    }
    return out;
}

std::string feature_selection_csv(const Ranking& ranking, std::size_t retained,
                                  const std::map<std::string, int>& groups) {
    std::string out = "name,entry_lambda,coefficient_at_cv_lambda,rank,retained,group\n";
    for (const FeatureImportance& f : ranking.features) {
        auto it = groups.find(f.name);
        const int group = groups.empty() ? 1 : (it == groups.end() ? 0 : it->second);
        out += f.name + ',' + format_real(f.entry_lambda) + ',' +
               format_real(f.coefficient_at_cv_lambda) + ',' + std::to_string(f.rank) + ',' +
               (f.rank <= retained ? "true" : "false") + ',' + std::to_string(group) + '\n';
    }
    return out;
}

}  // namespace qgl
