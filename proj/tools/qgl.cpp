#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qgl/pipeline.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

double parse_real(const std::string& text, const std::string& flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw qgl::RunError(qgl::ErrorCategory::Config,
                        flag + ": '" + text + "' is not a number");
}

struct Overrides {
    std::string tau;
    std::string lambda_grid;
    std::string method;
    std::string split_date;
    std::string fill_policy;
    std::string output_dir;
};

void apply(const Overrides& o, qgl::RunConfig& config) {
    if (!o.tau.empty()) {
        config.taus.clear();
        for (const std::string& t : split_list(o.tau)) {
            config.taus.push_back(parse_real(t, "--tau"));
        }
    }
    if (!o.lambda_grid.empty()) {
        const std::vector<std::string> parts = split_list(o.lambda_grid);
        if (parts.size() != 3) {
            throw qgl::RunError(qgl::ErrorCategory::Config,
                                "--lambda-grid expects t_min,t_max,step");
        }
        config.grid.t_min = parse_real(parts[0], "--lambda-grid");
        config.grid.t_max = parse_real(parts[1], "--lambda-grid");
        config.grid.step = parse_real(parts[2], "--lambda-grid");
    }
    if (!o.method.empty()) {
        config.methods.clear();
        for (const std::string& name : split_list(o.method)) {
            qgl::MethodEntry entry;
            try {
                entry.method = qgl::parse_method(name);
            } catch (const std::invalid_argument& e) {
                throw qgl::RunError(qgl::ErrorCategory::Config, std::string("--method: ") + e.what());
            }
            config.methods.push_back(entry);
        }
    }
    if (!o.split_date.empty()) {
        try {
            config.split_date = qgl::Date::parse(o.split_date);
        } catch (const std::invalid_argument& e) {
            throw qgl::RunError(qgl::ErrorCategory::Config, std::string("--split-date: ") + e.what());
        }
    }
    if (!o.fill_policy.empty()) {
        try {
            config.fill_policy = qgl::parse_fill_policy(o.fill_policy);
        } catch (const std::invalid_argument& e) {
            throw qgl::RunError(qgl::ErrorCategory::Config, std::string("--fill-policy: ") + e.what());
        }
    }
    if (!o.output_dir.empty()) {
        config.output_dir = std::filesystem::absolute(o.output_dir);
    }
    config.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantile regression with sparse group penalties for return forecasting"};
    app.set_version_flag("--version", std::string(qgl::qgl_version));
    app.require_subcommand(1, 1);

    std::string config_path;
    Overrides overrides;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"diagnose", "stationarity, normality and autocorrelation tests"},
        {"select", "rank features by Lasso entry order"},
        {"cv", "cross-validated hyperparameter search"},
        {"forecast", "expanding-window quantile forecasts"},
        {"evaluate", "error metrics of saved or supplied forecasts"},
        {"pipeline", "diagnose, select, cv, forecast and evaluate in one run"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration or manifest")->required();
        sub->add_option("--tau", overrides.tau, "comma separated quantile levels");
        sub->add_option("--lambda-grid", overrides.lambda_grid, "t_min,t_max,step on the log10 scale");
        sub->add_option("--method", overrides.method, "comma separated method names");
        sub->add_option("--split-date", overrides.split_date, "first test date (YYYY-MM or YYYY-MM-DD)");
        sub->add_option("--fill-policy", overrides.fill_policy,
                        "train_mean, paper_parity or backward_fill");
        sub->add_option("--output-dir", overrides.output_dir, "directory for reports");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int status = app.exit(e);
        return status == 0 ? 0 : static_cast<int>(qgl::ErrorCategory::Config);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    qgl::RunConfig config;
    try {
        config = qgl::load_config(config_path);
        apply(overrides, config);
    } catch (const qgl::RunError& e) {
        qgl::log_message(qgl::LogLevel::Error,
                         std::string(qgl::category_name(e.category())) + " error: " + e.what());
        return static_cast<int>(e.category());
    }
    return qgl::run_command(command, config);
}
