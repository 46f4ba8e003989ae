#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qgl/pipeline.hpp"
#include "qgl/synthetic.hpp"

using namespace qgl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Small seeded table and a fast configuration pointing at it.
struct Workspace {
    fs::path dir;
    RunConfig config;

    explicit Workspace(const std::string& name) {
        dir = fs::temp_directory_path() / ("qgl_test_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        SyntheticSpec spec;
        spec.n = 120;
        spec.p = 10;
        spec.true_features = {0, 1, 7};
        spec.true_coefficients = {0.01, -0.008, 0.009};
        const SyntheticData data = generate_synthetic(spec);
        spit(dir / "data.csv", synthetic_csv(data));
        config.input = dir / "data.csv";
        config.target_column = "price";
        config.target_kind = TargetKind::Price;
        config.split_date = data.dates[100];
        config.methods = {MethodEntry{Method::LSQG, "", std::nullopt},
                          MethodEntry{Method::QrLasso, "QR", Hyperparams{}}};
        config.taus = {0.25, 0.5, 0.75};
        config.grid.t_min = -3;
        config.grid.t_max = 0.01;
        config.grid.step = 0.5;
        config.cv_folds = 3;
        config.groups = data.groups;
        config.select.top_k = 6;
        config.refit_stride = 5;
        config.solver.mu_min_scale = 1e-4;
        config.output_dir = dir / "out";
    }
};

}  // namespace

TEST_CASE("pipeline writes the six reports and a manifest") {
    Workspace ws("six");
    const PipelineResult r = execute("pipeline", ws.config);
    for (const char* name : {"diagnostics.txt", "feature_selection.csv", "cv_scores.csv",
                             "forecasts.csv", "metrics.csv", "metrics_by_tau.csv", "manifest.json",
                             "run_timings.json"}) {
        CAPTURE(name);
        CHECK(fs::exists(ws.config.output_dir / name));
    }
    CHECK(r.artifacts.size() == 6);
    CHECK(r.feature_names.size() == 6);
    const std::string forecasts = slurp(ws.config.output_dir / "forecasts.csv");
    CHECK(forecasts.rfind("date,actual,pred_q25,pred_q50,pred_q75,model,converged\n", 0) == 0);
    const auto manifest = nlohmann::json::parse(slurp(ws.config.output_dir / "manifest.json"));
    CHECK(manifest.at("command") == "pipeline");
    CHECK(manifest.at("artifacts").size() == 6);
    CHECK(manifest.at("streams").size() == 6);
}

TEST_CASE("each command writes its own reports") {
    Workspace ws("commands");
    CHECK(execute("diagnose", ws.config).artifacts.count("diagnostics.txt") == 1);
    CHECK(execute("select", ws.config).artifacts.count("feature_selection.csv") == 1);
    const PipelineResult cv = execute("cv", ws.config);
    CHECK(cv.artifacts.count("cv_scores.csv") == 1);
    // One fixed method is skipped, so three tau tables for L-SQG remain.
    CHECK(cv.cv_tables.size() == 3);
    const PipelineResult fc = execute("forecast", ws.config);
    CHECK(fc.artifacts.count("forecasts.csv") == 1);
    const PipelineResult ev = execute("evaluate", ws.config);
    CHECK(ev.artifacts.count("metrics.csv") == 1);
    CHECK(ev.metrics.size() == 2);
}

TEST_CASE("repeated runs are byte identical and the manifest re-runs") {
    Workspace ws("determinism");
    (void)execute("pipeline", ws.config);
    const std::string first = slurp(ws.config.output_dir / "forecasts.csv");
    const std::string manifest = slurp(ws.config.output_dir / "manifest.json");
    RunConfig again = load_config(ws.config.output_dir / "manifest.json");
    again.output_dir = ws.dir / "rerun";
    (void)execute("pipeline", again);
    CHECK(slurp(again.output_dir / "forecasts.csv") == first);
    for (const char* name : {"diagnostics.txt", "feature_selection.csv", "cv_scores.csv",
                             "metrics.csv", "metrics_by_tau.csv"}) {
        CHECK(slurp(again.output_dir / name) == slurp(ws.config.output_dir / name));
    }
    // Only the output directory differs between the two manifests.
    auto a = nlohmann::json::parse(manifest);
    auto b = nlohmann::json::parse(slurp(again.output_dir / "manifest.json"));
    a["config"].erase("output_dir");
    b["config"].erase("output_dir");
    CHECK(a == b);
}

TEST_CASE("evaluate with mismatched lengths fails with an input error") {
    Workspace ws("mismatch");
    spit(ws.dir / "actual.csv", "value\n1\n2\n3\n");
    spit(ws.dir / "predicted.csv", "value\n1\n2\n");
    ws.config.evaluate_actual = ws.dir / "actual.csv";
    ws.config.evaluate_predicted = ws.dir / "predicted.csv";
    CHECK(run_command("evaluate", ws.config) == static_cast<int>(ErrorCategory::Input));
    try {
        (void)execute("evaluate", ws.config);
    } catch (const RunError& e) {
        CHECK(std::string(e.what()).find("length") != std::string::npos);
    }
}

TEST_CASE("external series evaluate cleanly") {
    Workspace ws("external");
    spit(ws.dir / "actual.csv", "date,value\n2020-01,1\n2020-02,2\n");
    spit(ws.dir / "predicted.csv", "date,value\n2020-01,2\n2020-02,4\n");
    ws.config.evaluate_actual = ws.dir / "actual.csv";
    ws.config.evaluate_predicted = ws.dir / "predicted.csv";
    const PipelineResult r = execute("evaluate", ws.config);
    CHECK(r.artifacts.at("metrics.csv") ==
          "model,tau,MSE,MAE,RMSE,MAPE,mape_skipped,n\nexternal,NA,2.5,1.5,1.5811388300841898,100,0,2\n");
}

TEST_CASE("error categories map to exit statuses") {
    Workspace ws("errors");
    RunConfig no_split = ws.config;
    no_split.split_date.reset();
    CHECK(run_command("forecast", no_split) == static_cast<int>(ErrorCategory::Config));
    CHECK(run_command("transmogrify", ws.config) == static_cast<int>(ErrorCategory::Config));
    RunConfig missing = ws.config;
    missing.input = ws.dir / "absent.csv";
    CHECK(run_command("diagnose", missing) == static_cast<int>(ErrorCategory::Io));
    RunConfig too_many = ws.config;
    too_many.select.top_k = 50;
    CHECK(run_command("select", too_many) == static_cast<int>(ErrorCategory::Config));
    spit(ws.dir / "bad.csv", "date,price,f01\n2020-01-01,1,x\n2020-01-02,2,1\n2020-01-03,2,1\n");
    RunConfig bad = ws.config;
    bad.input = ws.dir / "bad.csv";
    CHECK(run_command("diagnose", bad) == static_cast<int>(ErrorCategory::Input));
}

TEST_CASE("cv with the default grid scores every cell") {
    Workspace ws("default_grid");
    ws.config.grid = GridConfig{};
    ws.config.methods = {MethodEntry{Method::LASQG, "", std::nullopt}};
    ws.config.taus = {0.5};
    ws.config.select.top_k = 3;
    const PipelineResult r = execute("cv", ws.config);
    REQUIRE(r.cv_tables.size() == 1);
    CHECK(r.cv_tables[0].second.second.cells.size() == 31 * 1 * 5);
}

TEST_CASE("command line runs the bundled dataset") {
    const fs::path dir = fs::temp_directory_path() / "qgl_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    // Fixed hyperparameters keep the smoke run fast.
    spit(dir / "config.json", std::string(R"({
        "input": ")") + QGL_DATA_DIR + R"(/synthetic.csv",
        "target_column": "price",
        "target_kind": "price",
        "split_date": "2000-08-29",
        "methods": [{"method": "L-SQG", "lambda": 0.02}, {"method": "qr_lasso", "label": "QR", "lambda": 0}],
        "taus": [0.5],
        "grid": {"t_min": -2, "t_max": 0.01, "step": 1},
        "refit_stride": 20,
        "solver": {"mu_min_scale": 1e-4}
    })");
    const std::string cmd = std::string(QGL_CLI_PATH) + " pipeline --config " +
                            (dir / "config.json").string() + " --output-dir " +
                            (dir / "out").string() + " --tau 0.25,0.75";
    CHECK(std::system(cmd.c_str()) == 0);
    const std::string forecasts = slurp(dir / "out" / "forecasts.csv");
    CHECK(forecasts.rfind("date,actual,pred_q25,pred_q75,model,converged\n", 0) == 0);
    const std::string bad = std::string(QGL_CLI_PATH) + " pipeline --config " +
                            (dir / "config.json").string() + " --method ridge 2>/dev/null";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == static_cast<int>(ErrorCategory::Config));
}
