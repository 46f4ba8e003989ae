#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "qgl/core_model.hpp"
#include "qgl/solver.hpp"
#include "test_support.hpp"

using namespace qgl;

TEST_CASE("validate_groups counts group sizes") {
    const std::vector<int> labels{1, 1, 1, 1, 1, 1, 1, 2, 2};
    const GroupStructure g = validate_groups(labels, 9);
    CHECK(g.group_count() == 2);
    CHECK(g.group_sizes() == std::vector<std::size_t>{7, 2});
    CHECK(g.members(1) == std::vector<std::size_t>{7, 8});
}

TEST_CASE("validate_groups accepts a single feature") {
    const std::vector<int> labels{1};
    const GroupStructure g = validate_groups(labels, 1);
    CHECK(g.group_count() == 1);
    CHECK(g.group_sizes() == std::vector<std::size_t>{1});
}

TEST_CASE("validate_groups rejects gaps, bad labels and length mismatch") {
    const std::vector<int> gap{1, 3};
    CHECK_THROWS_AS((void)validate_groups(gap, 2), std::invalid_argument);
    const std::vector<int> zero{0, 1};
    CHECK_THROWS_AS((void)validate_groups(zero, 2), std::invalid_argument);
    const std::vector<int> short_labels{1};
    CHECK_THROWS_AS((void)validate_groups(short_labels, 2), std::invalid_argument);
}

TEST_CASE("validate_groups allows interleaved members") {
    const std::vector<int> labels{2, 1, 2, 1};
    const GroupStructure g = validate_groups(labels, 4);
    CHECK(g.members(0) == std::vector<std::size_t>{1, 3});
    CHECK(g.members(1) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("validate_groups is a pure function") {
    const std::vector<int> labels{1, 2, 2, 3, 1};
    const GroupStructure a = validate_groups(labels, 5);
    const GroupStructure b = validate_groups(labels, 5);
    CHECK(a.labels() == b.labels());
    CHECK(a.group_sizes() == b.group_sizes());
    for (std::size_t g = 0; g < a.group_count(); ++g) {
        CHECK(a.members(g) == b.members(g));
    }
}

TEST_CASE("standardize uses the sample standard deviation") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    const auto ds = TimeSeriesDataset::from_arrays(Eigen::VectorXd::Zero(3), x);
    const auto [z, stats] = standardize(ds);
    CHECK(stats.mean[0] == doctest::Approx(2.0));
    CHECK(stats.scale[0] == doctest::Approx(1.0));
    CHECK(z.features()(0, 0) == doctest::Approx(-1.0));
    CHECK(z.features()(1, 0) == doctest::Approx(0.0));
    CHECK(z.features()(2, 0) == doctest::Approx(1.0));
    // The target is never standardized.
    CHECK(z.target() == ds.target());
}

TEST_CASE("standardize is idempotent on already standardized columns") {
    const auto ds = testing::linear_dataset(50, 3, 11);
    const auto [z, stats] = standardize(ds);
    const auto [zz, stats2] = standardize(z);
    CHECK((zz.features() - z.features()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("standardize rejects a constant column") {
    Eigen::MatrixXd x(3, 1);
    x << 5, 5, 5;
    const auto ds = TimeSeriesDataset::from_arrays(Eigen::VectorXd::Zero(3), x);
    CHECK_THROWS_AS((void)standardize(ds), std::invalid_argument);
}

TEST_CASE("standardize reuses supplied statistics") {
    const auto ds = testing::linear_dataset(40, 2, 3);
    const auto [train, stats] = standardize(ds.slice(0, 20));
    const auto [test, same] = standardize(ds.slice(20, 40), stats);
    CHECK(same.mean == stats.mean);
    CHECK(same.scale == stats.scale);
    const Eigen::MatrixXd expected = stats.apply(ds.slice(20, 40).features());
    CHECK(test.features() == expected);
}

TEST_CASE("dataset rejects misaligned sizes and unsorted dates") {
    CHECK_THROWS_AS(TimeSeriesDataset({Date{2020, 1, 1}}, Eigen::VectorXd::Zero(2),
                                      Eigen::MatrixXd::Zero(2, 1), {"a"}),
                    std::invalid_argument);
    CHECK_THROWS_AS(TimeSeriesDataset({Date{2020, 1, 2}, Date{2020, 1, 1}},
                                      Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 1), {"a"}),
                    std::invalid_argument);
}

TEST_CASE("dates parse at month and day resolution") {
    CHECK(Date::parse("2019-12").iso() == "2019-12");
    CHECK(Date::parse("2019-12").monthly());
    CHECK(Date::parse("2020-02-29").iso() == "2020-02-29");
    CHECK(Date::parse("2019-12").advanced(1).iso() == "2020-01");
    CHECK(Date::parse("2020-02-28").advanced(2).iso() == "2020-03-01");
    CHECK_THROWS_AS((void)Date::parse("2019-13"), std::invalid_argument);
    CHECK_THROWS_AS((void)Date::parse("2019-02-30"), std::invalid_argument);
    CHECK_THROWS_AS((void)Date::parse("yesterday"), std::invalid_argument);
}

TEST_CASE("method names round-trip") {
    for (Method m : {Method::LmLasso, Method::QrLasso, Method::ALasso, Method::LQG, Method::LSQG,
                     Method::LASQG}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK(parse_method("l-sqg") == Method::LSQG);
    CHECK_THROWS_AS((void)parse_method("ridge"), std::invalid_argument);
}

TEST_CASE("predictions agree on standardized and original scales") {
    // Any fit: compare the original-scale predictor against the standardized one.
    const auto ds = testing::linear_dataset(80, 4, 21, {1.0, -0.5, 0.0, 0.25}, 0.5);
    const GroupStructure g = single_group(4);
    Hyperparams h;
    h.lambda = 0.05;
    h.alpha = 0.5;
    const FitResult r = fit_preset(Method::LSQG, ds, &g, 0.5, h);
    const auto [z, stats] = standardize(ds, r.standardization);
    const Eigen::VectorXd from_std =
        (z.features() * r.standardized_coefficients()).array() + r.standardized_intercept();
    const Eigen::VectorXd from_orig = r.predict(ds.features());
    CHECK((from_std - from_orig).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(r.predict_row(ds.features().row(i)) == doctest::Approx(from_orig[i]).epsilon(1e-12));
    }
}
