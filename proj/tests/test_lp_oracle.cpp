#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qgl/loss.hpp"
#include "qgl/lp_oracle.hpp"
#include "test_support.hpp"

using namespace qgl;

TEST_CASE("huge lambda leaves only the intercept quantile") {
    const auto ds = testing::linear_dataset(21, 3, 4, {1, 0, 0}, 1.0);
    const LpSolution lp = lp_oracle(ds, 0.5, 1e6);
    CHECK(lp.beta.isZero(1e-12));
    Eigen::VectorXd sorted = ds.target();
    std::sort(sorted.data(), sorted.data() + sorted.size());
    CHECK(lp.intercept == doctest::Approx(sorted[10]).epsilon(1e-12));
    const Eigen::VectorXd residual = ds.target().array() - lp.intercept;
    CHECK(lp.objective == doctest::Approx(mean_pinball(residual, 0.5)).epsilon(1e-12));
}

TEST_CASE("a single observation is fitted by the intercept alone") {
    Eigen::MatrixXd x(1, 2);
    x << 0.4, -1.0;
    const auto ds = TimeSeriesDataset::from_arrays(Eigen::VectorXd::Constant(1, 3.5), x);
    const LpSolution lp = lp_oracle(ds, 0.3, 0.1, false);
    CHECK(lp.objective == doctest::Approx(0.0));
    CHECK(lp.beta.isZero(1e-12));
    CHECK(lp.intercept == doctest::Approx(3.5));
}

TEST_CASE("lp solution has the objective it reports") {
    const auto ds = testing::linear_dataset(25, 3, 5, {1, -1, 0.5}, 0.5);
    const LpSolution lp = lp_oracle(ds, 0.25, 0.01, false);
    const double risk = pinball_risk(lp.intercept, lp.beta, ds, 0.25);
    CHECK(lp.objective == doctest::Approx(risk + 0.01 * lp.beta.lpNorm<1>()).epsilon(1e-10));
}

TEST_CASE("lp oracle rejects oversized problems") {
    const auto ds = testing::linear_dataset(201, 2, 6);
    CHECK_THROWS_AS((void)lp_oracle(ds, 0.5, 0.1), std::invalid_argument);
}
