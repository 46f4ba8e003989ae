#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qgl/evaluation.hpp"
#include "qgl/random.hpp"

using namespace qgl;

TEST_CASE("evaluate examples") {
    const MetricsReport same = evaluate(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2));
    CHECK(same.mse == 0.0);
    CHECK(same.mae == 0.0);
    CHECK(same.rmse == 0.0);
    CHECK(*same.mape == 0.0);

    const MetricsReport r = evaluate(Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 4));
    CHECK(r.mse == 2.5);
    CHECK(r.mae == 1.5);
    CHECK(std::abs(r.rmse - 1.581139) < 1e-6);
    CHECK(*r.mape == 100.0);
}

TEST_CASE("zero actuals are skipped for MAPE") {
    const MetricsReport r = evaluate(Eigen::Vector2d(0, 2), Eigen::Vector2d(1, 3));
    CHECK(*r.mape == 50.0);
    CHECK(r.mape_skipped == 1);
    CHECK(r.mse == 1.0);
    const MetricsReport none = evaluate(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 3));
    CHECK_FALSE(none.mape.has_value());
    CHECK(none.mape_skipped == 2);
}

TEST_CASE("evaluate rejects bad input") {
    CHECK_THROWS_AS((void)evaluate(Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3)),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)evaluate(Eigen::VectorXd(0), Eigen::VectorXd(0)), std::invalid_argument);
    CHECK_THROWS_AS((void)evaluate(Eigen::Vector2d(1, std::nan("")), Eigen::Vector2d(1, 2)),
                    std::invalid_argument);
}

TEST_CASE("metric identities hold on random series") {
    PortableRng rng(5);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform() * 40);
        Eigen::VectorXd a(n);
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            a[i] = rng.normal();
            p[i] = rng.normal();
        }
        const MetricsReport r = evaluate(a, p);
        CHECK(std::abs(r.rmse * r.rmse - r.mse) <= 1e-12 * std::max(1.0, r.mse));
        CHECK(r.mae <= r.rmse + 1e-15);

        // Joint permutation leaves every metric unchanged.
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::reverse(order.begin(), order.end());
        Eigen::VectorXd pa(n);
        Eigen::VectorXd pp(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            pa[i] = a[order[static_cast<std::size_t>(i)]];
            pp[i] = p[order[static_cast<std::size_t>(i)]];
        }
        const MetricsReport q = evaluate(pa, pp);
        CHECK(q.mse == doctest::Approx(r.mse).epsilon(1e-14));
        CHECK(q.mae == doctest::Approx(r.mae).epsilon(1e-14));
        CHECK(*q.mape == doctest::Approx(*r.mape).epsilon(1e-14));

        const MetricsReport zero = evaluate(a, a);
        CHECK(zero.mse == 0.0);
        CHECK(zero.mae == 0.0);
        CHECK(*zero.mape == 0.0);
    }
}
