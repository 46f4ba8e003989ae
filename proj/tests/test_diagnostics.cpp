#include <doctest.h>

#include <cmath>
#include <string>

#include "qgl/diagnostics.hpp"
#include "qgl/random.hpp"
#include "series_fixtures.hpp"
#include "statsmodels_reference.hpp"

using namespace qgl;

TEST_CASE("ADF and Jarque-Bera match the reference implementation") {
    const auto cases = testing::diagnostics_cases();
    REQUIRE(cases.size() == std::size(testing::reference_stats));
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& ref = testing::reference_stats[i];
        CAPTURE(cases[i].name);
        REQUIRE(cases[i].name == ref.name);
        const AdfResult adf = adf_test(cases[i].values, cases[i].adf_lags);
        CHECK(std::abs(adf.statistic - ref.adf_statistic) < 1e-3);
        CHECK(std::abs(adf.critical_5pct - ref.adf_critical_5pct) < 5e-3);
        const JarqueBeraResult jb = jarque_bera(cases[i].values);
        CHECK(std::abs(jb.statistic - ref.jb_statistic) < 1e-6 * std::max(1.0, ref.jb_statistic));
        CHECK(std::abs(jb.skewness - ref.skewness) < 1e-8);
        CHECK(std::abs(jb.kurtosis - ref.kurtosis) < 1e-8);
    }
}

TEST_CASE("ADF separates noise from a random walk") {
    const Eigen::VectorXd noise = testing::ar1_series(500, 0.0, 42);
    const AdfResult a = adf_test(noise, 1);
    CHECK(a.statistic < -10.0);
    CHECK(a.reject);
    const Eigen::VectorXd walk = testing::ar1_series(500, 1.0, 42);
    const AdfResult b = adf_test(walk, 1);
    CHECK(b.statistic > -3.0);
    CHECK(b.statistic < 1.0);
    CHECK_FALSE(b.reject);
}

TEST_CASE("ADF statistic ignores a constant shift") {
    const Eigen::VectorXd x = testing::ar1_series(300, 0.7, 3);
    const Eigen::VectorXd shifted = x.array() + 123.0;
    CHECK(adf_test(x, 2).statistic == doctest::Approx(adf_test(shifted, 2).statistic).epsilon(1e-9));
}

TEST_CASE("ADF critical values tighten with more observations") {
    const AdfResult small = adf_test(testing::ar1_series(60, 0.0, 1), 1);
    const AdfResult large = adf_test(testing::ar1_series(2000, 0.0, 1), 1);
    CHECK(small.critical_5pct < large.critical_5pct);
    CHECK(large.critical_5pct == doctest::Approx(-2.8626).epsilon(1e-3));
    CHECK(small.critical_1pct < small.critical_5pct);
    CHECK(small.critical_5pct < small.critical_10pct);
}

TEST_CASE("Jarque-Bera hand computed two-point series") {
    Eigen::VectorXd x(60);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = i % 2 == 0 ? -1.0 : 1.0;
    }
    const JarqueBeraResult jb = jarque_bera(x);
    CHECK(jb.skewness == doctest::Approx(0.0));
    CHECK(jb.kurtosis == doctest::Approx(1.0));
    CHECK(jb.statistic == doctest::Approx(60.0 / 6.0));
}

TEST_CASE("Jarque-Bera decisions on normal and heavy-tailed samples") {
    PortableRng rng(77);
    Eigen::VectorXd normal(5000);
    Eigen::VectorXd cubed(5000);
    for (Eigen::Index i = 0; i < normal.size(); ++i) {
        normal[i] = rng.normal();
        cubed[i] = normal[i] * normal[i] * normal[i];
    }
    CHECK_FALSE(jarque_bera(normal).reject_normality);
    CHECK(jarque_bera(cubed).reject_normality);
    CHECK(jarque_bera(normal).statistic >= 0.0);
}

TEST_CASE("ACF and PACF at lag zero are one") {
    const Eigen::VectorXd x = testing::ar1_series(200, 0.3, 5);
    CHECK(acf(x, 3)[0] == 1.0);
    CHECK(pacf(x, 3)[0] == 1.0);
}

TEST_CASE("AR(1) autocorrelations") {
    const Eigen::VectorXd x = testing::ar1_series(10000, 0.8, 6);
    const Eigen::VectorXd a = acf(x, 2);
    const Eigen::VectorXd p = pacf(x, 2);
    CHECK(a[1] >= 0.77);
    CHECK(a[1] <= 0.83);
    CHECK(std::abs(p[2]) <= 0.03);
}

TEST_CASE("white noise stays inside the confidence band") {
    const Eigen::VectorXd x = testing::ar1_series(2000, 0.0, 6);
    const double band = 1.96 / std::sqrt(2000.0);
    const Eigen::VectorXd a = acf(x, 40);
    const Eigen::VectorXd p = pacf(x, 40);
    int inside_a = 0;
    int inside_p = 0;
    for (Eigen::Index k = 1; k <= 40; ++k) {
        inside_a += std::abs(a[k]) <= band ? 1 : 0;
        inside_p += std::abs(p[k]) <= band ? 1 : 0;
    }
    CHECK(inside_a >= 38);
    CHECK(inside_p >= 38);
}

TEST_CASE("ACF is bounded and affine invariant") {
    const Eigen::VectorXd x = testing::ar1_series(300, 0.6, 8);
    const Eigen::VectorXd y = (x.array() * 3.5 + 10.0).matrix();
    const Eigen::VectorXd a = acf(x, 20);
    const Eigen::VectorXd b = acf(y, 20);
    for (Eigen::Index k = 0; k <= 20; ++k) {
        CHECK(std::abs(a[k]) <= 1.0);
        CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-10));
    }
}

TEST_CASE("diagnostics table lists every test") {
    const Eigen::VectorXd x = testing::ar1_series(200, 0.2, 9);
    const auto rows = diagnose_series("returns", x, 2);
    const std::string table = format_diagnostics(rows);
    CHECK(table.find("ADF") != std::string::npos);
    CHECK(table.find("Jarque-Bera") != std::string::npos);
    CHECK(table.find("PACF(2)") != std::string::npos);
    CHECK(table.rfind("test", 0) == 0);
}

TEST_CASE("diagnostics reject degenerate input") {
    CHECK_THROWS_AS((void)adf_test(Eigen::VectorXd::Constant(50, 1.0), 1), std::invalid_argument);
    CHECK_THROWS_AS((void)jarque_bera(Eigen::VectorXd::Constant(10, 2.0)), std::invalid_argument);
    CHECK_THROWS_AS((void)adf_test(Eigen::Vector3d(1, 2, 3), 1), std::invalid_argument);
}
