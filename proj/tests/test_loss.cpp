#include <doctest.h>

#include <cmath>
#include <vector>

#include "qgl/loss.hpp"
#include "qgl/random.hpp"

using namespace qgl;

TEST_CASE("pinball examples") {
    CHECK(pinball(1.0, 0.5) == 0.5);
    CHECK(pinball(-2.0, 0.25) == 1.5);
    CHECK(pinball(0.0, 0.9) == 0.0);
}

TEST_CASE("pinball_risk examples") {
    const auto ds = TimeSeriesDataset::from_arrays(Eigen::Vector2d(1, 2), Eigen::MatrixXd::Zero(2, 1));
    CHECK(pinball_risk(0.0, Eigen::VectorXd::Zero(1), ds, 0.5) == doctest::Approx(0.75));
    const auto ds2 =
        TimeSeriesDataset::from_arrays(Eigen::Vector2d(1, -1), Eigen::MatrixXd::Zero(2, 1));
    CHECK(pinball_risk(0.0, Eigen::VectorXd::Zero(1), ds2, 0.25) == doctest::Approx(0.5));
    // Perfect fit through one feature.
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    const auto ds3 = TimeSeriesDataset::from_arrays(Eigen::Vector2d(1, 2), x);
    CHECK(pinball_risk(0.0, Eigen::VectorXd::Ones(1), ds3, 0.3) == 0.0);
}

TEST_CASE("least_squares_risk examples") {
    Eigen::MatrixXd x(2, 1);
    x << 2, 4;
    const auto ds = TimeSeriesDataset::from_arrays(Eigen::Vector2d(1, 2), x);
    // Predictions (2, 4) against (1, 2).
    CHECK(least_squares_risk(0.0, Eigen::VectorXd::Ones(1), ds) == doctest::Approx(2.5));
    CHECK(least_squares_risk(0.0, Eigen::VectorXd::Constant(1, 0.5), ds) == 0.0);
}

TEST_CASE("smoothed_pinball examples") {
    const SmoothedValue linear = smoothed_pinball(1.0, 0.5, 0.01);
    CHECK(linear.value == doctest::Approx(0.49875).epsilon(1e-12));
    CHECK(linear.derivative == 0.5);
    const SmoothedValue kink = smoothed_pinball(0.0, 0.5, 0.01);
    CHECK(kink.value == 0.0);
    CHECK(kink.derivative == 0.0);
}

TEST_CASE("pinball reflection symmetry and convexity") {
    PortableRng rng(7);
    for (int k = 0; k < 2000; ++k) {
        const double u = 4.0 * rng.normal();
        const double v = 4.0 * rng.normal();
        const double tau = 0.01 + 0.98 * rng.uniform();
        const double theta = rng.uniform();
        CHECK(pinball(u, tau) == doctest::Approx(pinball(-u, 1.0 - tau)).epsilon(1e-14));
        const double mix = pinball(theta * u + (1.0 - theta) * v, tau);
        CHECK(mix <= theta * pinball(u, tau) + (1.0 - theta) * pinball(v, tau) + 1e-12);
    }
}

TEST_CASE("smoothed_pinball derivative matches finite differences") {
    PortableRng rng(8);
    for (double tau : {0.1, 0.5, 0.9}) {
        const double mu = 0.05;
        for (int k = 0; k < 500; ++k) {
            const double u = 0.5 * rng.normal();
            // Skip points near the branch boundaries tau*mu and (tau-1)*mu.
            if (std::abs(u - tau * mu) < 1e-4 || std::abs(u - (tau - 1.0) * mu) < 1e-4) {
                continue;
            }
            const double h = 1e-6;
            const double fd = (smoothed_pinball(u + h, tau, mu).value -
                               smoothed_pinball(u - h, tau, mu).value) /
                              (2.0 * h);
            CHECK(std::abs(fd - smoothed_pinball(u, tau, mu).derivative) < 1e-6);
        }
    }
}

TEST_CASE("smoothed_pinball is continuous across branch boundaries") {
    for (double tau : {0.1, 0.5, 0.9}) {
        const double mu = 0.01;
        for (double edge : {tau * mu, (tau - 1.0) * mu}) {
            const double left = smoothed_pinball(std::nextafter(edge, -1.0), tau, mu).value;
            const double right = smoothed_pinball(std::nextafter(edge, 1.0), tau, mu).value;
            CHECK(std::abs(left - right) < 1e-12);
        }
    }
}

TEST_CASE("smoothing gap lies in [0, mu/2]") {
    for (double mu : {1e-2, 1e-4}) {
        for (double tau : {0.1, 0.5, 0.9}) {
            double lo = 1e300;
            double hi = -1e300;
            for (int i = 0; i <= 1000; ++i) {
                const double u = -5.0 * mu + 10.0 * mu * i / 1000.0;
                const double gap = pinball(u, tau) - smoothed_pinball(u, tau, mu).value;
                lo = std::min(lo, gap);
                hi = std::max(hi, gap);
            }
            CHECK(lo >= 0.0);
            CHECK(hi <= mu / 2.0);
        }
    }
}

TEST_CASE("mean_pinball averages the check loss") {
    const Eigen::Vector3d r(1.0, -2.0, 0.0);
    CHECK(mean_pinball(r, 0.25) == doctest::Approx((0.25 + 1.5 + 0.0) / 3.0));
}

TEST_CASE("smoothing parameters follow the target scale") {
    const SmoothingParams s = SmoothingParams::for_scale(0.02);
    CHECK(s.mu == doctest::Approx(2e-6));
    CHECK(s.mu_min == doctest::Approx(2e-9));
    CHECK(s.continuation_factor == 0.5);
    CHECK_THROWS_AS((void)SmoothingParams::for_scale(0.02, 1e-7, 1e-4), std::invalid_argument);
}
