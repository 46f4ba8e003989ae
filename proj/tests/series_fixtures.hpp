#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgl/random.hpp"

namespace qgl::testing {

/// Seeded series shared by the diagnostics tests and the acceptance run.
struct SeriesCase {
    std::string name;
    Eigen::VectorXd values;
    std::size_t adf_lags = 1;
};

inline Eigen::VectorXd ar1_series(std::size_t n, double phi, std::uint64_t seed) {
    PortableRng rng(seed);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    double prev = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        prev = phi * prev + rng.normal();
        x[i] = prev;
    }
    return x;
}

inline std::vector<SeriesCase> diagnostics_cases() {
    std::vector<SeriesCase> cases;
    cases.push_back({"noise", ar1_series(500, 0.0, 1), 1});
    cases.push_back({"random_walk", ar1_series(500, 1.0, 2), 1});
    cases.push_back({"ar1_half", ar1_series(300, 0.5, 3), 2});
    cases.push_back({"ar1_high", ar1_series(400, 0.9, 4), 4});
    {
        PortableRng rng(5);
        Eigen::VectorXd x(500);
        for (double& v : x) {
            v = rng.student_t(3);
        }
        cases.push_back({"student_t3", x, 0});
    }
    {
        PortableRng rng(6);
        Eigen::VectorXd x(1000);
        for (double& v : x) {
            const double z = rng.normal();
            v = z * z * z;
        }
        cases.push_back({"normal_cubed", x, 3});
    }
    cases.push_back({"short_walk", ar1_series(200, 1.0, 7), 5});
    cases.push_back({"ar1_negative", ar1_series(250, -0.3, 8), 1});
    {
        PortableRng rng(9);
        Eigen::VectorXd x(150);
        for (double& v : x) {
            v = 0.01 * rng.student_t(5);
        }
        cases.push_back({"scaled_t5", x, 2});
    }
    {
        Eigen::VectorXd x = ar1_series(600, 1.0, 10);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] += 0.05 * static_cast<double>(i);
        }
        cases.push_back({"drifting_walk", x, 6});
    }
    return cases;
}

}  // namespace qgl::testing
