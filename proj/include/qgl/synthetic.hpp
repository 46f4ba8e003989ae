#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgl/core_model.hpp"

namespace qgl {

struct SyntheticSpec {
    std::size_t n = 300;        ///< price rows
    std::size_t p = 40;         ///< features
    std::size_t group_size = 5;
    /// Columns with nonzero effect and their coefficients on the standardized scale of returns.
    std::vector<std::size_t> true_features{0, 1, 7, 12, 13};
    std::vector<double> true_coefficients{0.010, -0.008, 0.009, 0.007, -0.010};
    double feature_ar = 0.5;       ///< AR(1) coefficient of every feature
    double group_loading = 0.6;    ///< weight of the shared group factor
    double noise_ar = 0.2;         ///< AR(1) coefficient of the return noise
    double noise_scale = 0.006;
    int noise_dof = 5;             ///< Student-t innovations
    double initial_price = 25.0;
    Date start{2000, 1, 3};        ///< daily dates, one row per day
    std::uint64_t seed = 20240501;
};

struct SyntheticData {
    std::vector<Date> dates;
    Eigen::VectorXd prices;      ///< length n
    Eigen::MatrixXd features;    ///< n x p; row t holds x_t
    std::vector<std::string> names;
    std::map<std::string, int> groups;
    std::vector<std::size_t> true_support;
    Eigen::VectorXd beta;        ///< length p
};

/**
 * @brief Carbon-like price series driven by lagged grouped features.
 *
 * Features are AR(1) around a shared per-group AR(1) factor. The log return
 * from t to t+1 is beta . x_t plus AR(1) Student-t noise; prices compound the
 * returns from initial_price. Identical seeds give identical data on every platform.
 * Throws std::invalid_argument for inconsistent sizes.
 */
[[nodiscard]] SyntheticData generate_synthetic(const SyntheticSpec& spec = {});

/// CSV with columns date, price, then the feature names.
[[nodiscard]] std::string synthetic_csv(const SyntheticData& data);

}  // namespace qgl
