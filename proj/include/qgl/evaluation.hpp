#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

namespace qgl {

/// Actuals with magnitude at or below this are skipped by MAPE.
inline constexpr double mape_epsilon = 1e-12;

struct MetricsReport {
    double mse = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> mape;  ///< percent; absent when every actual is skipped
    std::size_t mape_skipped = 0;
    std::size_t n = 0;
};

/**
 * @brief MSE, MAE, RMSE and MAPE of a forecast.
 *
 * MAPE = (100/m) sum |(y - yhat)/y| over the m indices with |y| > mape_epsilon;
 * the remaining indices are counted in mape_skipped.
 * Throws std::invalid_argument on empty input, length mismatch or non-finite values.
 */
[[nodiscard]] MetricsReport evaluate(const Eigen::VectorXd& actual,
                                     const Eigen::VectorXd& predicted);

}  // namespace qgl
