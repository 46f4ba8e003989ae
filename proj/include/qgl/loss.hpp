#pragma once

#include <Eigen/Dense>

#include "qgl/core_model.hpp"

namespace qgl {

/// Check loss rho_tau(u) = u * (tau - I(u <= 0)).
[[nodiscard]] double pinball(double u, double tau);

/// Mean check loss of y - intercept - X beta. Throws on dimension mismatch.
[[nodiscard]] double pinball_risk(double intercept, const Eigen::VectorXd& beta,
                                  const TimeSeriesDataset& dataset, double tau);

/// Mean squared residual of y - intercept - X beta.
[[nodiscard]] double least_squares_risk(double intercept, const Eigen::VectorXd& beta,
                                        const TimeSeriesDataset& dataset);

/// Mean check loss over a residual vector.
[[nodiscard]] double mean_pinball(const Eigen::VectorXd& residuals, double tau);

struct SmoothedValue {
    double value;
    double derivative;
};

/**
 * @brief Moreau envelope of the check loss with width @p mu.
 *
 * Quadratic u^2/(2 mu) on [mu (tau - 1), mu tau], linear with slopes tau and
 * tau - 1 outside. Sits below the check loss by at most mu/2.
 * Throws std::invalid_argument for non-positive mu.
 */
[[nodiscard]] SmoothedValue smoothed_pinball(double u, double tau, double mu);

/// Smoothing schedule: start at mu, multiply by continuation_factor until mu_min.
struct SmoothingParams {
    double mu = 1e-4;
    double continuation_factor = 0.5;
    double mu_min = 1e-7;

    /// Schedule from mu_scale * std down to mu_min_scale * std of the target
    /// (a non-positive or undefined std counts as 1).
    [[nodiscard]] static SmoothingParams for_scale(double target_std, double mu_scale = 1e-4,
                                                   double mu_min_scale = 1e-7,
                                                   double continuation_factor = 0.5);

    void validate() const;
};

}  // namespace qgl
