#pragma once

#include <Eigen/Dense>

#include "qgl/core_model.hpp"

namespace qgl {

struct LpSolution {
    double objective = 0.0;
    double intercept = 0.0;
    Eigen::VectorXd beta;  ///< in the solved (standardized when requested) space
    std::size_t pivots = 0;
};

/**
 * @brief Exact quantile-lasso minimizer via a dense simplex method.
 *
 * Solves min (1/n) sum rho_tau(y - b0 - X beta) + lambda ||beta||_1 as the LP
 * over split intercept, coefficient and residual parts, with Bland's rule.
 * Features are standardized first when @p standardize is set, matching fit().
 * Limited to n <= 200, p <= 20; throws std::invalid_argument beyond that and
 * std::runtime_error if the pivot limit is hit.
 */
[[nodiscard]] LpSolution lp_oracle(const TimeSeriesDataset& dataset, double tau, double lambda,
                                   bool standardize = true);

}  // namespace qgl
