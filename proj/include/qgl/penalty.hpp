#pragma once

#include <Eigen/Dense>

#include "qgl/core_model.hpp"

namespace qgl {

/**
 * @brief Sparse-group penalty
 *   alpha*lambda*sum_j w_j |b_j| + (1-alpha)*lambda*sum_l sqrt(p_l) v_l ||b^l||_2.
 *
 * Unit weights give the plain sparse group lasso; alpha = 1 the (weighted) lasso;
 * alpha = 0 the (weighted) group lasso.
 */
[[nodiscard]] double penalty_value(const Eigen::VectorXd& beta, const PenaltySpec& spec,
                                   const GroupStructure& groups);

/// sign(v) * max(|v| - t, 0).
[[nodiscard]] double soft_threshold(double v, double t);

/// max(0, 1 - t/||v||) * v, zero when ||v|| <= t.
[[nodiscard]] Eigen::VectorXd group_shrink(const Eigen::VectorXd& v, double t);

/**
 * @brief Proximal operator of step * penalty.
 *
 * Per group: componentwise soft-threshold at step*alpha*lambda*w_j, then group
 * shrinkage at step*(1-alpha)*lambda*sqrt(p_l)*v_l. The composition is exact for
 * this penalty. Throws std::invalid_argument on dimension mismatch or step <= 0.
 */
[[nodiscard]] Eigen::VectorXd sparse_group_prox(const Eigen::VectorXd& beta, double step,
                                                const PenaltySpec& spec,
                                                const GroupStructure& groups);

struct AdaptiveWeights {
    Eigen::VectorXd lasso_weights;
    Eigen::VectorXd group_weights;
};

/**
 * @brief Adaptive penalty weights from a pilot fit.
 *
 * w_j = 1/max(|b_j|, eps)^gamma1 and v_l = 1/max(||b^l||, eps)^gamma2, each
 * clipped to [0, cap]. Pilot coefficients are taken in the standardized space the
 * penalty acts on. gamma = 0 gives exact ones.
 */
[[nodiscard]] AdaptiveWeights adaptive_weights(const FitResult& pilot, double gamma1,
                                               double gamma2, const GroupStructure& groups,
                                               double eps = 1e-6, double cap = 1e6);

/// Same as above from a raw coefficient vector.
[[nodiscard]] AdaptiveWeights adaptive_weights(const Eigen::VectorXd& pilot_coefficients,
                                               double gamma1, double gamma2,
                                               const GroupStructure& groups, double eps = 1e-6,
                                               double cap = 1e6);

}  // namespace qgl
