#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "qgl/core_model.hpp"
#include "qgl/loss.hpp"
#include "qgl/penalty.hpp"

namespace qgl {

/**
 * @brief Accelerated proximal-gradient settings.
 *
 * The step is 1/L with L = sigma_max([1 X])^2 / (n mu) for the smoothed check
 * loss (2 sigma_max^2 / n for least squares), halved whenever the quadratic
 * upper bound fails. Convergence is declared when the prox-gradient mapping
 * ||z - prox(z - s grad f(z))||_inf / s at the final smoothing width is below
 * @c tolerance.
 */
struct SolverConfig {
    std::size_t max_iterations = 50000;
    double tolerance = 1e-6;
    /// Absolute schedule. When unset, the schedule is
    /// SmoothingParams::for_scale(sample std of the target, mu_scale, mu_min_scale,
    /// continuation_factor).
    std::optional<SmoothingParams> smoothing;
    double mu_scale = 1e-4;
    double mu_min_scale = 1e-7;
    double continuation_factor = 0.5;
    bool standardize = true;

    void validate() const;
};

/**
 * @brief Minimizes smoothed risk + sparse-group penalty with FISTA.
 *
 * The intercept is unpenalized. Features are standardized internally unless
 * disabled; returned coefficients are on the original scale. A non-null
 * @p warm_start seeds the iterate (its coefficients are mapped into this fit's
 * standardized space). Non-convergence is reported via FitResult::converged.
 *
 * Throws std::invalid_argument for non-finite inputs, zero-variance features,
 * or an inconsistent spec.
 */
[[nodiscard]] FitResult fit(const TimeSeriesDataset& dataset, const GroupStructure& groups,
                            const PenaltySpec& spec, const SolverConfig& config = {},
                            const FitResult* warm_start = nullptr);

/// Hyperparameters for the preset methods. power weight g maps to gamma1 = gamma2 = g.
struct Hyperparams {
    double lambda = 0.0;
    double alpha = 1.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double eps = 1e-6;
    double cap = 1e6;

    [[nodiscard]] static Hyperparams with_power_weight(double lambda, double alpha,
                                                       double power_weight) {
        Hyperparams h;
        h.lambda = lambda;
        h.alpha = alpha;
        h.gamma1 = power_weight;
        h.gamma2 = power_weight;
        return h;
    }
};

/// True when the method needs a pilot fit for its adaptive weights.
[[nodiscard]] bool needs_pilot(Method method, const Hyperparams& hyper);

/// The non-adaptive method whose fit serves as pilot (qr_lasso for alasso, L-SQG for L-ASQG).
[[nodiscard]] Method pilot_method(Method method);

/**
 * @brief Builds the PenaltySpec of a preset method.
 *
 * lm_lasso: least squares, alpha 1. qr_lasso: check loss, alpha 1. alasso: alpha 1
 * with pilot L1 weights. L-QG: alpha 0. L-SQG: given alpha. L-ASQG: given alpha
 * with pilot L1 and group weights. @p pilot is required iff needs_pilot().
 */
[[nodiscard]] PenaltySpec make_spec(Method method, double tau, const Hyperparams& hyper,
                                    const GroupStructure& groups,
                                    const FitResult* pilot = nullptr);

/// Fits a preset method; @p groups may be null only for methods without a group term.
[[nodiscard]] FitResult fit_preset(Method method, const TimeSeriesDataset& dataset,
                                   const GroupStructure* groups, double tau,
                                   const Hyperparams& hyper, const SolverConfig& config = {},
                                   const FitResult* warm_start = nullptr);

/// Unsmoothed risk + penalty of @p result on @p dataset, in the fitted space.
[[nodiscard]] double objective_value(const FitResult& result, const TimeSeriesDataset& dataset,
                                     const GroupStructure& groups);

/// Recomputes the prox-gradient mapping residual at the result's final smoothing width.
[[nodiscard]] double optimality_residual(const FitResult& result,
                                         const TimeSeriesDataset& dataset,
                                         const GroupStructure& groups);

/// Flat key=value text with shortest round-trip decimal reals.
[[nodiscard]] std::string serialize_fit(const FitResult& result);
/// Inverse of serialize_fit. Throws std::invalid_argument on malformed input.
[[nodiscard]] FitResult parse_fit(std::string_view text);

}  // namespace qgl
