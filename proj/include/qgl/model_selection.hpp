#pragma once

#include <cstddef>
#include <vector>

#include "qgl/core_model.hpp"
#include "qgl/solver.hpp"

namespace qgl {

/// Values 10^t for t = t_min, t_min + step, ... while t < t_max + 1e-12.
/// Throws std::invalid_argument unless t_min <= t_max and step > 0.
[[nodiscard]] std::vector<double> lambda_grid(double t_min, double t_max, double step);

/// One forward-chaining split: train on [0, train_end), validate on [train_end, validation_end).
struct Fold {
    std::size_t train_end = 0;
    std::size_t validation_end = 0;
};

/**
 * @brief k contiguous validation blocks following a training prefix of min_train rows.
 *
 * The n - min_train trailing rows are divided into k blocks whose sizes differ
 * by at most one, larger blocks first. Fold j trains on everything before its block.
 * Throws std::invalid_argument when k < 1, min_train < 1 or min_train + k > n.
 */
[[nodiscard]] std::vector<Fold> time_series_folds(std::size_t n, std::size_t k,
                                                  std::size_t min_train);

/// Default training prefix for CV: 60% of the rows (at least one).
[[nodiscard]] std::size_t default_min_train(std::size_t n);

struct SearchGrid {
    std::vector<double> lambda_values;
    std::vector<double> alpha_values{1e-4};
    std::vector<double> power_weights{-0.4, -0.2, 0.0, 0.2, 0.4};
    double tau = 0.5;

    /// lambda_grid(-5, 1.01, 0.2) with the default alpha and power weights.
    [[nodiscard]] static SearchGrid defaults(double tau);

    /// Throws std::invalid_argument on empty grids, negative lambda, alpha outside [0,1]
    /// or tau outside (0,1).
    void validate() const;
};

struct CvCell {
    double lambda = 0.0;
    double alpha = 1.0;
    double power_weight = 0.0;
    std::vector<double> fold_losses;  ///< validation mean pinball loss per fold
    double mean_loss = 0.0;
    bool converged = true;            ///< every fold's fit converged
};

struct CvResult {
    Hyperparams best;
    std::size_t best_index = 0;
    std::vector<CvCell> cells;  ///< ordered by (lambda, alpha, power_weight) grid position
};

/**
 * @brief Grid search with forward-chaining folds scored by validation pinball loss at tau.
 *
 * Dimensions the method ignores collapse to a single value: alpha is 1 for the
 * lasso methods and 0 for L-QG, and the power weight is 0 for non-adaptive
 * methods. Along each fold the lambda path runs from large to small with warm
 * starts; adaptive methods share one pilot fit per (fold, lambda, alpha) across
 * power weights. The best cell minimizes the mean loss with ties broken toward
 * larger lambda, then smaller alpha, then smaller power weight. Fits that did
 * not reach the solver tolerance are still scored and flagged per cell.
 *
 * Throws std::invalid_argument for invalid grids or folds, and std::runtime_error
 * when no cell converged.
 */
[[nodiscard]] CvResult cross_validate(const TimeSeriesDataset& dataset,
                                      const GroupStructure* groups, const SearchGrid& grid,
                                      Method method, std::size_t k, std::size_t min_train,
                                      const SolverConfig& config = {});

}  // namespace qgl
