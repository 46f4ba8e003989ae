#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qgl/core_model.hpp"
#include "qgl/solver.hpp"

namespace qgl {

struct FeatureImportance {
    std::string name;
    std::size_t column = 0;
    double entry_lambda = 0.0;  ///< largest path lambda with a nonzero coefficient; 0 if never
    double coefficient_at_cv_lambda = 0.0;  ///< original scale
    double standardized_coefficient = 0.0;  ///< tie-break key at the CV lambda
    std::size_t rank = 0;                   ///< 1-based
};

struct RankOptions {
    /// Least-squares lasso by default; quantile lasso at tau when set.
    bool quantile_loss = false;
    double tau = 0.5;
    /// Defaults to lambda_grid(-5, 1.01, 0.2) when empty.
    std::vector<double> lambda_values;
    /// Chosen by cross-validation over lambda_values when absent.
    std::optional<double> cv_lambda;
    std::size_t cv_folds = 5;
    double min_train_fraction = 0.6;
    SolverConfig solver;
};

struct Ranking {
    std::vector<FeatureImportance> features;  ///< sorted by rank
    double cv_lambda = 0.0;
};

/**
 * @brief Ranks features by where they enter a warm-started lasso path.
 *
 * The path runs from the largest lambda down. Ties in entry lambda are broken
 * by the standardized coefficient magnitude at the CV lambda, then by column
 * index. Throws std::invalid_argument for a dataset without rows or features.
 */
[[nodiscard]] Ranking importance_rank(const TimeSeriesDataset& dataset,
                                      const RankOptions& options = {});

struct Selection {
    TimeSeriesDataset dataset;
    std::vector<std::string> names;
    std::vector<std::size_t> columns;  ///< original column indices in rank order
};

/// The top @p k ranked columns in rank order. Throws when k exceeds the feature count.
[[nodiscard]] Selection select_top_k(const TimeSeriesDataset& dataset, const Ranking& ranking,
                                     std::size_t k);

/**
 * @brief Group structure for the retained names from a name-to-label mapping.
 *
 * Labels are relabelled to 1..K in ascending order of the mapped values, so
 * gaps in the mapping do not leave empty groups. Throws std::invalid_argument
 * naming the first unmapped feature.
 */
[[nodiscard]] GroupStructure assign_groups(const std::vector<std::string>& names,
                                           const std::map<std::string, int>& mapping);

}  // namespace qgl
