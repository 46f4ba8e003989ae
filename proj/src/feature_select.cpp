#include "qgl/feature_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

#include "qgl/model_selection.hpp"

namespace qgl {

Ranking importance_rank(const TimeSeriesDataset& dataset, const RankOptions& options) {
    const std::size_t p = dataset.n_features();
    if (dataset.n_rows() == 0 || p == 0) {
        throw std::invalid_argument("importance_rank: dataset needs rows and features");
    }
    const Method method = options.quantile_loss ? Method::QrLasso : Method::LmLasso;
    std::vector<double> lambdas = options.lambda_values.empty() ? lambda_grid(-5.0, 1.01, 0.2)
                                                                : options.lambda_values;
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());

    Ranking out;
    if (options.cv_lambda) {
        out.cv_lambda = *options.cv_lambda;
    } else {
        SearchGrid grid;
        grid.lambda_values = lambdas;
        grid.alpha_values = {1.0};
        grid.power_weights = {0.0};
        grid.tau = options.tau;
        const std::size_t n = dataset.n_rows();
        const auto min_train = std::max<std::size_t>(
            1, static_cast<std::size_t>(options.min_train_fraction * static_cast<double>(n)));
        out.cv_lambda = cross_validate(dataset, nullptr, grid, method, options.cv_folds,
                                       min_train, options.solver)
                            .best.lambda;
    }

    std::vector<double> entry(p, 0.0);
    std::vector<bool> entered(p, false);
    std::optional<FitResult> previous;
    std::optional<FitResult> at_cv;
    for (double lambda : lambdas) {
        Hyperparams h;
        h.lambda = lambda;
        FitResult r = fit_preset(method, dataset, nullptr, options.tau, h, options.solver,
                                 previous ? &*previous : nullptr);
        for (std::size_t j = 0; j < p; ++j) {
            if (!entered[j] && r.coefficients[static_cast<Eigen::Index>(j)] != 0.0) {
                entered[j] = true;
                entry[j] = lambda;
            }
        }
        if (lambda == out.cv_lambda) {
            at_cv = r;
        }
        previous = std::move(r);
    }
    if (!at_cv) {
        Hyperparams h;
        h.lambda = out.cv_lambda;
        at_cv = fit_preset(method, dataset, nullptr, options.tau, h, options.solver,
                           previous ? &*previous : nullptr);
    }

    const Eigen::VectorXd standardized = at_cv->standardized_coefficients();
    out.features.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        FeatureImportance& f = out.features[j];
        const auto k = static_cast<Eigen::Index>(j);
        f.name = dataset.feature_names()[j];
        f.column = j;
        f.entry_lambda = entry[j];
        f.coefficient_at_cv_lambda = at_cv->coefficients[k];
        f.standardized_coefficient = standardized[k];
    }
    std::stable_sort(out.features.begin(), out.features.end(),
                     [](const FeatureImportance& a, const FeatureImportance& b) {
                         if (a.entry_lambda != b.entry_lambda) {
                             return a.entry_lambda > b.entry_lambda;
                         }
                         const double ma = std::abs(a.standardized_coefficient);
                         const double mb = std::abs(b.standardized_coefficient);
                         if (ma != mb) {
                             return ma > mb;
                         }
                         return a.column < b.column;
                     });
    for (std::size_t r = 0; r < p; ++r) {
        out.features[r].rank = r + 1;
    }
    return out;
}

Selection select_top_k(const TimeSeriesDataset& dataset, const Ranking& ranking, std::size_t k) {
    if (ranking.features.size() != dataset.n_features()) {
        throw std::invalid_argument("select_top_k: ranking does not match the dataset");
    }
    if (k > dataset.n_features()) {
        throw std::invalid_argument("select_top_k: k=" + std::to_string(k) + " exceeds " +
                                    std::to_string(dataset.n_features()) + " features");
    }
    Selection out;
    for (std::size_t r = 0; r < k; ++r) {
        out.columns.push_back(ranking.features[r].column);
        out.names.push_back(ranking.features[r].name);
    }
    out.dataset = dataset.select_columns(out.columns);
    return out;
}

GroupStructure assign_groups(const std::vector<std::string>& names,
                             const std::map<std::string, int>& mapping) {
    std::vector<int> raw;
    raw.reserve(names.size());
    for (const std::string& name : names) {
        auto it = mapping.find(name);
        if (it == mapping.end()) {
            throw std::invalid_argument("assign_groups: feature '" + name +
                                        "' has no group in the mapping");
        }
        raw.push_back(it->second);
    }
    const std::set<int> distinct(raw.begin(), raw.end());
    std::vector<int> labels;
    labels.reserve(raw.size());
    for (int v : raw) {
        labels.push_back(static_cast<int>(std::distance(distinct.begin(), distinct.find(v))) + 1);
    }
    return validate_groups(labels, names.size());
}

}  // namespace qgl
