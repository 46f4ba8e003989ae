#include "qgl/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "qgl/loss.hpp"

namespace qgl {

std::vector<double> lambda_grid(double t_min, double t_max, double step) {
    if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min <= t_max) || !(step > 0.0)) {
        throw std::invalid_argument("lambda_grid: require finite t_min <= t_max and step > 0");
    }
    std::vector<double> values;
    // Exponents are formed as t_min + i*step rather than by repeated addition
    // so the endpoints do not drift.
    for (std::size_t i = 0;; ++i) {
        const double t = t_min + static_cast<double>(i) * step;
        if (!(t < t_max + 1e-12)) {
            break;
        }
        values.push_back(std::pow(10.0, t));
    }
    return values;
}

std::vector<Fold> time_series_folds(std::size_t n, std::size_t k, std::size_t min_train) {
    if (k < 1 || min_train < 1) {
        throw std::invalid_argument("time_series_folds: require k >= 1 and min_train >= 1");
    }
    if (min_train + k > n) {
        throw std::invalid_argument("time_series_folds: " + std::to_string(n) +
                                    " rows cannot hold a training prefix of " +
                                    std::to_string(min_train) + " and " + std::to_string(k) +
                                    " validation blocks");
    }
    const std::size_t rest = n - min_train;
    const std::size_t base = rest / k;
    const std::size_t extra = rest % k;
    std::vector<Fold> folds;
    folds.reserve(k);
    std::size_t start = min_train;
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t size = base + (j < extra ? 1 : 0);
        folds.push_back({start, start + size});
        start += size;
    }
    return folds;
}

std::size_t default_min_train(std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(0.6 * static_cast<double>(n)));
}

SearchGrid SearchGrid::defaults(double tau) {
    SearchGrid grid;
    grid.lambda_values = lambda_grid(-5.0, 1.01, 0.2);
    grid.tau = tau;
    return grid;
}

void SearchGrid::validate() const {
    if (lambda_values.empty() || alpha_values.empty() || power_weights.empty()) {
        throw std::invalid_argument("grid: lambda, alpha and power_weight lists must be nonempty");
    }
    for (double l : lambda_values) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
            throw std::invalid_argument("grid: lambda values must be finite and >= 0");
        }
    }
    for (double a : alpha_values) {
        if (!(a >= 0.0 && a <= 1.0)) {
            throw std::invalid_argument("grid: alpha values must lie in [0,1]");
        }
    }
    for (double g : power_weights) {
        if (!std::isfinite(g)) {
            throw std::invalid_argument("grid: power weights must be finite");
        }
    }
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::invalid_argument("grid: tau must lie in (0,1)");
    }
}

namespace {

double validation_loss(const FitResult& fit_result, const TimeSeriesDataset& validation,
                       double tau) {
    const Eigen::VectorXd residual =
        validation.target() - fit_result.predict(validation.features());
    return mean_pinball(residual, tau);
}

/// True when cell a should win a tie against cell b.
bool preferred(const CvCell& a, const CvCell& b) {
    if (a.lambda != b.lambda) {
        return a.lambda > b.lambda;
    }
    if (a.alpha != b.alpha) {
        return a.alpha < b.alpha;
    }
    return a.power_weight < b.power_weight;
}

}  // namespace

CvResult cross_validate(const TimeSeriesDataset& dataset, const GroupStructure* groups,
                        const SearchGrid& grid, Method method, std::size_t k,
                        std::size_t min_train, const SolverConfig& config) {
    grid.validate();
    config.validate();
    if (uses_groups(method) && groups == nullptr) {
        throw std::invalid_argument(std::string("cross_validate: ") +
                                    std::string(method_name(method)) +
                                    " requires a group structure");
    }
    const std::vector<Fold> folds = time_series_folds(dataset.n_rows(), k, min_train);
    const GroupStructure flat = single_group(dataset.n_features());
    const GroupStructure& g = uses_groups(method) ? *groups : flat;

    const std::vector<double> alphas =
        uses_alpha(method) ? grid.alpha_values
                           : std::vector<double>{method == Method::LQG ? 0.0 : 1.0};
    const std::vector<double> powers =
        uses_power_weight(method) ? grid.power_weights : std::vector<double>{0.0};
    const std::size_t n_lambda = grid.lambda_values.size();
    const std::size_t n_alpha = alphas.size();
    const std::size_t n_power = powers.size();
    auto cell_index = [&](std::size_t li, std::size_t ai, std::size_t pi) {
        return (li * n_alpha + ai) * n_power + pi;
    };

    CvResult out;
    out.cells.resize(n_lambda * n_alpha * n_power);
    for (std::size_t li = 0; li < n_lambda; ++li) {
        for (std::size_t ai = 0; ai < n_alpha; ++ai) {
            for (std::size_t pi = 0; pi < n_power; ++pi) {
                CvCell& cell = out.cells[cell_index(li, ai, pi)];
                cell.lambda = grid.lambda_values[li];
                cell.alpha = alphas[ai];
                cell.power_weight = powers[pi];
                cell.fold_losses.assign(folds.size(), 0.0);
            }
        }
    }

    // Path order: decreasing lambda, stable in grid position.
    std::vector<std::size_t> path(n_lambda);
    std::iota(path.begin(), path.end(), std::size_t{0});
    std::stable_sort(path.begin(), path.end(), [&](std::size_t a, std::size_t b) {
        return grid.lambda_values[a] > grid.lambda_values[b];
    });

    const bool adaptive = uses_power_weight(method);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const TimeSeriesDataset train = dataset.slice(0, folds[f].train_end);
        const TimeSeriesDataset validation =
            dataset.slice(folds[f].train_end, folds[f].validation_end);
        for (std::size_t ai = 0; ai < n_alpha; ++ai) {
            std::optional<FitResult> previous;
            std::vector<std::optional<FitResult>> previous_adaptive(n_power);
            for (std::size_t li : path) {
                const double lambda = grid.lambda_values[li];
                if (!adaptive) {
                    Hyperparams h;
                    h.lambda = lambda;
                    h.alpha = alphas[ai];
                    FitResult r = fit(train, g, make_spec(method, grid.tau, h, g), config,
                                      previous ? &*previous : nullptr);
                    CvCell& cell = out.cells[cell_index(li, ai, 0)];
                    cell.fold_losses[f] = validation_loss(r, validation, grid.tau);
                    cell.converged = cell.converged && r.converged;
                    previous = std::move(r);
                    continue;
                }
                Hyperparams pilot_h;
                pilot_h.lambda = lambda;
                pilot_h.alpha = alphas[ai];
                FitResult pilot = fit(train, g,
                                      make_spec(pilot_method(method), grid.tau, pilot_h, g),
                                      config, previous ? &*previous : nullptr);
                for (std::size_t pi = 0; pi < n_power; ++pi) {
                    const Hyperparams h =
                        Hyperparams::with_power_weight(lambda, alphas[ai], powers[pi]);
                    CvCell& cell = out.cells[cell_index(li, ai, pi)];
                    if (!needs_pilot(method, h)) {
                        // Zero exponents give unit weights: the adaptive fit is the pilot.
                        cell.fold_losses[f] = validation_loss(pilot, validation, grid.tau);
                        cell.converged = cell.converged && pilot.converged;
                        continue;
                    }
                    std::optional<FitResult>& warm = previous_adaptive[pi];
                    FitResult r = fit(train, g, make_spec(method, grid.tau, h, g, &pilot),
                                      config, warm ? &*warm : nullptr);
                    cell.fold_losses[f] = validation_loss(r, validation, grid.tau);
                    cell.converged = cell.converged && r.converged;
                    warm = std::move(r);
                }
                previous = std::move(pilot);
            }
        }
    }

    bool any_converged = false;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < out.cells.size(); ++i) {
        CvCell& cell = out.cells[i];
        double sum = 0.0;
        for (double l : cell.fold_losses) {
            sum += l;
        }
        cell.mean_loss = sum / static_cast<double>(cell.fold_losses.size());
        any_converged = any_converged || cell.converged;
        if (!std::isfinite(cell.mean_loss)) {
            continue;
        }
        if (!best || cell.mean_loss < out.cells[*best].mean_loss ||
            (cell.mean_loss == out.cells[*best].mean_loss && preferred(cell, out.cells[*best]))) {
            best = i;
        }
    }
    if (!any_converged || !best) {
        throw std::runtime_error("cross_validate: no grid cell converged for " +
                                 std::string(method_name(method)) + " across " +
                                 std::to_string(folds.size()) + " folds and " +
                                 std::to_string(out.cells.size()) + " cells");
    }
    out.best_index = *best;
    const CvCell& winner = out.cells[*best];
    out.best = Hyperparams::with_power_weight(winner.lambda, winner.alpha, winner.power_weight);
    return out;
}

}  // namespace qgl
