#include "qgl/evaluation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qgl {

MetricsReport evaluate(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    if (actual.size() != predicted.size()) {
        throw std::invalid_argument("evaluate: length mismatch (" +
                                    std::to_string(actual.size()) + " actual vs " +
                                    std::to_string(predicted.size()) + " predicted)");
    }
    if (actual.size() == 0) {
        throw std::invalid_argument("evaluate: empty input");
    }
    if (!actual.allFinite() || !predicted.allFinite()) {
        throw std::invalid_argument("evaluate: non-finite values (apply a fill policy first)");
    }
    MetricsReport report;
    report.n = static_cast<std::size_t>(actual.size());
    double squared = 0.0;
    double absolute = 0.0;
    double percent = 0.0;
    std::size_t counted = 0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        squared += e * e;
        absolute += std::abs(e);
        if (std::abs(actual[i]) > mape_epsilon) {
            percent += std::abs(e / actual[i]);
            ++counted;
        } else {
            ++report.mape_skipped;
        }
    }
    const double n = static_cast<double>(report.n);
    report.mse = squared / n;
    report.mae = absolute / n;
    report.rmse = std::sqrt(report.mse);
    if (counted > 0) {
        report.mape = 100.0 * percent / static_cast<double>(counted);
    }
    return report;
}

}  // namespace qgl
