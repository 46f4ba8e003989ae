#include "qgl/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace qgl {

namespace {

Eigen::VectorXd residuals(double intercept, const Eigen::VectorXd& beta,
                          const TimeSeriesDataset& dataset) {
    if (static_cast<std::size_t>(beta.size()) != dataset.n_features()) {
        throw std::invalid_argument("risk: coefficient length " + std::to_string(beta.size()) +
                                    " does not match " + std::to_string(dataset.n_features()) +
                                    " features");
    }
    Eigen::VectorXd r = dataset.target() - dataset.features() * beta;
    r.array() -= intercept;
    return r;
}

}  // namespace

double pinball(double u, double tau) { return u > 0.0 ? tau * u : (tau - 1.0) * u; }

double mean_pinball(const Eigen::VectorXd& residuals, double tau) {
    if (residuals.size() == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (double u : residuals) {
        sum += pinball(u, tau);
    }
    return sum / static_cast<double>(residuals.size());
}

double pinball_risk(double intercept, const Eigen::VectorXd& beta,
                    const TimeSeriesDataset& dataset, double tau) {
    return mean_pinball(residuals(intercept, beta, dataset), tau);
}

double least_squares_risk(double intercept, const Eigen::VectorXd& beta,
                          const TimeSeriesDataset& dataset) {
    Eigen::VectorXd r = residuals(intercept, beta, dataset);
    return r.size() == 0 ? 0.0 : r.squaredNorm() / static_cast<double>(r.size());
}

SmoothedValue smoothed_pinball(double u, double tau, double mu) {
    if (!(mu > 0.0)) {
        throw std::invalid_argument("smoothed_pinball: mu must be positive");
    }
    if (u >= mu * tau) {
        return {tau * u - 0.5 * mu * tau * tau, tau};
    }
    const double lower = tau - 1.0;
    if (u <= mu * lower) {
        return {lower * u - 0.5 * mu * lower * lower, lower};
    }
    return {u * u / (2.0 * mu), u / mu};
}

SmoothingParams SmoothingParams::for_scale(double target_std, double mu_scale,
                                           double mu_min_scale, double continuation_factor) {
    double s = (std::isfinite(target_std) && target_std > 0.0) ? target_std : 1.0;
    SmoothingParams params{mu_scale * s, continuation_factor, mu_min_scale * s};
    params.validate();
    return params;
}

void SmoothingParams::validate() const {
    if (!(mu_min > 0.0) || !(mu >= mu_min)) {
        throw std::invalid_argument("smoothing: require mu >= mu_min > 0");
    }
    if (!(continuation_factor > 0.0 && continuation_factor < 1.0)) {
        throw std::invalid_argument("smoothing: continuation_factor must lie in (0,1)");
    }
}

}  // namespace qgl
