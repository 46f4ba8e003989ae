#include "qgl/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgl {

namespace {

void check_dims(const Eigen::VectorXd& beta, const GroupStructure& groups) {
    if (static_cast<std::size_t>(beta.size()) != groups.n_features()) {
        throw std::invalid_argument("penalty: coefficient length " + std::to_string(beta.size()) +
                                    " does not match group structure of " +
                                    std::to_string(groups.n_features()) + " features");
    }
}

}  // namespace

double penalty_value(const Eigen::VectorXd& beta, const PenaltySpec& spec,
                     const GroupStructure& groups) {
    check_dims(beta, groups);
    double l1 = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        l1 += spec.lasso_weight(static_cast<std::size_t>(j)) * std::abs(beta[j]);
    }
    double group_term = 0.0;
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
        double sq = 0.0;
        for (std::size_t j : groups.members(g)) {
            double b = beta[static_cast<Eigen::Index>(j)];
            sq += b * b;
        }
        group_term += std::sqrt(static_cast<double>(groups.group_sizes()[g])) *
                      spec.group_weight(g) * std::sqrt(sq);
    }
    return spec.alpha * spec.lambda * l1 + (1.0 - spec.alpha) * spec.lambda * group_term;
}

double soft_threshold(double v, double t) {
    if (v > t) {
        return v - t;
    }
    if (v < -t) {
        return v + t;
    }
    return 0.0;
}

Eigen::VectorXd group_shrink(const Eigen::VectorXd& v, double t) {
    double norm = v.norm();
    if (norm <= t || norm == 0.0) {
        return Eigen::VectorXd::Zero(v.size());
    }
    return (1.0 - t / norm) * v;
}

Eigen::VectorXd sparse_group_prox(const Eigen::VectorXd& beta, double step,
                                  const PenaltySpec& spec, const GroupStructure& groups) {
    check_dims(beta, groups);
    if (!(step > 0.0)) {
        throw std::invalid_argument("sparse_group_prox: step must be positive");
    }
    Eigen::VectorXd out(beta.size());
    const double l1_scale = step * spec.alpha * spec.lambda;
    const double group_scale = step * (1.0 - spec.alpha) * spec.lambda;
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
        const auto& members = groups.members(g);
        double sq = 0.0;
        for (std::size_t j : members) {
            auto idx = static_cast<Eigen::Index>(j);
            double s = soft_threshold(beta[idx], l1_scale * spec.lasso_weight(j));
            out[idx] = s;
            sq += s * s;
        }
        const double t = group_scale * std::sqrt(static_cast<double>(members.size())) *
                         spec.group_weight(g);
        const double norm = std::sqrt(sq);
        if (norm <= t || norm == 0.0) {
            for (std::size_t j : members) {
                out[static_cast<Eigen::Index>(j)] = 0.0;
            }
        } else if (t > 0.0) {
            const double factor = 1.0 - t / norm;
            for (std::size_t j : members) {
                out[static_cast<Eigen::Index>(j)] *= factor;
            }
        }
    }
    return out;
}

AdaptiveWeights adaptive_weights(const Eigen::VectorXd& pilot, double gamma1, double gamma2,
                                 const GroupStructure& groups, double eps, double cap) {
    if (!(eps > 0.0) || !(cap > 0.0)) {
        throw std::invalid_argument("adaptive_weights: eps and cap must be positive");
    }
    check_dims(pilot, groups);
    auto weight = [&](double magnitude, double gamma) {
        if (gamma == 0.0) {
            return 1.0;
        }
        double w = 1.0 / std::pow(std::max(magnitude, eps), gamma);
        return std::clamp(w, 0.0, cap);
    };
    AdaptiveWeights out;
    out.lasso_weights.resize(pilot.size());
    for (Eigen::Index j = 0; j < pilot.size(); ++j) {
        out.lasso_weights[j] = weight(std::abs(pilot[j]), gamma1);
    }
    out.group_weights.resize(static_cast<Eigen::Index>(groups.group_count()));
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
        double sq = 0.0;
        for (std::size_t j : groups.members(g)) {
            double b = pilot[static_cast<Eigen::Index>(j)];
            sq += b * b;
        }
        out.group_weights[static_cast<Eigen::Index>(g)] = weight(std::sqrt(sq), gamma2);
    }
    return out;
}

AdaptiveWeights adaptive_weights(const FitResult& pilot, double gamma1, double gamma2,
                                 const GroupStructure& groups, double eps, double cap) {
    return adaptive_weights(pilot.standardized_coefficients(), gamma1, gamma2, groups, eps, cap);
}

}  // namespace qgl
