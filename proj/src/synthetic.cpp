#include "qgl/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qgl/random.hpp"

namespace qgl {

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 3 || spec.p == 0 || spec.group_size == 0) {
        throw std::invalid_argument("synthetic: need n >= 3, p >= 1 and group_size >= 1");
    }
    if (spec.noise_dof <= 2) {
        throw std::invalid_argument("synthetic: noise_dof must exceed 2 for finite variance");
    }
    if (spec.true_features.size() != spec.true_coefficients.size()) {
        throw std::invalid_argument("synthetic: true_features and true_coefficients differ in length");
    }
    SyntheticData data;
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);
    data.beta = Eigen::VectorXd::Zero(p);
    for (std::size_t k = 0; k < spec.true_features.size(); ++k) {
        const std::size_t j = spec.true_features[k];
        if (j >= spec.p) {
            throw std::invalid_argument("synthetic: true feature index out of range");
        }
        data.beta[static_cast<Eigen::Index>(j)] = spec.true_coefficients[k];
        data.true_support.push_back(j);
    }

    PortableRng rng(spec.seed);
    const std::size_t n_groups = (spec.p + spec.group_size - 1) / spec.group_size;
    const int width = spec.p >= 100 ? 3 : 2;
    for (std::size_t j = 0; j < spec.p; ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "f%0*zu", width, j + 1);
        data.names.emplace_back(buf);
        data.groups[data.names.back()] = static_cast<int>(j / spec.group_size) + 1;
    }

    // Burn-in lets the AR recursions forget their zero start.
    const std::size_t burn = 50;
    Eigen::VectorXd factor = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_groups));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    const double idio = std::sqrt(1.0 - spec.group_loading * spec.group_loading);
    data.features.resize(n, p);
    for (std::size_t t = 0; t < burn + spec.n; ++t) {
        for (Eigen::Index g = 0; g < factor.size(); ++g) {
            factor[g] = spec.feature_ar * factor[g] + rng.normal();
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto g = static_cast<Eigen::Index>(static_cast<std::size_t>(j) / spec.group_size);
            x[j] = spec.feature_ar * x[j] +
                   (1.0 - spec.feature_ar) * spec.group_loading * factor[g] + idio * rng.normal();
        }
        if (t >= burn) {
            data.features.row(static_cast<Eigen::Index>(t - burn)) = x.transpose();
        }
    }

    data.prices.resize(n);
    data.prices[0] = spec.initial_price;
    const double t_scale = std::sqrt(static_cast<double>(spec.noise_dof - 2) /
                                     static_cast<double>(spec.noise_dof));
    double noise = 0.0;
    for (Eigen::Index t = 1; t < n; ++t) {
        noise = spec.noise_ar * noise + spec.noise_scale * t_scale * rng.student_t(spec.noise_dof);
        const double r = data.features.row(t - 1).dot(data.beta) + noise;
        data.prices[t] = data.prices[t - 1] * std::exp(r);
    }
    data.dates.reserve(spec.n);
    for (std::size_t t = 0; t < spec.n; ++t) {
        data.dates.push_back(spec.start.advanced(static_cast<long>(t)));
    }
    return data;
}

std::string synthetic_csv(const SyntheticData& data) {
    std::string out = "date,price";
    for (const std::string& name : data.names) {
        out += ',';
        out += name;
    }
    out += '\n';
    char buf[64];
    for (Eigen::Index t = 0; t < data.prices.size(); ++t) {
        out += data.dates[static_cast<std::size_t>(t)].iso();
        for (Eigen::Index j = -1; j < data.features.cols(); ++j) {
            const double v = j < 0 ? data.prices[t] : data.features(t, j);
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out += ',';
            out.append(buf, ptr);
        }
        out += '\n';
    }
    return out;
}

}  // namespace qgl
