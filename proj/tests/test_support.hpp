#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qgl/core_model.hpp"
#include "qgl/random.hpp"

namespace qgl::testing {

/// Gaussian features and a sparse linear target with Gaussian noise.
inline TimeSeriesDataset linear_dataset(std::size_t n, std::size_t p, std::uint64_t seed,
                                        const std::vector<double>& beta = {},
                                        double noise = 1.0) {
    PortableRng rng(seed);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, j) = rng.normal();
        }
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < beta.size() && j < p; ++j) {
            mean += beta[j] * x(i, static_cast<Eigen::Index>(j));
        }
        y[i] = mean + noise * rng.normal();
    }
    return TimeSeriesDataset::from_arrays(std::move(y), std::move(x));
}

/// Consecutive groups of the given sizes.
inline GroupStructure contiguous_groups(const std::vector<std::size_t>& sizes) {
    std::vector<int> labels;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        labels.insert(labels.end(), sizes[g], static_cast<int>(g + 1));
    }
    return validate_groups(labels, labels.size());
}

}  // namespace qgl::testing
