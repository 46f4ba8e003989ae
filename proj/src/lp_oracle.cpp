#include "qgl/lp_oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qgl/loss.hpp"

namespace qgl {

namespace {

constexpr double kPivotEps = 1e-11;

}  // namespace

LpSolution lp_oracle(const TimeSeriesDataset& dataset, double tau, double lambda,
                     bool standardize) {
    const auto n = static_cast<Eigen::Index>(dataset.n_rows());
    const auto p = static_cast<Eigen::Index>(dataset.n_features());
    if (n < 1 || n > 200 || p > 20) {
        throw std::invalid_argument("lp_oracle: supports 1 <= n <= 200 and p <= 20");
    }
    if (!(tau > 0.0 && tau < 1.0) || !(lambda >= 0.0)) {
        throw std::invalid_argument("lp_oracle: tau in (0,1) and lambda >= 0 required");
    }
    const Eigen::MatrixXd x =
        standardize ? Standardization::fit(dataset.features()).apply(dataset.features())
                    : dataset.features();
    const Eigen::VectorXd& y = dataset.target();

    // Columns: b+, b-, beta+ (p), beta- (p), u+ (n), u- (n).
    const Eigen::Index cols = 2 + 2 * p + 2 * n;
    const Eigen::Index col_beta = 2;
    const Eigen::Index col_up = 2 + 2 * p;
    const Eigen::Index col_um = col_up + n;

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
    cost.segment(col_beta, 2 * p).setConstant(lambda);
    cost.segment(col_up, n).setConstant(tau / static_cast<double>(n));
    cost.segment(col_um, n).setConstant((1.0 - tau) / static_cast<double>(n));

    Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(n, cols);
    Eigen::VectorXd rhs(n);
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        tab(i, 0) = 1.0;
        tab(i, 1) = -1.0;
        tab.row(i).segment(col_beta, p) = x.row(i);
        tab.row(i).segment(col_beta + p, p) = -x.row(i);
        tab(i, col_up + i) = 1.0;
        tab(i, col_um + i) = -1.0;
        rhs[i] = y[i];
        if (y[i] < 0.0) {
            tab.row(i) *= -1.0;
            rhs[i] = -rhs[i];
            basis[static_cast<std::size_t>(i)] = col_um + i;
        } else {
            basis[static_cast<std::size_t>(i)] = col_up + i;
        }
    }

    // Reduced costs r = c - c_B^T T.
    Eigen::VectorXd reduced = cost;
    for (Eigen::Index i = 0; i < n; ++i) {
        reduced -= cost[basis[static_cast<std::size_t>(i)]] * tab.row(i).transpose();
    }

    LpSolution sol;
    const std::size_t pivot_limit = 100000;
    for (;;) {
        Eigen::Index entering = -1;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (reduced[j] < -kPivotEps) {
                entering = j;
                break;
            }
        }
        if (entering < 0) {
            break;
        }
        Eigen::Index leaving = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double a = tab(i, entering);
            if (a > kPivotEps) {
                const double ratio = rhs[i] / a;
                if (ratio < best_ratio - 1e-14 ||
                    (std::abs(ratio - best_ratio) <= 1e-14 && leaving >= 0 &&
                     basis[static_cast<std::size_t>(i)] <
                         basis[static_cast<std::size_t>(leaving)])) {
                    best_ratio = ratio;
                    leaving = i;
                }
            }
        }
        if (leaving < 0) {
            throw std::runtime_error("lp_oracle: unbounded direction (should not happen)");
        }
        if (++sol.pivots > pivot_limit) {
            throw std::runtime_error("lp_oracle: pivot limit reached on degenerate LP");
        }
        const double pivot = tab(leaving, entering);
        tab.row(leaving) /= pivot;
        rhs[leaving] /= pivot;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == leaving) {
                continue;
            }
            const double f = tab(i, entering);
            if (f != 0.0) {
                tab.row(i) -= f * tab.row(leaving);
                rhs[i] -= f * rhs[leaving];
            }
        }
        const double f = reduced[entering];
        reduced -= f * tab.row(leaving).transpose();
        basis[static_cast<std::size_t>(leaving)] = entering;
    }

    Eigen::VectorXd z = Eigen::VectorXd::Zero(cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        z[basis[static_cast<std::size_t>(i)]] = rhs[i];
    }
    sol.intercept = z[0] - z[1];
    sol.beta = z.segment(col_beta, p) - z.segment(col_beta + p, p);
    // Objective recomputed from the primal point rather than the tableau.
    Eigen::VectorXd r = y - x * sol.beta;
    r.array() -= sol.intercept;
    sol.objective = mean_pinball(r, tau) + lambda * sol.beta.lpNorm<1>();
    return sol;
}

}  // namespace qgl
