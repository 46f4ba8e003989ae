#include <doctest.h>

#include <cmath>
#include <vector>

#include "qgl/penalty.hpp"
#include "qgl/random.hpp"
#include "test_support.hpp"

using namespace qgl;

namespace {

PenaltySpec spec_with(double lambda, double alpha) {
    PenaltySpec s;
    s.lambda = lambda;
    s.alpha = alpha;
    return s;
}

double prox_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double step,
                      const PenaltySpec& spec, const GroupStructure& g) {
    return 0.5 * (x - v).squaredNorm() + step * penalty_value(x, spec, g);
}

}  // namespace

TEST_CASE("penalty_value examples") {
    const GroupStructure g = single_group(2);
    const Eigen::Vector2d beta(3, 4);
    CHECK(penalty_value(Eigen::VectorXd::Zero(2), spec_with(1, 0.5), g) == 0.0);
    CHECK(penalty_value(beta, spec_with(1, 0), g) == doctest::Approx(std::sqrt(2.0) * 5.0));
    CHECK(penalty_value(beta, spec_with(1, 1), g) == doctest::Approx(7.0));
}

TEST_CASE("penalty_value is linear in alpha") {
    PortableRng rng(3);
    const GroupStructure g = testing::contiguous_groups({2, 3, 1});
    for (int k = 0; k < 50; ++k) {
        Eigen::VectorXd beta(6);
        for (double& b : beta) {
            b = rng.normal();
        }
        const double alpha = rng.uniform();
        const double p0 = penalty_value(beta, spec_with(0.7, 0.0), g);
        const double p1 = penalty_value(beta, spec_with(0.7, 1.0), g);
        CHECK(penalty_value(beta, spec_with(0.7, alpha), g) ==
              doctest::Approx(alpha * p1 + (1 - alpha) * p0).epsilon(1e-12));
    }
}

TEST_CASE("soft_threshold examples") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-2.5, 0.0) == -2.5);
}

TEST_CASE("group_shrink examples") {
    const Eigen::Vector2d v(3, 4);
    const Eigen::VectorXd a = group_shrink(v, 2.5);
    CHECK(a[0] == doctest::Approx(1.5));
    CHECK(a[1] == doctest::Approx(2.0));
    CHECK(group_shrink(v, 5.0).isZero(0.0));
    CHECK(group_shrink(Eigen::VectorXd::Zero(2), 7.0).isZero(0.0));
}

TEST_CASE("sparse_group_prox worked example") {
    const GroupStructure g = single_group(2);
    const Eigen::VectorXd x = sparse_group_prox(Eigen::Vector2d(3, 4), 1.0, spec_with(1, 0.5), g);
    CHECK(x[0] == doctest::Approx(2.08900).epsilon(1e-5));
    CHECK(x[1] == doctest::Approx(2.92460).epsilon(1e-5));
}

TEST_CASE("sparse_group_prox reduces to identity and soft thresholding") {
    const GroupStructure g = testing::contiguous_groups({2, 2});
    const Eigen::Vector4d v(1.5, -0.2, 0.7, -3.0);
    CHECK(sparse_group_prox(v, 0.5, spec_with(0, 0.5), g) == Eigen::VectorXd(v));
    const Eigen::VectorXd lasso = sparse_group_prox(v, 0.5, spec_with(1, 1), g);
    for (Eigen::Index j = 0; j < 4; ++j) {
        CHECK(lasso[j] == soft_threshold(v[j], 0.5));
    }
}

TEST_CASE("sparse_group_prox is non-expansive") {
    PortableRng rng(12);
    const GroupStructure g = testing::contiguous_groups({1, 3, 2});
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd a(6);
        Eigen::VectorXd b(6);
        for (Eigen::Index j = 0; j < 6; ++j) {
            a[j] = 2 * rng.normal();
            b[j] = 2 * rng.normal();
        }
        const PenaltySpec s = spec_with(rng.uniform() * 2, rng.uniform());
        const Eigen::VectorXd pa = sparse_group_prox(a, 0.8, s, g);
        const Eigen::VectorXd pb = sparse_group_prox(b, 0.8, s, g);
        CHECK((pa - pb).norm() <= (a - b).norm() + 1e-12);
    }
}

TEST_CASE("sparse_group_prox output beats nearby perturbations") {
    PortableRng rng(13);
    const GroupStructure g = testing::contiguous_groups({2, 3});
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd v(5);
        for (double& e : v) {
            e = 2 * rng.normal();
        }
        PenaltySpec s = spec_with(0.3 + rng.uniform(), rng.uniform());
        s.lasso_weights = Eigen::VectorXd::Constant(5, 1.0);
        s.lasso_weights[0] = 0.5;
        s.group_weights = Eigen::Vector2d(1.5, 0.7);
        const Eigen::VectorXd x = sparse_group_prox(v, 0.9, s, g);
        const double best = prox_objective(x, v, 0.9, s, g);
        for (int t = 0; t < 1000; ++t) {
            Eigen::VectorXd d(5);
            for (double& e : d) {
                e = rng.normal();
            }
            d *= 1e-3 * rng.uniform() / d.norm();
            CHECK(best <= prox_objective(x + d, v, 0.9, s, g) + 1e-15);
        }
    }
}

TEST_CASE("adaptive_weights examples") {
    const GroupStructure one = single_group(1);
    const AdaptiveWeights a = adaptive_weights(Eigen::VectorXd::Constant(1, 0.5), 1.0, 0.0, one);
    CHECK(a.lasso_weights[0] == doctest::Approx(2.0));
    const AdaptiveWeights z = adaptive_weights(Eigen::VectorXd::Zero(1), 1.0, 0.0, one, 1e-6, 1e6);
    CHECK(z.lasso_weights[0] == doctest::Approx(1e6));
    const GroupStructure two = single_group(2);
    const AdaptiveWeights gw = adaptive_weights(Eigen::Vector2d(3, 4), 0.0, 2.0, two);
    CHECK(gw.group_weights[0] == doctest::Approx(0.04));
}

TEST_CASE("zero exponents give all-ones weights exactly") {
    const GroupStructure g = testing::contiguous_groups({2, 1});
    const AdaptiveWeights w = adaptive_weights(Eigen::Vector3d(0.0, 3.0, -1e-9), 0.0, 0.0, g);
    CHECK(w.lasso_weights == Eigen::VectorXd::Ones(3));
    CHECK(w.group_weights == Eigen::VectorXd::Ones(2));
}

TEST_CASE("penalty spec validation") {
    PenaltySpec s = spec_with(-1, 0.5);
    CHECK_THROWS_AS(s.validate(2, 1), std::invalid_argument);
    s = spec_with(1, 1.5);
    CHECK_THROWS_AS(s.validate(2, 1), std::invalid_argument);
    s = spec_with(1, 0.5);
    s.lasso_weights = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(s.validate(2, 1), std::invalid_argument);
}
