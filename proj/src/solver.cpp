#include "qgl/solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qgl {

namespace {

constexpr std::size_t kCheckInterval = 50;
constexpr std::size_t kStallWindow = 2500;
constexpr double kStallRatio = 0.9;

/// Largest eigenvalue of A^T A for A = [1 X], by power iteration.
double largest_sq_singular(const Eigen::MatrixXd& x) {
    const Eigen::Index p = x.cols();
    Eigen::VectorXd v(p + 1);
    for (Eigen::Index i = 0; i <= p; ++i) {
        v[i] = 1.0 + 0.37 * static_cast<double>(i) / static_cast<double>(p + 1);
    }
    v.normalize();
    double estimate = 0.0;
    Eigen::VectorXd w(p + 1);
    for (int it = 0; it < 1000; ++it) {
        Eigen::VectorXd av = x * v.tail(p);
        av.array() += v[0];
        w[0] = av.sum();
        w.tail(p).noalias() = x.transpose() * av;
        double norm = w.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = w / norm;
        if (std::abs(norm - estimate) <= 1e-12 * norm) {
            estimate = norm;
            break;
        }
        estimate = norm;
    }
    return estimate;
}

double sample_std(const Eigen::VectorXd& y) {
    if (y.size() < 2) {
        return 0.0;
    }
    double m = y.mean();
    return std::sqrt((y.array() - m).square().sum() / static_cast<double>(y.size() - 1));
}

struct Point {
    double intercept = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd residual;  ///< y - intercept - X beta
};

/// Smoothed (or least-squares) risk with the sparse-group penalty on standardized data.
class Problem {
public:
    Problem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const PenaltySpec& spec,
            const GroupStructure& groups)
        : x_(x), y_(y), spec_(spec), groups_(groups), n_(static_cast<double>(y.size())) {
        sigma2_ = largest_sq_singular(x);
    }

    void set_mu(double mu) { mu_ = mu; }

    /// Lipschitz constant of the smooth part at the current width.
    [[nodiscard]] double lipschitz() const {
        if (n_ == 0.0) {
            return 1.0;
        }
        double l = spec_.use_quantile_loss ? sigma2_ / (n_ * mu_) : 2.0 * sigma2_ / n_;
        return l > 0.0 ? l : 1.0;
    }

    void residual(Point& p) const {
        p.residual.noalias() = y_ - x_ * p.beta;
        p.residual.array() -= p.intercept;
    }

    [[nodiscard]] double smooth_value(const Eigen::VectorXd& r) const {
        if (r.size() == 0) {
            return 0.0;
        }
        double sum = 0.0;
        if (spec_.use_quantile_loss) {
            for (double u : r) {
                sum += smoothed_pinball(u, spec_.tau, mu_).value;
            }
        } else {
            sum = r.squaredNorm();
        }
        return sum / n_;
    }

    [[nodiscard]] double true_value(const Point& p) const {
        double loss = 0.0;
        if (p.residual.size() > 0) {
            loss = spec_.use_quantile_loss ? mean_pinball(p.residual, spec_.tau)
                                           : p.residual.squaredNorm() / n_;
        }
        return loss + penalty(p.beta);
    }

    [[nodiscard]] double penalty(const Eigen::VectorXd& beta) const {
        return penalty_value(beta, spec_, groups_);
    }

    /// Gradient of the smooth part: (d/d intercept, d/d beta).
    void gradient(const Eigen::VectorXd& r, double& g0, Eigen::VectorXd& g) const {
        if (r.size() == 0) {
            g0 = 0.0;
            g.setZero(x_.cols());
            return;
        }
        Eigen::VectorXd psi(r.size());
        if (spec_.use_quantile_loss) {
            for (Eigen::Index i = 0; i < r.size(); ++i) {
                psi[i] = smoothed_pinball(r[i], spec_.tau, mu_).derivative;
            }
        } else {
            psi = 2.0 * r;
        }
        g0 = -psi.sum() / n_;
        g.noalias() = x_.transpose() * psi;
        g /= -n_;
    }

    [[nodiscard]] Eigen::VectorXd prox(const Eigen::VectorXd& v, double step) const {
        return sparse_group_prox(v, step, spec_, groups_);
    }

    /// ||z - prox(z - s grad)||_inf / s with s = 1/L.
    [[nodiscard]] double mapping_residual(const Point& p) const {
        const double s = 1.0 / lipschitz();
        double g0 = 0.0;
        Eigen::VectorXd g;
        gradient(p.residual, g0, g);
        double worst = std::abs(g0);
        if (p.beta.size() > 0) {
            Eigen::VectorXd next = prox(p.beta - s * g, s);
            worst = std::max(worst, (p.beta - next).cwiseAbs().maxCoeff() / s);
        }
        return worst;
    }

private:
    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    const PenaltySpec& spec_;
    const GroupStructure& groups_;
    double n_;
    double sigma2_ = 0.0;
    double mu_ = 1.0;
};

/// FISTA with function-value restart at a fixed smoothing width. Stops at the
/// tolerance, the budget, or when the mapping residual has not improved by 10%
/// over a window of iterations. Returns the number of iterations spent.
std::size_t run_stage(const Problem& problem, Point& x, double tolerance, std::size_t budget) {
    double step = 1.0 / problem.lipschitz();
    double fx = problem.smooth_value(x.residual);
    double big_fx = fx + problem.penalty(x.beta);

    Point y = x;
    bool y_is_x = true;
    double t = 1.0;
    Point next;
    double g0 = 0.0;
    Eigen::VectorXd g;
    std::size_t used = 0;
    double best_mapping = std::numeric_limits<double>::infinity();
    std::size_t best_at = 0;
    while (used < budget) {
        ++used;
        problem.gradient(y.residual, g0, g);
        const double fy = y_is_x ? fx : problem.smooth_value(y.residual);
        double fnext = 0.0;
        for (int halvings = 0;; ++halvings) {
            next.intercept = y.intercept - step * g0;
            next.beta = problem.prox(y.beta - step * g, step);
            problem.residual(next);
            fnext = problem.smooth_value(next.residual);
            const double d0 = next.intercept - y.intercept;
            const Eigen::VectorXd d = next.beta - y.beta;
            const double bound =
                fy + g0 * d0 + g.dot(d) + (d0 * d0 + d.squaredNorm()) / (2.0 * step);
            if (fnext <= bound + 1e-13 * std::max(1.0, std::abs(fy)) || halvings >= 60) {
                break;
            }
            step *= 0.5;
        }
        double mapping = std::abs(next.intercept - y.intercept);
        if (next.beta.size() > 0) {
            mapping = std::max(mapping, (next.beta - y.beta).cwiseAbs().maxCoeff());
        }
        mapping /= step;

        const double big_next = fnext + problem.penalty(next.beta);
        if (big_next > big_fx && !y_is_x) {
            // Objective went up: drop momentum and retry from the current iterate.
            y = x;
            y_is_x = true;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double momentum = (t - 1.0) / t_next;
        y.intercept = next.intercept + momentum * (next.intercept - x.intercept);
        y.beta = next.beta + momentum * (next.beta - x.beta);
        y.residual = next.residual + momentum * (next.residual - x.residual);
        y_is_x = momentum == 0.0;
        std::swap(x, next);
        fx = fnext;
        big_fx = big_next;
        t = t_next;

        if (mapping <= tolerance || used % kCheckInterval == 0) {
            const double current = problem.mapping_residual(x);
            if (current <= tolerance) {
                break;
            }
            if (current < kStallRatio * best_mapping) {
                best_mapping = current;
                best_at = used;
            } else if (used - best_at >= kStallWindow) {
                break;
            }
        }
    }
    return used;
}

Point initial_point(const FitResult* warm, const Standardization& stats, std::size_t p) {
    Point z;
    z.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    if (warm != nullptr) {
        if (static_cast<std::size_t>(warm->coefficients.size()) != p) {
            throw std::invalid_argument("fit: warm start has " +
                                        std::to_string(warm->coefficients.size()) +
                                        " coefficients, expected " + std::to_string(p));
        }
        z.beta = warm->coefficients.cwiseProduct(stats.scale);
        z.intercept = warm->intercept + warm->coefficients.dot(stats.mean);
    }
    return z;
}

std::vector<double> smoothing_schedule(const SmoothingParams& params) {
    std::vector<double> mus;
    double mu = params.mu;
    for (;;) {
        mus.push_back(mu);
        if (mu <= params.mu_min) {
            break;
        }
        mu = std::max(mu * params.continuation_factor, params.mu_min);
    }
    return mus;
}

}  // namespace

void SolverConfig::validate() const {
    if (max_iterations < 1) {
        throw std::invalid_argument("solver: max_iterations must be at least 1");
    }
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("solver: tolerance must be positive");
    }
    if (smoothing) {
        smoothing->validate();
    }
    if (!(mu_min_scale > 0.0) || !(mu_scale >= mu_min_scale)) {
        throw std::invalid_argument("solver: require mu_scale >= mu_min_scale > 0");
    }
    if (!(continuation_factor > 0.0 && continuation_factor < 1.0)) {
        throw std::invalid_argument("solver: continuation_factor must lie in (0,1)");
    }
}

FitResult fit(const TimeSeriesDataset& dataset, const GroupStructure& groups,
              const PenaltySpec& spec, const SolverConfig& config, const FitResult* warm_start) {
    config.validate();
    const std::size_t p = dataset.n_features();
    if (groups.n_features() != p) {
        throw std::invalid_argument("fit: group structure covers " +
                                    std::to_string(groups.n_features()) + " features, dataset has " +
                                    std::to_string(p));
    }
    spec.validate(p, groups.group_count());
    if (!dataset.all_finite()) {
        throw std::invalid_argument("fit: dataset contains non-finite values (apply a fill policy)");
    }
    if (dataset.n_rows() == 0) {
        throw std::invalid_argument("fit: dataset has no rows");
    }

    Standardization stats = config.standardize ? Standardization::fit(dataset.features())
                                               : Standardization::identity(p);
    const Eigen::MatrixXd x = config.standardize ? stats.apply(dataset.features())
                                                 : dataset.features();
    const Eigen::VectorXd& y = dataset.target();

    Problem problem(x, y, spec, groups);
    std::vector<double> mus{0.0};
    if (spec.use_quantile_loss) {
        SmoothingParams sp = config.smoothing ? *config.smoothing
                                              : SmoothingParams::for_scale(sample_std(y),
                                                                           config.mu_scale,
                                                                           config.mu_min_scale,
                                                                           config.continuation_factor);
        mus = smoothing_schedule(sp);
    }

    Point z = initial_point(warm_start, stats, p);
    problem.residual(z);

    FitResult result;
    std::size_t used = 0;
    const double final_mu = mus.back();
    const std::size_t stage_cap = std::max<std::size_t>(config.max_iterations / 10, 1);
    for (std::size_t k = 0; k < mus.size() && used < config.max_iterations; ++k) {
        problem.set_mu(mus[k] > 0.0 ? mus[k] : 1.0);
        const bool last = k + 1 == mus.size();
        const double tol = last ? config.tolerance
                                : config.tolerance * (mus[k] / final_mu);
        std::size_t budget = config.max_iterations - used;
        if (!last) {
            budget = std::min(budget, stage_cap);
        }
        std::size_t spent = run_stage(problem, z, tol, budget);
        used += spent;
        result.stage_objectives.push_back(problem.true_value(z));
    }
    problem.set_mu(final_mu > 0.0 ? final_mu : 1.0);

    result.iterations = used;
    result.optimality_residual = problem.mapping_residual(z);
    result.converged = result.optimality_residual <= config.tolerance;
    result.final_objective = problem.true_value(z);
    result.smoothing_mu = final_mu;
    result.spec = spec;
    result.coefficients = z.beta.cwiseQuotient(stats.scale);
    result.intercept = z.intercept - result.coefficients.dot(stats.mean);
    result.standardization = std::move(stats);
    return result;
}

bool needs_pilot(Method method, const Hyperparams& hyper) {
    if (method == Method::ALasso) {
        return hyper.gamma1 != 0.0;
    }
    if (method == Method::LASQG) {
        return hyper.gamma1 != 0.0 || hyper.gamma2 != 0.0;
    }
    return false;
}

Method pilot_method(Method method) {
    return method == Method::ALasso ? Method::QrLasso : Method::LSQG;
}

PenaltySpec make_spec(Method method, double tau, const Hyperparams& hyper,
                      const GroupStructure& groups, const FitResult* pilot) {
    PenaltySpec spec;
    spec.tau = tau;
    spec.lambda = hyper.lambda;
    spec.method = method;
    switch (method) {
        case Method::LmLasso:
            spec.use_quantile_loss = false;
            spec.alpha = 1.0;
            break;
        case Method::QrLasso:
            spec.alpha = 1.0;
            break;
        case Method::ALasso:
            spec.alpha = 1.0;
            spec.gamma1 = hyper.gamma1;
            break;
        case Method::LQG:
            spec.alpha = 0.0;
            break;
        case Method::LSQG:
            spec.alpha = hyper.alpha;
            break;
        case Method::LASQG:
            spec.alpha = hyper.alpha;
            spec.gamma1 = hyper.gamma1;
            spec.gamma2 = hyper.gamma2;
            break;
    }
    if (needs_pilot(method, hyper)) {
        if (pilot == nullptr) {
            throw std::invalid_argument(std::string("make_spec: ") +
                                        std::string(method_name(method)) +
                                        " requires a pilot fit");
        }
        AdaptiveWeights w = adaptive_weights(*pilot, spec.gamma1, spec.gamma2, groups, hyper.eps,
                                             hyper.cap);
        spec.lasso_weights = std::move(w.lasso_weights);
        if (method == Method::LASQG) {
            spec.group_weights = std::move(w.group_weights);
        }
    }
    return spec;
}

FitResult fit_preset(Method method, const TimeSeriesDataset& dataset,
                     const GroupStructure* groups, double tau, const Hyperparams& hyper,
                     const SolverConfig& config, const FitResult* warm_start) {
    if (uses_groups(method) && groups == nullptr) {
        throw std::invalid_argument(std::string(method_name(method)) +
                                    " requires a group structure");
    }
    const GroupStructure flat = single_group(dataset.n_features());
    const GroupStructure& g = uses_groups(method) ? *groups : flat;
    if (!needs_pilot(method, hyper)) {
        return fit(dataset, g, make_spec(method, tau, hyper, g), config, warm_start);
    }
    Hyperparams pilot_hyper = hyper;
    pilot_hyper.gamma1 = 0.0;
    pilot_hyper.gamma2 = 0.0;
    const Method pm = pilot_method(method);
    FitResult pilot = fit(dataset, g, make_spec(pm, tau, pilot_hyper, g), config, warm_start);
    return fit(dataset, g, make_spec(method, tau, hyper, g, &pilot), config, warm_start);
}

double objective_value(const FitResult& result, const TimeSeriesDataset& dataset,
                       const GroupStructure& groups) {
    const auto [std_data, stats] = standardize(dataset, result.standardization);
    const Eigen::VectorXd beta = result.standardized_coefficients();
    const double b0 = result.standardized_intercept();
    const double loss = result.spec.use_quantile_loss
                            ? pinball_risk(b0, beta, std_data, result.spec.tau)
                            : least_squares_risk(b0, beta, std_data);
    return loss + penalty_value(beta, result.spec, groups);
}

double optimality_residual(const FitResult& result, const TimeSeriesDataset& dataset,
                           const GroupStructure& groups) {
    if (static_cast<std::size_t>(result.coefficients.size()) != dataset.n_features() ||
        groups.n_features() != dataset.n_features()) {
        throw std::invalid_argument("optimality_residual: dimension mismatch");
    }
    const Eigen::MatrixXd x = result.standardization.apply(dataset.features());
    Problem problem(x, dataset.target(), result.spec, groups);
    problem.set_mu(result.smoothing_mu > 0.0 ? result.smoothing_mu : 1.0);
    Point z;
    z.beta = result.standardized_coefficients();
    z.intercept = result.standardized_intercept();
    problem.residual(z);
    return problem.mapping_residual(z);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_real(std::string_view text, std::string_view key) {
    double v = 0.0;
    if (text == "nan") {
        return std::nan("");
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("parse_fit: bad real for '" + std::string(key) + "'");
    }
    return v;
}

std::string format_vector(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += format_real(v[i]);
    }
    return out;
}

Eigen::VectorXd parse_vector(std::string_view text, std::string_view key) {
    std::vector<double> values;
    while (!text.empty()) {
        auto comma = text.find(',');
        values.push_back(parse_real(text.substr(0, comma), key));
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string serialize_fit(const FitResult& r) {
    std::ostringstream out;
    out << "format=qgl-fit-1\n";
    out << "method=" << method_name(r.spec.method) << '\n';
    out << "tau=" << format_real(r.spec.tau) << '\n';
    out << "lambda=" << format_real(r.spec.lambda) << '\n';
    out << "alpha=" << format_real(r.spec.alpha) << '\n';
    out << "gamma1=" << format_real(r.spec.gamma1) << '\n';
    out << "gamma2=" << format_real(r.spec.gamma2) << '\n';
    out << "use_quantile_loss=" << (r.spec.use_quantile_loss ? 1 : 0) << '\n';
    out << "lasso_weights=" << format_vector(r.spec.lasso_weights) << '\n';
    out << "group_weights=" << format_vector(r.spec.group_weights) << '\n';
    out << "intercept=" << format_real(r.intercept) << '\n';
    out << "iterations=" << r.iterations << '\n';
    out << "converged=" << (r.converged ? 1 : 0) << '\n';
    out << "final_objective=" << format_real(r.final_objective) << '\n';
    out << "optimality_residual=" << format_real(r.optimality_residual) << '\n';
    out << "smoothing_mu=" << format_real(r.smoothing_mu) << '\n';
    out << "stage_objectives=" << format_vector(Eigen::Map<const Eigen::VectorXd>(
                                      r.stage_objectives.data(),
                                      static_cast<Eigen::Index>(r.stage_objectives.size())))
        << '\n';
    out << "standardization_mean=" << format_vector(r.standardization.mean) << '\n';
    out << "standardization_scale=" << format_vector(r.standardization.scale) << '\n';
    out << "coefficients=" << format_vector(r.coefficients) << '\n';
    return out.str();
}

FitResult parse_fit(std::string_view text) {
    std::map<std::string, std::string, std::less<>> kv;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("parse_fit: line without '='");
        }
        kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    auto get = [&](std::string_view key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw std::invalid_argument("parse_fit: missing key '" + std::string(key) + "'");
        }
        return it->second;
    };
    if (get("format") != "qgl-fit-1") {
        throw std::invalid_argument("parse_fit: unsupported format");
    }
    FitResult r;
    r.spec.method = parse_method(get("method"));
    r.spec.tau = parse_real(get("tau"), "tau");
    r.spec.lambda = parse_real(get("lambda"), "lambda");
    r.spec.alpha = parse_real(get("alpha"), "alpha");
    r.spec.gamma1 = parse_real(get("gamma1"), "gamma1");
    r.spec.gamma2 = parse_real(get("gamma2"), "gamma2");
    r.spec.use_quantile_loss = get("use_quantile_loss") == "1";
    r.spec.lasso_weights = parse_vector(get("lasso_weights"), "lasso_weights");
    r.spec.group_weights = parse_vector(get("group_weights"), "group_weights");
    r.intercept = parse_real(get("intercept"), "intercept");
    r.iterations = static_cast<std::size_t>(std::stoull(get("iterations")));
    r.converged = get("converged") == "1";
    r.final_objective = parse_real(get("final_objective"), "final_objective");
    r.optimality_residual = parse_real(get("optimality_residual"), "optimality_residual");
    r.smoothing_mu = parse_real(get("smoothing_mu"), "smoothing_mu");
    Eigen::VectorXd stages = parse_vector(get("stage_objectives"), "stage_objectives");
    r.stage_objectives.assign(stages.begin(), stages.end());
    r.standardization.mean = parse_vector(get("standardization_mean"), "standardization_mean");
    r.standardization.scale = parse_vector(get("standardization_scale"), "standardization_scale");
    r.coefficients = parse_vector(get("coefficients"), "coefficients");
    if (r.coefficients.size() != r.standardization.mean.size() ||
        r.coefficients.size() != r.standardization.scale.size()) {
        throw std::invalid_argument("parse_fit: coefficient and standardization lengths differ");
    }
    return r;
}

}  // namespace qgl
