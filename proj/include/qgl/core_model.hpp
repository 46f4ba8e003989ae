#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qgl {

/**
 * @brief Calendar date at day or month resolution.
 *
 * Month-resolution dates (parsed from "YYYY-MM") carry day == 0 and print back
 * in the same form, so reports echo the input convention.
 */
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;  ///< 0 for month-resolution dates

    auto operator<=>(const Date&) const = default;

    [[nodiscard]] bool monthly() const { return day == 0; }
    [[nodiscard]] std::string iso() const;

    /// Parses "YYYY-MM" or "YYYY-MM-DD". Throws std::invalid_argument.
    [[nodiscard]] static Date parse(std::string_view text);

    /// Date shifted by @p count steps (months for monthly dates, days otherwise).
    [[nodiscard]] Date advanced(long count) const;

    /// Next date in a series whose last two entries are @p before and @p last.
    [[nodiscard]] static Date next_after(const Date& before, const Date& last);
};

/// Whether the target column holds price levels or log returns.
enum class TargetKind { LogReturn, Price };

/**
 * @brief Dated target series with an aligned feature matrix.
 *
 * Rows are strictly increasing in date. Feature cells may be non-finite until
 * a fill policy has been applied; fitting routines reject such datasets.
 */
class TimeSeriesDataset {
public:
    TimeSeriesDataset() = default;

    /// Throws std::invalid_argument on misaligned sizes or non-increasing dates.
    TimeSeriesDataset(std::vector<Date> dates, Eigen::VectorXd target, Eigen::MatrixXd features,
                      std::vector<std::string> feature_names,
                      TargetKind kind = TargetKind::LogReturn);

    /// Dataset with consecutive daily dates from 2000-01-01 and names x1..xN.
    [[nodiscard]] static TimeSeriesDataset from_arrays(Eigen::VectorXd target,
                                                       Eigen::MatrixXd features);

    [[nodiscard]] std::size_t n_rows() const { return static_cast<std::size_t>(target_.size()); }
    [[nodiscard]] std::size_t n_features() const {
        return static_cast<std::size_t>(features_.cols());
    }

    [[nodiscard]] const std::vector<Date>& dates() const { return dates_; }
    [[nodiscard]] const Eigen::VectorXd& target() const { return target_; }
    [[nodiscard]] const Eigen::MatrixXd& features() const { return features_; }
    [[nodiscard]] const std::vector<std::string>& feature_names() const { return names_; }
    [[nodiscard]] TargetKind target_kind() const { return kind_; }

    /// Rows [begin, end).
    [[nodiscard]] TimeSeriesDataset slice(std::size_t begin, std::size_t end) const;

    /// Columns in the given order.
    [[nodiscard]] TimeSeriesDataset select_columns(std::span<const std::size_t> columns) const;

    /// Copy with replaced feature matrix (same shape).
    [[nodiscard]] TimeSeriesDataset with_features(Eigen::MatrixXd features) const;

    /// Copy with replaced target (same length).
    [[nodiscard]] TimeSeriesDataset with_target(Eigen::VectorXd target, TargetKind kind) const;

    /// True when target and every feature cell is finite.
    [[nodiscard]] bool all_finite() const;

private:
    std::vector<Date> dates_;
    Eigen::VectorXd target_;
    Eigen::MatrixXd features_;
    std::vector<std::string> names_;
    TargetKind kind_ = TargetKind::LogReturn;
};

/**
 * @brief Partition of feature columns into K labelled groups.
 *
 * Labels run 1..K with every group non-empty. Members of a group need not be
 * adjacent columns.
 */
class GroupStructure {
public:
    GroupStructure() = default;

    [[nodiscard]] std::size_t group_count() const { return sizes_.size(); }
    [[nodiscard]] std::size_t n_features() const { return labels_.size(); }
    [[nodiscard]] const std::vector<int>& labels() const { return labels_; }
    [[nodiscard]] const std::vector<std::size_t>& group_sizes() const { return sizes_; }
    /// Column indices of group @p g (0-based group index).
    [[nodiscard]] const std::vector<std::size_t>& members(std::size_t g) const {
        return members_[g];
    }

    friend GroupStructure validate_groups(std::span<const int> labels, std::size_t n_features);

private:
    std::vector<int> labels_;
    std::vector<std::size_t> sizes_;
    std::vector<std::vector<std::size_t>> members_;
};

/// Builds a GroupStructure; throws std::invalid_argument on length mismatch,
/// non-positive labels or gaps in 1..K.
[[nodiscard]] GroupStructure validate_groups(std::span<const int> labels, std::size_t n_features);

/// All features in one group.
[[nodiscard]] GroupStructure single_group(std::size_t n_features);

enum class Method { LmLasso, QrLasso, ALasso, LQG, LSQG, LASQG };

[[nodiscard]] std::string_view method_name(Method method);
/// Accepts the canonical names (lm_lasso, qr_lasso, alasso, L-QG, L-SQG, L-ASQG),
/// case-insensitively. Throws std::invalid_argument otherwise.
[[nodiscard]] Method parse_method(std::string_view name);
[[nodiscard]] bool uses_groups(Method method);
[[nodiscard]] bool uses_alpha(Method method);
[[nodiscard]] bool uses_power_weight(Method method);

/**
 * @brief Penalized-risk specification: one row of the method parameter matrix.
 *
 * Empty weight vectors mean all-ones.
 */
struct PenaltySpec {
    double tau = 0.5;
    double lambda = 0.0;
    double alpha = 1.0;
    Eigen::VectorXd lasso_weights;  ///< per-feature L1 weights, length N or empty
    Eigen::VectorXd group_weights;  ///< per-group L2 weights, length K or empty
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    bool use_quantile_loss = true;
    Method method = Method::LSQG;

    [[nodiscard]] double lasso_weight(std::size_t j) const {
        return lasso_weights.size() == 0 ? 1.0 : lasso_weights[static_cast<Eigen::Index>(j)];
    }
    [[nodiscard]] double group_weight(std::size_t g) const {
        return group_weights.size() == 0 ? 1.0 : group_weights[static_cast<Eigen::Index>(g)];
    }

    /// Throws std::invalid_argument when a field is out of range or a weight
    /// vector has the wrong length or a negative/non-finite entry.
    void validate(std::size_t n_features, std::size_t n_groups) const;
};

/// Per-column centering and scaling. Disabled standardization is mean 0, scale 1.
struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    [[nodiscard]] static Standardization identity(std::size_t n_features);
    /// Sample mean and n-1 standard deviation per column; throws on zero variance.
    [[nodiscard]] static Standardization fit(const Eigen::MatrixXd& features);

    [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
};

/// Standardizes the feature columns with fresh or supplied statistics. The target
/// is left untouched.
[[nodiscard]] std::pair<TimeSeriesDataset, Standardization> standardize(
    const TimeSeriesDataset& dataset, const std::optional<Standardization>& stats = std::nullopt);

/**
 * @brief Result of a penalized fit, reported on the original feature scale.
 */
struct FitResult {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    std::size_t iterations = 0;
    bool converged = false;
    double final_objective = 0.0;      ///< unsmoothed risk + penalty, fitted space
    double optimality_residual = 0.0;  ///< prox-gradient mapping, infinity norm
    double smoothing_mu = 0.0;         ///< smoothing width of the final stage (0 for least squares)
    PenaltySpec spec;
    Standardization standardization;
    std::vector<double> stage_objectives;  ///< unsmoothed objective after each stage

    /// Coefficients in the standardized space the penalty acts on.
    [[nodiscard]] Eigen::VectorXd standardized_coefficients() const;
    /// Intercept in the standardized space.
    [[nodiscard]] double standardized_intercept() const;

    [[nodiscard]] double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;

    /// Indices of exactly-nonzero coefficients.
    [[nodiscard]] std::vector<std::size_t> support() const;
};

}  // namespace qgl
