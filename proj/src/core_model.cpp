#include "qgl/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qgl {

namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::year_month_day;

year_month_day to_ymd(const Date& d) {
    return year_month_day{std::chrono::year{d.year}, std::chrono::month{d.month},
                          std::chrono::day{d.monthly() ? 1u : d.day}};
}

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw std::invalid_argument("unparseable date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

std::string Date::iso() const {
    char buf[40];
    if (monthly()) {
        std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
    }
    return buf;
}

Date Date::parse(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.remove_suffix(1);
    }
    Date d;
    if (text.size() == 7 && text[4] == '-') {
        d.year = parse_int(text.substr(0, 4), text);
        d.month = static_cast<unsigned>(parse_int(text.substr(5, 2), text));
        d.day = 0;
    } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        d.year = parse_int(text.substr(0, 4), text);
        d.month = static_cast<unsigned>(parse_int(text.substr(5, 2), text));
        d.day = static_cast<unsigned>(parse_int(text.substr(8, 2), text));
    } else {
        throw std::invalid_argument("unparseable date '" + std::string(text) +
                                    "' (expected YYYY-MM or YYYY-MM-DD)");
    }
    if (!to_ymd(d).ok()) {
        throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    }
    return d;
}

Date Date::advanced(long count) const {
    if (monthly()) {
        auto ym = std::chrono::year{year} / std::chrono::month{month};
        ym += std::chrono::months{count};
        return Date{static_cast<int>(ym.year()), static_cast<unsigned>(ym.month()), 0};
    }
    year_month_day next{sys_days{to_ymd(*this)} + days{count}};
    return Date{static_cast<int>(next.year()), static_cast<unsigned>(next.month()),
                static_cast<unsigned>(next.day())};
}

Date Date::next_after(const Date& before, const Date& last) {
    if (last.monthly()) {
        return last.advanced(1);
    }
    auto gap = (sys_days{to_ymd(last)} - sys_days{to_ymd(before)}).count();
    return last.advanced(std::max<long>(gap, 1));
}

TimeSeriesDataset::TimeSeriesDataset(std::vector<Date> dates, Eigen::VectorXd target,
                                     Eigen::MatrixXd features,
                                     std::vector<std::string> feature_names, TargetKind kind)
    : dates_(std::move(dates)),
      target_(std::move(target)),
      features_(std::move(features)),
      names_(std::move(feature_names)),
      kind_(kind) {
    if (static_cast<Eigen::Index>(dates_.size()) != target_.size() ||
        features_.rows() != target_.size()) {
        throw std::invalid_argument("dataset: dates, target and feature rows differ in length");
    }
    if (static_cast<Eigen::Index>(names_.size()) != features_.cols()) {
        throw std::invalid_argument("dataset: feature name count does not match columns");
    }
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw std::invalid_argument("dataset: dates not strictly increasing at " +
                                        dates_[i].iso());
        }
    }
}

TimeSeriesDataset TimeSeriesDataset::from_arrays(Eigen::VectorXd target,
                                                 Eigen::MatrixXd features) {
    std::vector<Date> dates;
    dates.reserve(static_cast<std::size_t>(target.size()));
    Date d{2000, 1, 1};
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        dates.push_back(d);
        d = d.advanced(1);
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        names.push_back("x" + std::to_string(j + 1));
    }
    return TimeSeriesDataset(std::move(dates), std::move(target), std::move(features),
                             std::move(names));
}

TimeSeriesDataset TimeSeriesDataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > n_rows()) {
        throw std::invalid_argument("dataset: slice out of range");
    }
    auto b = static_cast<Eigen::Index>(begin);
    auto len = static_cast<Eigen::Index>(end - begin);
    return TimeSeriesDataset(
        std::vector<Date>(dates_.begin() + b, dates_.begin() + b + len),
        target_.segment(b, len), features_.middleRows(b, len), names_, kind_);
}

TimeSeriesDataset TimeSeriesDataset::select_columns(std::span<const std::size_t> columns) const {
    Eigen::MatrixXd x(features_.rows(), static_cast<Eigen::Index>(columns.size()));
    std::vector<std::string> names;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] >= n_features()) {
            throw std::invalid_argument("dataset: column index out of range");
        }
        x.col(static_cast<Eigen::Index>(c)) = features_.col(static_cast<Eigen::Index>(columns[c]));
        names.push_back(names_[columns[c]]);
    }
    return TimeSeriesDataset(dates_, target_, std::move(x), std::move(names), kind_);
}

TimeSeriesDataset TimeSeriesDataset::with_features(Eigen::MatrixXd features) const {
    if (features.rows() != features_.rows() || features.cols() != features_.cols()) {
        throw std::invalid_argument("dataset: replacement features have a different shape");
    }
    TimeSeriesDataset copy = *this;
    copy.features_ = std::move(features);
    return copy;
}

TimeSeriesDataset TimeSeriesDataset::with_target(Eigen::VectorXd target, TargetKind kind) const {
    if (target.size() != target_.size()) {
        throw std::invalid_argument("dataset: replacement target has a different length");
    }
    TimeSeriesDataset copy = *this;
    copy.target_ = std::move(target);
    copy.kind_ = kind;
    return copy;
}

bool TimeSeriesDataset::all_finite() const {
    return target_.allFinite() && features_.allFinite();
}

GroupStructure validate_groups(std::span<const int> labels, std::size_t n_features) {
    if (labels.size() != n_features) {
        throw std::invalid_argument("groups: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(n_features) + " features");
    }
    int k = 0;
    for (int label : labels) {
        if (label <= 0) {
            throw std::invalid_argument("groups: labels must be positive, got " +
                                        std::to_string(label));
        }
        k = std::max(k, label);
    }
    GroupStructure gs;
    gs.labels_.assign(labels.begin(), labels.end());
    gs.sizes_.assign(static_cast<std::size_t>(k), 0);
    gs.members_.resize(static_cast<std::size_t>(k));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        auto g = static_cast<std::size_t>(labels[j] - 1);
        ++gs.sizes_[g];
        gs.members_[g].push_back(j);
    }
    for (std::size_t g = 0; g < gs.sizes_.size(); ++g) {
        if (gs.sizes_[g] == 0) {
            throw std::invalid_argument("groups: label " + std::to_string(g + 1) +
                                        " is unused (labels must cover 1..K)");
        }
    }
    return gs;
}

GroupStructure single_group(std::size_t n_features) {
    std::vector<int> labels(n_features, 1);
    return validate_groups(labels, n_features);
}

std::string_view method_name(Method method) {
    switch (method) {
        case Method::LmLasso: return "lm_lasso";
        case Method::QrLasso: return "qr_lasso";
        case Method::ALasso: return "alasso";
        case Method::LQG: return "L-QG";
        case Method::LSQG: return "L-SQG";
        case Method::LASQG: return "L-ASQG";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    std::string lower;
    for (char c : name) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (Method m : {Method::LmLasso, Method::QrLasso, Method::ALasso, Method::LQG, Method::LSQG,
                     Method::LASQG}) {
        std::string canonical;
        for (char c : method_name(m)) {
            canonical.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        if (lower == canonical) {
            return m;
        }
    }
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

bool uses_groups(Method method) {
    return method == Method::LQG || method == Method::LSQG || method == Method::LASQG;
}

bool uses_alpha(Method method) { return method == Method::LSQG || method == Method::LASQG; }

bool uses_power_weight(Method method) {
    return method == Method::ALasso || method == Method::LASQG;
}

void PenaltySpec::validate(std::size_t n_features, std::size_t n_groups) const {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::invalid_argument("penalty: tau must lie in (0,1)");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("penalty: lambda must be finite and nonnegative");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("penalty: alpha must lie in [0,1]");
    }
    auto check = [](const Eigen::VectorXd& w, std::size_t expected, const char* what) {
        if (w.size() == 0) {
            return;
        }
        if (static_cast<std::size_t>(w.size()) != expected) {
            throw std::invalid_argument(std::string("penalty: ") + what + " has wrong length");
        }
        for (double v : w) {
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument(std::string("penalty: ") + what +
                                            " must be finite and nonnegative");
            }
        }
    };
    check(lasso_weights, n_features, "lasso_weights");
    check(group_weights, n_groups, "group_weights");
}

Standardization Standardization::identity(std::size_t n_features) {
    auto n = static_cast<Eigen::Index>(n_features);
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

Standardization Standardization::fit(const Eigen::MatrixXd& features) {
    const Eigen::Index n = features.rows();
    Standardization s;
    s.mean = Eigen::VectorXd::Zero(features.cols());
    s.scale = Eigen::VectorXd::Ones(features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        double m = n > 0 ? features.col(j).mean() : 0.0;
        double ss = n > 1 ? (features.col(j).array() - m).square().sum() / static_cast<double>(n - 1)
                          : 0.0;
        double sd = std::sqrt(ss);
        if (!(sd > 0.0) || !std::isfinite(sd)) {
            throw std::invalid_argument("standardize: column " + std::to_string(j) +
                                        " has zero or undefined variance");
        }
        s.mean[j] = m;
        s.scale[j] = sd;
    }
    return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& features) const {
    if (features.cols() != mean.size()) {
        throw std::invalid_argument("standardize: statistics do not match column count");
    }
    return (features.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

std::pair<TimeSeriesDataset, Standardization> standardize(
    const TimeSeriesDataset& dataset, const std::optional<Standardization>& stats) {
    Standardization s = stats ? *stats : Standardization::fit(dataset.features());
    return {dataset.with_features(s.apply(dataset.features())), std::move(s)};
}

Eigen::VectorXd FitResult::standardized_coefficients() const {
    return coefficients.cwiseProduct(standardization.scale);
}

double FitResult::standardized_intercept() const {
    return intercept + coefficients.dot(standardization.mean);
}

double FitResult::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    return intercept + row.dot(coefficients);
}

Eigen::VectorXd FitResult::predict(const Eigen::MatrixXd& features) const {
    return (features * coefficients).array() + intercept;
}

std::vector<std::size_t> FitResult::support() const {
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
        if (coefficients[j] != 0.0) {
            out.push_back(static_cast<std::size_t>(j));
        }
    }
    return out;
}

}  // namespace qgl
