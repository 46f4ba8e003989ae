#include "qgl/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qgl {

namespace {

struct CriticalKnot {
    double inverse_nobs;
    double cv1;
    double cv5;
    double cv10;
};

// Constant-only Dickey-Fuller critical values at nobs = inf, 1000, 500, 250,
// 100, 50, 25, 10, from the MacKinnon (2010) response surface.
constexpr std::array<CriticalKnot, 8> kCriticalTable{{
    {0.0, -3.43035, -2.86154, -2.56677},
    {1.0 / 1000.0, -3.43691, -2.86443, -2.56831},
    {1.0 / 500.0, -3.44350, -2.86734, -2.56986},
    {1.0 / 250.0, -3.45678, -2.87317, -2.57297},
    {1.0 / 100.0, -3.49750, -2.89091, -2.58243},
    {1.0 / 50.0, -3.56849, -2.92136, -2.59866},
    {1.0 / 25.0, -3.72386, -2.98649, -2.63280},
    {1.0 / 10.0, -4.33157, -3.23295, -2.74870},
}};

CriticalKnot critical_values(std::size_t nobs) {
    const double x = 1.0 / static_cast<double>(std::max<std::size_t>(nobs, 1));
    if (x >= kCriticalTable.back().inverse_nobs) {
        return kCriticalTable.back();
    }
    for (std::size_t i = 1; i < kCriticalTable.size(); ++i) {
        const CriticalKnot& lo = kCriticalTable[i - 1];
        const CriticalKnot& hi = kCriticalTable[i];
        if (x <= hi.inverse_nobs) {
            const double w = (x - lo.inverse_nobs) / (hi.inverse_nobs - lo.inverse_nobs);
            return {x, lo.cv1 + w * (hi.cv1 - lo.cv1), lo.cv5 + w * (hi.cv5 - lo.cv5),
                    lo.cv10 + w * (hi.cv10 - lo.cv10)};
        }
    }
    return kCriticalTable.back();
}

void require_finite(const Eigen::VectorXd& series, const char* who) {
    if (!series.allFinite()) {
        throw std::invalid_argument(std::string(who) + ": series contains non-finite values");
    }
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::size_t default_adf_lags(std::size_t n) {
    const auto schwert = static_cast<std::size_t>(
        std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    const std::size_t cap = n >= 6 ? n / 2 - 2 : 0;
    return std::min(schwert, cap);
}

AdfResult adf_test(const Eigen::VectorXd& series, std::optional<std::size_t> max_lag) {
    require_finite(series, "adf_test");
    const auto n = static_cast<std::size_t>(series.size());
    const std::size_t lags = max_lag ? *max_lag : default_adf_lags(n);
    if (n <= lags + 2) {
        throw std::invalid_argument("adf_test: series of length " + std::to_string(n) +
                                    " is too short for " + std::to_string(lags) + " lags");
    }
    if (series.maxCoeff() == series.minCoeff()) {
        throw std::invalid_argument("adf_test: constant series");
    }
    const Eigen::VectorXd diff = series.tail(n - 1) - series.head(n - 1);
    const std::size_t nobs = n - 1 - lags;
    const std::size_t k = lags + 2;
    if (nobs <= k) {
        throw std::invalid_argument("adf_test: too few observations for the regression");
    }
    // Row r is time t = lags + r in the difference series.
    Eigen::MatrixXd x(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(k));
    Eigen::VectorXd y(static_cast<Eigen::Index>(nobs));
    for (std::size_t r = 0; r < nobs; ++r) {
        const std::size_t t = lags + r;
        const auto row = static_cast<Eigen::Index>(r);
        y[row] = diff[static_cast<Eigen::Index>(t)];
        x(row, 0) = series[static_cast<Eigen::Index>(t)];
        for (std::size_t j = 1; j <= lags; ++j) {
            x(row, static_cast<Eigen::Index>(j)) = diff[static_cast<Eigen::Index>(t - j)];
        }
        x(row, static_cast<Eigen::Index>(k - 1)) = 1.0;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < static_cast<Eigen::Index>(k)) {
        throw std::runtime_error("adf_test: singular regression matrix");
    }
    const Eigen::VectorXd coef = qr.solve(y);
    const Eigen::VectorXd resid = y - x * coef;
    const double s2 = resid.squaredNorm() / static_cast<double>(nobs - k);
    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(k), 0);
    const double var0 = s2 * xtx.ldlt().solve(e0)[0];
    if (!(var0 > 0.0)) {
        throw std::runtime_error("adf_test: degenerate coefficient variance");
    }

    AdfResult out;
    out.statistic = coef[0] / std::sqrt(var0);
    out.lags = lags;
    out.nobs = nobs;
    const CriticalKnot cv = critical_values(nobs);
    out.critical_1pct = cv.cv1;
    out.critical_5pct = cv.cv5;
    out.critical_10pct = cv.cv10;
    out.reject = out.statistic < out.critical_5pct;
    return out;
}

JarqueBeraResult jarque_bera(const Eigen::VectorXd& series) {
    require_finite(series, "jarque_bera");
    const auto n = static_cast<double>(series.size());
    if (series.size() < 8) {
        throw std::invalid_argument("jarque_bera: need at least 8 observations");
    }
    const Eigen::ArrayXd centered = series.array() - series.mean();
    const double m2 = centered.square().sum() / n;
    if (!(m2 > 0.0)) {
        throw std::invalid_argument("jarque_bera: constant series");
    }
    const double m3 = centered.cube().sum() / n;
    const double m4 = centered.square().square().sum() / n;
    JarqueBeraResult out;
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
    const double excess = out.kurtosis - 3.0;
    out.statistic = n / 6.0 * (out.skewness * out.skewness + excess * excess / 4.0);
    out.reject_normality = out.statistic > jarque_bera_critical_5pct;
    return out;
}

Eigen::VectorXd acf(const Eigen::VectorXd& series, std::size_t n_lags) {
    require_finite(series, "acf");
    const auto n = static_cast<std::size_t>(series.size());
    if (n_lags >= n) {
        throw std::invalid_argument("acf: n_lags must be below the series length");
    }
    const Eigen::VectorXd c = series.array() - series.mean();
    const double denom = c.squaredNorm();
    if (!(denom > 0.0)) {
        throw std::invalid_argument("acf: constant series");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(n_lags + 1));
    out[0] = 1.0;
    for (std::size_t k = 1; k <= n_lags; ++k) {
        const auto len = static_cast<Eigen::Index>(n - k);
        out[static_cast<Eigen::Index>(k)] =
            c.head(len).dot(c.segment(static_cast<Eigen::Index>(k), len)) / denom;
    }
    return out;
}

Eigen::VectorXd pacf(const Eigen::VectorXd& series, std::size_t n_lags) {
    const Eigen::VectorXd r = acf(series, n_lags);
    Eigen::VectorXd out(static_cast<Eigen::Index>(n_lags + 1));
    out[0] = 1.0;
    if (n_lags == 0) {
        return out;
    }
    // Durbin-Levinson: phi holds the AR coefficients of the current order.
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_lags + 1));
    Eigen::VectorXd prev = phi;
    double v = 1.0;
    for (Eigen::Index k = 1; k <= static_cast<Eigen::Index>(n_lags); ++k) {
        double num = r[k];
        for (Eigen::Index j = 1; j < k; ++j) {
            num -= prev[j] * r[k - j];
        }
        const double a = v > 0.0 ? num / v : 0.0;
        phi[k] = a;
        for (Eigen::Index j = 1; j < k; ++j) {
            phi[j] = prev[j] - a * prev[k - j];
        }
        v *= (1.0 - a * a);
        out[k] = a;
        prev = phi;
    }
    return out;
}

std::vector<DiagnosticsRow> diagnose_series(const std::string& name,
                                            const Eigen::VectorXd& series, std::size_t n_lags) {
    std::vector<DiagnosticsRow> rows;
    const AdfResult adf = adf_test(series);
    rows.push_back({"ADF (lags=" + std::to_string(adf.lags) + ")", name, adf.statistic,
                    "5% cv " + fixed(adf.critical_5pct, 3),
                    adf.reject ? "reject unit root" : "fail to reject",
                    adf.reject ? "stationary" : "possible unit root"});
    const JarqueBeraResult jb = jarque_bera(series);
    rows.push_back({"Jarque-Bera", name, jb.statistic,
                    "chi2(2) 5% " + fixed(jarque_bera_critical_5pct, 3),
                    jb.reject_normality ? "reject normality" : "fail to reject",
                    jb.reject_normality ? "non-normal" : "consistent with normal"});
    rows.push_back({"Skewness", name, jb.skewness, "0", "-",
                    jb.skewness < 0.0 ? "left tail heavier" : "right tail heavier"});
    rows.push_back({"Kurtosis", name, jb.kurtosis, "3", "-",
                    jb.kurtosis > 3.0 ? "fat tails" : "thin tails"});
    const std::size_t lags = std::min<std::size_t>(n_lags, static_cast<std::size_t>(series.size()) - 1);
    const Eigen::VectorXd a = acf(series, lags);
    const Eigen::VectorXd p = pacf(series, lags);
    const double band = 1.96 / std::sqrt(static_cast<double>(series.size()));
    for (std::size_t k = 1; k <= lags; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        for (int which = 0; which < 2; ++which) {
            const double v = which == 0 ? a[i] : p[i];
            const bool significant = std::abs(v) > band;
            rows.push_back({std::string(which == 0 ? "ACF" : "PACF") + "(" + std::to_string(k) +
                                ")",
                            name, v, "+-" + fixed(band, 4),
                            significant ? "significant" : "not significant",
                            significant ? "serial dependence" : "no dependence at this lag"});
        }
    }
    return rows;
}

std::string format_diagnostics(const std::vector<DiagnosticsRow>& rows) {
    const std::array<std::string, 6> header{"test", "series", "statistic", "threshold",
                                            "decision", "implication"};
    std::vector<std::array<std::string, 6>> cells;
    cells.reserve(rows.size());
    for (const DiagnosticsRow& r : rows) {
        cells.push_back({r.test, r.series, fixed(r.statistic, 6), r.threshold, r.decision,
                         r.implication});
    }
    std::array<std::size_t, 6> width{};
    for (std::size_t c = 0; c < 6; ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream out;
    auto emit = [&](const std::array<std::string, 6>& row) {
        std::string line;
        for (std::size_t c = 0; c < 6; ++c) {
            std::string cell = row[c];
            if (c + 1 < 6) {
                cell.resize(width[c], ' ');
                cell += "  ";
            }
            line += cell;
        }
        out << line << '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (std::size_t c = 0; c < 6; ++c) {
        total += width[c] + (c + 1 < 6 ? 2 : 0);
    }
    out << std::string(total, '-') << '\n';
    for (const auto& row : cells) {
        emit(row);
    }
    return out.str();
}

}  // namespace qgl
