#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qgl {

struct AdfResult {
    double statistic = 0.0;
    double critical_1pct = 0.0;
    double critical_5pct = 0.0;
    double critical_10pct = 0.0;
    bool reject = false;  ///< statistic below the 5% critical value
    std::size_t lags = 0;
    std::size_t nobs = 0;  ///< rows in the test regression
};

/// Schwert rule floor(12 (n/100)^{1/4}), capped so the regression keeps
/// at least half the sample.
[[nodiscard]] std::size_t default_adf_lags(std::size_t n);

/**
 * @brief Augmented Dickey-Fuller test with a constant.
 *
 * Regresses dy_t on y_{t-1}, dy_{t-1..t-max_lag} and a constant over the
 * n - 1 - max_lag usable rows; the statistic is the t-ratio of the y_{t-1}
 * coefficient. Critical values come from a constant-case table interpolated
 * linearly in 1/nobs. Throws std::invalid_argument when n <= max_lag + 2 or the
 * data are non-finite, std::runtime_error on a singular regression.
 */
[[nodiscard]] AdfResult adf_test(const Eigen::VectorXd& series,
                                 std::optional<std::size_t> max_lag = std::nullopt);

struct JarqueBeraResult {
    double statistic = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;  ///< non-excess
    bool reject_normality = false;
};

/// Chi-square(2) 5% critical value used by jarque_bera.
inline constexpr double jarque_bera_critical_5pct = 5.991;

/// n/6 (S^2 + (K-3)^2/4) with 1/n central moments. Throws for n < 8 or zero variance.
[[nodiscard]] JarqueBeraResult jarque_bera(const Eigen::VectorXd& series);

/// Sample autocorrelations for lags 0..n_lags (lag 0 is 1). Throws for a
/// constant series or n_lags >= length.
[[nodiscard]] Eigen::VectorXd acf(const Eigen::VectorXd& series, std::size_t n_lags);

/// Partial autocorrelations for lags 0..n_lags by Durbin-Levinson on acf().
[[nodiscard]] Eigen::VectorXd pacf(const Eigen::VectorXd& series, std::size_t n_lags);

struct DiagnosticsRow {
    std::string test;
    std::string series;
    double statistic = 0.0;
    std::string threshold;
    std::string decision;
    std::string implication;
};

/// Standard battery on one series: ADF, Jarque-Bera, and ACF/PACF for lags 1..n_lags
/// judged against the +-1.96/sqrt(n) band.
[[nodiscard]] std::vector<DiagnosticsRow> diagnose_series(const std::string& name,
                                                          const Eigen::VectorXd& series,
                                                          std::size_t n_lags = 5);

/// Aligned plain-text table with a header row and a rule line.
[[nodiscard]] std::string format_diagnostics(const std::vector<DiagnosticsRow>& rows);

}  // namespace qgl
