#pragma once

#include <string_view>

namespace qgl::testing {

/// Values computed once with statsmodels 0.14.6 (adfuller with a constant and a
/// fixed lag order, jarque_bera) on the series from diagnostics_cases().
struct ReferenceStats {
    std::string_view name;
    double adf_statistic;
    double adf_critical_5pct;
    double jb_statistic;
    double skewness;
    double kurtosis;
};

inline constexpr ReferenceStats reference_stats[] = {
    {"noise", -15.6378937351, -2.867361, 0.612006633378, 0.023827076627, 2.83536282291},
    {"random_walk", -0.7221418686, -2.867361, 20.9485589555, -0.0730314890683, 2.00793325009},
    {"ar1_half", -7.6740832663, -2.871321, 0.382217469765, 0.0868181266943, 2.9793154867},
    {"ar1_high", -4.8794776609, -2.868885, 13.6064382586, -0.188718389152, 3.82093104089},
    {"student_t3", -22.6246498264, -2.867350, 1125.27520312, 1.15126005258, 9.97937038099},
    {"normal_cubed", -16.6736526777, -2.864446, 29132.665502, 0.366182849166, 29.4319430336},
    {"short_walk", -0.7518176938, -2.876556, 20.5002039754, -0.290579388719, 1.54319563686},
    {"ar1_negative", -11.8710614005, -2.873266, 0.238599865713, -0.0578258608697, 3.09762308317},
    {"scaled_t5", -7.0710999780, -2.881410, 91.2765816518, 0.976651643946, 6.2846399087},
    {"drifting_walk", -1.3558618113, -2.866426, 24.8327430229, 0.372528616047, 2.33803365507},
};

}  // namespace qgl::testing
