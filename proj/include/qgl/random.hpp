#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qgl {

/**
 * @brief Seeded generator whose draws are identical across standard libraries.
 *
 * The engine sequence of std::mt19937_64 is fixed by the standard but the
 * std distributions are not, so the conversions are done here: uniforms from
 * the top 53 bits and normals by Box-Muller.
 */
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Student t with an integer number of degrees of freedom.
    double student_t(int dof) {
        const double z = normal();
        double chi2 = 0.0;
        for (int i = 0; i < dof; ++i) {
            const double v = normal();
            chi2 += v * v;
        }
        return z / std::sqrt(chi2 / static_cast<double>(dof));
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qgl
