#pragma once

#include <cmath>

#include "eulign/vec3.hpp"

namespace eulign {

/// Analytic initial-density shape, normalized later on the mask.
/// gaussian: baseline + exp(-|x-c|^2 / (2 sigma^2)); uniform: 1.
struct DensityProfile {
    enum class Kind { Uniform, Gaussian };
    Kind kind{Kind::Uniform};
    Vec3 center;
    double sigma{0.2};
    double baseline{0.1};

    double value(const Vec3& x) const {
        if (kind == Kind::Uniform)
            return 1.0;
        const Vec3 d = x - center;
        return baseline + std::exp(-dot(d, d) / (2.0 * sigma * sigma));
    }
    double upper_bound() const { return kind == Kind::Uniform ? 1.0 : baseline + 1.0; }
};

/// Analytic initial velocity u0(x): a constant plus an optional localized
/// swirl exp(-|x-c|^2/(2 sigma^2)) (e_axis x (x-c)), plus a delta-scaled
/// perturbation of the same shape (used for relative-energy studies,
/// where E(t0) then scales exactly like delta^2).
struct VelocityProfile {
    Vec3 constant;
    double swirl_amp{0.0};
    Vec3 swirl_center;
    double swirl_sigma{0.2};
    int swirl_axis{2};
    double perturb_delta{0.0};
    Vec3 perturb_center;
    double perturb_sigma{0.2};
    int perturb_axis{2};

    static Vec3 swirl(const Vec3& x, const Vec3& c, double sigma, int axis) {
        const Vec3 d = x - c;
        Vec3 e;
        e[axis] = 1.0;
        return std::exp(-dot(d, d) / (2.0 * sigma * sigma)) * cross(e, d);
    }

    Vec3 value(const Vec3& x) const {
        Vec3 u = constant;
        if (swirl_amp != 0.0)
            u += swirl_amp * swirl(x, swirl_center, swirl_sigma, swirl_axis);
        if (perturb_delta != 0.0)
            u += perturb_delta * swirl(x, perturb_center, perturb_sigma, perturb_axis);
        return u;
    }
};

} // namespace eulign
