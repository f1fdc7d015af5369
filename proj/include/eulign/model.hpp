#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eulign/vec3.hpp"

namespace eulign {

enum class KernelFamily { Yukawa, Bessel };
enum class KernelRole { Alignment, Cohesion, Repulsion };

/// Interaction kernel parameters. Yukawa: k e^{-lambda r} / r with
/// screening rate lambda > 0. Bessel: k G_lambda(r) with real order
/// lambda >= 2 (G_lambda built on the modified Bessel function of the
/// second kind). Role fixes the admissible sign of k: alignment and
/// repulsion need k > 0, cohesion k < 0.
struct KernelSpec {
    KernelFamily family{KernelFamily::Yukawa};
    double k{1.0};
    double lambda{1.0};
    KernelRole role{KernelRole::Alignment};
};

std::vector<std::string> validate_kernel(const KernelSpec& spec, const std::string& key);

struct KernelTriple {
    std::optional<KernelSpec> alignment;
    std::optional<KernelSpec> cohesion;
    std::optional<KernelSpec> repulsion;
};

/// Self-propulsion speed profile P. The default rational profile
/// P(s) = 2 (s/s_eq)^2 / (1 + (s/s_eq)^2) is nondecreasing, has
/// P(s_eq) = 1 (so s_eq is the equilibrium speed) and keeps
/// v (1 - P(|v|)) globally Lipschitz.
struct PropulsionProfile {
    double s_eq{1.0};

    double operator()(double s) const {
        const double r = s / s_eq;
        return 2.0 * r * r / (1.0 + r * r);
    }
};

/// Confinement potential: an optional quadratic well plus Gaussian
/// leader wells (populated only in coupled runs).
///   U(x) = 1/2 omega^2 |x - c|^2 - A sum_i exp(-|x - xi_i|^2 / (2 sigma^2))
struct Confinement {
    bool quadratic{false};
    double omega{0.0};
    Vec3 center;
    double well_amplitude{0.0}; // A
    double well_sigma{0.2};     // sigma
    std::vector<Vec3> well_centers;

    bool active() const { return quadratic || !well_centers.empty(); }

    double value(const Vec3& x) const {
        double u = 0.0;
        if (quadratic) {
            const Vec3 d = x - center;
            u += 0.5 * omega * omega * dot(d, d);
        }
        for (const Vec3& xi : well_centers) {
            const Vec3 d = x - xi;
            u -= well_amplitude * std::exp(-dot(d, d) / (2.0 * well_sigma * well_sigma));
        }
        return u;
    }

    Vec3 gradient(const Vec3& x) const {
        Vec3 g;
        if (quadratic)
            g += (x - center) * (omega * omega);
        const double s2 = well_sigma * well_sigma;
        for (const Vec3& xi : well_centers) {
            const Vec3 d = x - xi;
            g += d * (well_amplitude / s2 * std::exp(-dot(d, d) / (2.0 * s2)));
        }
        return g;
    }
};

/// Model parameters shared by the particle and fluid tiers.
struct ModelParams {
    KernelTriple kernels;
    double kappa_p{0.0};
    PropulsionProfile prop;
    Confinement conf;
    std::uint64_t seed{0};
};

/// Sampled checks on the propulsion profile: P nondecreasing on [0, s_max]
/// at 10^3 points and the map v -> v (1 - P(|v|)) with finite difference
/// quotients. Returns violations (empty when fine).
std::vector<std::string> validate_model_params(const ModelParams& params, double s_max = 10.0);

} // namespace eulign
