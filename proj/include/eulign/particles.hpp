#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "eulign/field.hpp"
#include "eulign/model.hpp"
#include "eulign/profiles.hpp"

namespace eulign {

/// State of the N-particle system. Positions stay in cl D; velocities
/// are unconstrained.
struct ParticleEnsemble {
    std::vector<Vec3> x;
    std::vector<Vec3> v;
    double t{0.0};

    std::size_t size() const { return x.size(); }
};

/// Sum of the alignment, cohesion and repulsion forces on particle i.
/// Cohesion and repulsion enter as negative kernel gradients (the
/// hydrodynamic sign convention), so k_c < 0 attracts and k_r > 0 repels.
/// Throws SingularityError when a pair is closer than 1e-12.
Vec3 pairwise_acceleration(const ParticleEnsemble& ensemble, const ModelParams& params,
                           std::size_t i);

/// Self-propulsion kappa_p v (1 - P(|v|)).
Vec3 propulsion(const Vec3& v, double kappa_p, const PropulsionProfile& P);

/// Confinement force -grad U(x).
Vec3 confinement(const Vec3& x, const ModelParams& params);

/// One semi-implicit Euler step: velocities from accelerations at the
/// current state, then positions advanced with the new velocities,
/// specularly reflecting on each boundary crossing (at most 8 per
/// particle per step). Guard: dt max|v| <= diagonal / 4.
ParticleEnsemble step(const DomainSpec& domain, const ParticleEnsemble& ensemble,
                      const ModelParams& params, double dt);

/// Cloud-in-cell deposition of (1/N, v_i/N) weights onto the mask,
/// divided by h^3. Weights spilling onto outside cells are folded into
/// the nearest inside cell, so total mass is exactly 1 up to rounding.
std::pair<ScalarField, VectorField> deposit(const ParticleEnsemble& ensemble,
                                            const GridMask& mask);

struct VelocityInit {
    enum class Kind { Monokinetic, Gaussian };
    Kind kind{Kind::Monokinetic};
    VelocityProfile profile; // monokinetic: v = u0(x)
    Vec3 mean;               // gaussian parameters
    double stddev{0.1};
};

/// Rejection-samples positions from the density profile restricted to D
/// and assigns velocities; fully determined by (seed, index) through the
/// counter RNG, so results do not depend on threading.
ParticleEnsemble sample_initial(const DomainSpec& domain, std::size_t count,
                                const DensityProfile& density, const VelocityInit& velocity,
                                std::uint64_t seed);

} // namespace eulign
