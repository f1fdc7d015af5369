#include "eulign/particles.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "eulign/kernels.hpp"
#include "eulign/rng.hpp"

namespace eulign {

Vec3 pairwise_acceleration(const ParticleEnsemble& ensemble, const ModelParams& params,
                           std::size_t i) {
    const std::size_t n = ensemble.size();
    if (n < 2)
        throw PreconditionError("pairwise_acceleration: needs at least two particles");
    const double inv = 1.0 / double(n - 1);
    Vec3 acc;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i)
            continue;
        const Vec3 d = ensemble.x[i] - ensemble.x[j];
        const double r = norm(d);
        if (r < 1e-12) {
            std::ostringstream msg;
            msg << "pairwise_acceleration: particles " << i << " and " << j
                << " closer than 1e-12";
            throw SingularityError(msg.str());
        }
        if (params.kernels.alignment)
            acc += kernel_eval(*params.kernels.alignment, r) * (ensemble.v[j] - ensemble.v[i]);
        if (params.kernels.cohesion)
            acc -= kernel_grad(*params.kernels.cohesion, d);
        if (params.kernels.repulsion)
            acc -= kernel_grad(*params.kernels.repulsion, d);
    }
    return acc * inv;
}

Vec3 propulsion(const Vec3& v, double kappa_p, const PropulsionProfile& P) {
    return v * (kappa_p * (1.0 - P(norm(v))));
}

Vec3 confinement(const Vec3& x, const ModelParams& params) {
    return -params.conf.gradient(x);
}

ParticleEnsemble step(const DomainSpec& domain, const ParticleEnsemble& ensemble,
                      const ModelParams& params, double dt) {
    if (dt <= 0.0)
        throw PreconditionError("step: dt must be positive");
    const std::size_t n = ensemble.size();
    double vmax = 0.0;
    for (const Vec3& v : ensemble.v)
        vmax = std::max(vmax, norm(v));
    if (dt * vmax > domain.diagonal() / 4.0)
        throw StepSizeError("step: dt max|v| exceeds diagonal / 4");

    const bool pairwise = n >= 2 && (params.kernels.alignment || params.kernels.cohesion ||
                                     params.kernels.repulsion);

    std::vector<Vec3> acc(n);
    std::atomic<long long> first_singular{-1};
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < (long long)n; ++ii) {
        const std::size_t i = std::size_t(ii);
        Vec3 a;
        if (pairwise) {
            try {
                a = pairwise_acceleration(ensemble, params, i);
            } catch (const SingularityError&) {
                long long expected = -1;
                first_singular.compare_exchange_strong(expected, ii);
                continue;
            }
        }
        a += propulsion(ensemble.v[i], params.kappa_p, params.prop);
        a += confinement(ensemble.x[i], params);
        acc[i] = a;
    }
    if (first_singular.load() >= 0) {
        // rethrow with indices from the serial path
        pairwise_acceleration(ensemble, params, std::size_t(first_singular.load()));
    }

    ParticleEnsemble out;
    out.t = ensemble.t + dt;
    out.x.resize(n);
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 v = ensemble.v[i] + acc[i] * dt;
        Vec3 x = ensemble.x[i];
        double remaining = dt;
        int reflections = 0;
        while (remaining > 0.0) {
            const auto hit = first_boundary_hit(domain, x, v, remaining);
            if (!hit) {
                x += v * remaining;
                break;
            }
            if (++reflections > 8) {
                std::ostringstream msg;
                msg << "step: particle " << i << " exceeded 8 reflections in one step";
                throw StepSizeError(msg.str());
            }
            x = hit->point;
            v = reflect(v, hit->normal);
            remaining -= hit->t;
        }
        out.x[i] = x;
        out.v[i] = v;
    }
    return out;
}

std::pair<ScalarField, VectorField> deposit(const ParticleEnsemble& ensemble,
                                            const GridMask& mask) {
    ScalarField rho(mask);
    VectorField mom(mask);
    const std::size_t n = ensemble.size();
    const double w = 1.0 / double(n);

    for (std::size_t p = 0; p < n; ++p) {
        const Vec3 g = (ensemble.x[p] - mask.origin) / mask.h - Vec3{0.5, 0.5, 0.5};
        int base[3];
        double frac[3];
        for (int d = 0; d < 3; ++d) {
            base[d] = int(std::floor(g[d]));
            frac[d] = g[d] - base[d];
        }
        for (int dz = 0; dz <= 1; ++dz)
            for (int dy = 0; dy <= 1; ++dy)
                for (int dx = 0; dx <= 1; ++dx) {
                    const double weight = w * (dx ? frac[0] : 1.0 - frac[0]) *
                                          (dy ? frac[1] : 1.0 - frac[1]) *
                                          (dz ? frac[2] : 1.0 - frac[2]);
                    const int i = std::clamp(base[0] + dx, 0, mask.nx - 1);
                    const int j = std::clamp(base[1] + dy, 0, mask.ny - 1);
                    const int k = std::clamp(base[2] + dz, 0, mask.nz - 1);
                    const int cell = mask.flat(i, j, k);
                    rho[cell] += weight;
                    mom.add(cell, ensemble.v[p] * weight);
                }
    }

    // Fold boundary-overlapping weights into the nearest inside cell.
    for (std::size_t f = 0; f < mask.grid_size(); ++f) {
        if (mask.is_inside(int(f)) || rho.v[f] == 0.0)
            continue;
        const int target = mask.nearest_inside[f];
        rho[target] += rho.v[f];
        mom.add(target, mom.get(int(f)));
        rho.v[f] = 0.0;
        mom.set(int(f), Vec3{});
    }

    const double inv_vol = 1.0 / mask.cell_volume();
    for (int cell : mask.cells) {
        rho[cell] *= inv_vol;
        mom.set(cell, mom.get(cell) * inv_vol);
    }
    return {std::move(rho), std::move(mom)};
}

ParticleEnsemble sample_initial(const DomainSpec& domain, std::size_t count,
                                const DensityProfile& density, const VelocityInit& velocity,
                                std::uint64_t seed) {
    ParticleEnsemble ens;
    ens.x.resize(count);
    ens.v.resize(count);
    const CounterRng pos_rng(seed, 0);
    const CounterRng vel_rng(seed, 1);
    const Vec3 ext = domain.extent();
    const double bound = density.upper_bound();
    constexpr int max_attempts = 4096;

    for (std::size_t p = 0; p < count; ++p) {
        bool placed = false;
        for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
            const std::uint64_t c0 = (std::uint64_t(p) * max_attempts + std::uint64_t(attempt)) * 4;
            const Vec3 cand = domain.box_min + Vec3{pos_rng.uniform(c0) * ext.x,
                                                    pos_rng.uniform(c0 + 1) * ext.y,
                                                    pos_rng.uniform(c0 + 2) * ext.z};
            if (signed_distance(domain, cand) >= 0.0)
                continue;
            if (pos_rng.uniform(c0 + 3) * bound > density.value(cand))
                continue;
            ens.x[p] = cand;
            placed = true;
        }
        if (!placed)
            throw ConfigError("sample_initial: rejection sampling failed (density too peaked?)");
        if (velocity.kind == VelocityInit::Kind::Monokinetic) {
            ens.v[p] = velocity.profile.value(ens.x[p]);
        } else {
            ens.v[p] = velocity.mean + Vec3{velocity.stddev * vel_rng.normal(3 * p),
                                            velocity.stddev * vel_rng.normal(3 * p + 1),
                                            velocity.stddev * vel_rng.normal(3 * p + 2)};
        }
    }
    return ens;
}

} // namespace eulign
