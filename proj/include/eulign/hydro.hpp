#pragma once

#include "eulign/field.hpp"
#include "eulign/kernels.hpp"
#include "eulign/model.hpp"

namespace eulign {

struct SolverOptions {
    double cfl{0.45};
    double floor{0.0}; // 0 = auto: 1e-10 / l(D)
    int ghost_depth{2};
    int rk_stages{2};

    double effective_floor(const GridMask& mask) const {
        return floor > 0.0 ? floor : 1e-10 / mask.volume();
    }
};

/// Cell-centered fluid state: density rho (total mass 1) and momentum
/// density j on the mask; both zero on outside cells.
struct FluidState {
    double t{0.0};
    ScalarField rho;
    VectorField j;

    FluidState() = default;
    explicit FluidState(const GridMask& m) : rho(m), j(m) {}
    const GridMask& mask() const { return *rho.mask; }
};

/// Momentum source of the augmented system, evaluated cellwise:
///   S = rho pi_j[j] - j pi_rho[rho] - rho grad(v_c + v_r + U)
///       + kappa_p j (1 - P(|j|/rho)).
VectorField source(const GridMask& mask, const ScalarField& rho, const VectorField& j,
                   const PotentialSet& pots, const ModelParams& params);
VectorField source(const FluidState& state, const PotentialSet& pots,
                   const ModelParams& params);

/// Finite-volume divergence of the pressureless fluxes (j, rho^{-1} j j^T)
/// with minmod-limited reconstruction and a local Lax-Friedrichs
/// (Rusanov) interface flux. Wall faces use mirrored ghost states, and
/// the wall mass flux is exactly zero. Outputs are time derivatives.
void hyperbolic_rhs(const FluidState& state, ScalarField& drho, VectorField& dj);

/// Populates outside cells adjacent to the interior with mirrored ghost
/// values: density copies the interior neighbor, momentum copies it with
/// the face-normal component negated (non-penetration). Cells touching
/// several interior faces average the candidates.
FluidState apply_bc(const FluidState& state);

/// max over inside cells of sum_d |j_d / rho|: the stability-relevant
/// signal speed of the unsplit three-axis update.
double max_signal_speed(const FluidState& state);

struct StepDiagnostics {
    double floor_mass_added{0.0};
    bool vacuum_warning{false};
};

/// One SSP-RK2 step combining hyperbolic_rhs and source; potentials are
/// recomputed at each stage. The density floor is enforced with the added
/// mass accounted in `diag`. Throws StepSizeError when dt violates
/// cfl * h / max(|u| + eps).
FluidState step(const FluidState& state, const ModelParams& params,
                const SolverOptions& options, ConvolutionEngine& engine, double dt,
                StepDiagnostics* diag = nullptr);

} // namespace eulign
