#pragma once

#include <vector>

#include "eulign/hydro.hpp"

namespace eulign {

struct EnergyComponents {
    double kinetic{0.0};     // 1/2 int rho^{-1} |j|^2
    double interaction{0.0}; // 1/2 int rho (v_r + v_c)
    double total() const { return kinetic + interaction; }
};

/// Energy integrals by midpoint quadrature over inside cells.
EnergyComponents energy(const FluidState& state, const PotentialSet& pots);

struct EnergyRhs {
    double alignment{0.0};   // int j . pi_j - rho^{-1} |j|^2 pi_rho
    double confinement{0.0}; // -int j . grad U (sign of the implemented source)
    double propulsion{0.0};  // kappa_p int rho^{-1} |j|^2 (1 - P)
    double total() const { return alignment + confinement + propulsion; }
};

/// Right-hand side of the energy balance for the implemented source.
EnergyRhs energy_rhs(const FluidState& state, const PotentialSet& pots,
                     const ModelParams& params);

struct EnergySample {
    double t{0.0};
    double kinetic{0.0};
    double interaction{0.0};
    double rhs_alignment{0.0};
    double rhs_confinement{0.0};
    double rhs_propulsion{0.0};
    double slack{0.0}; // int_{t0}^{t} rhs - [E(t) - E(t0)]
};

struct EnergyReport {
    std::vector<EnergySample> rows;
    double tol{0.0};
    double min_slack{0.0};
    bool pass{false};
};

/// Evaluates the relaxed energy inequality along a uniformly sampled
/// trajectory: slack(tau) >= -tol must hold at every sample, with
/// tol = c_tol (h + dt) * (run scale). Throws ArgumentError for fewer
/// than 3 samples.
EnergyReport check_inequality(const std::vector<FluidState>& trajectory,
                              const ModelParams& params, ConvolutionEngine& engine,
                              double c_tol = 10.0);

/// Relative energy 1/2 int rho_a |j_a/rho_a - j_b/rho_b|^2. The density
/// weight comes from the first argument (the "weak" candidate). Throws
/// ArgumentError on mask or time mismatch.
double relative_energy(const FluidState& a, const FluidState& b);

struct GronwallResult {
    double c_fit{0.0};
    bool pass{false};
    double max_ratio{0.0}; // max over samples of E(t) / bound(t)
};

/// Fits log E against t and verifies E(t) <= E(t0) e^{c_fit (t-t0)} * 1.1.
/// When E(t0) <= atol the series must stay below atol e^{c_cfg (t-t0)}
/// (zero initial relative energy stays zero). Throws ArgumentError for
/// non-monotone times or fewer than 5 samples.
GronwallResult gronwall_check(const std::vector<double>& times, const std::vector<double>& E,
                              double atol = 1e-12, double c_cfg = 10.0);

} // namespace eulign
