#include "eulign/energy.hpp"

#include <cmath>

namespace eulign {

EnergyComponents energy(const FluidState& state, const PotentialSet& pots) {
    const GridMask& m = state.mask();
    EnergyComponents e;
    for (int cell : m.cells) {
        const double rho = state.rho[cell];
        const Vec3 j = state.j.get(cell);
        e.kinetic += 0.5 * dot(j, j) / rho;
        double pot = 0.0;
        if (pots.has_repulsion)
            pot += pots.v_r[cell];
        if (pots.has_cohesion)
            pot += pots.v_c[cell];
        e.interaction += 0.5 * rho * pot;
    }
    e.kinetic *= m.cell_volume();
    e.interaction *= m.cell_volume();
    return e;
}

EnergyRhs energy_rhs(const FluidState& state, const PotentialSet& pots,
                     const ModelParams& params) {
    const GridMask& m = state.mask();
    EnergyRhs r;
    for (int cell : m.cells) {
        const double rho = state.rho[cell];
        const Vec3 j = state.j.get(cell);
        const double j2_over_rho = dot(j, j) / rho;
        if (pots.has_alignment)
            r.alignment += dot(j, pots.pi_j.get(cell)) - j2_over_rho * pots.pi_rho[cell];
        if (pots.has_confinement)
            r.confinement -= dot(j, pots.grad_U.get(cell));
        if (params.kappa_p != 0.0)
            r.propulsion += params.kappa_p * j2_over_rho * (1.0 - params.prop(norm(j) / rho));
    }
    const double vol = m.cell_volume();
    r.alignment *= vol;
    r.confinement *= vol;
    r.propulsion *= vol;
    return r;
}

EnergyReport check_inequality(const std::vector<FluidState>& trajectory,
                              const ModelParams& params, ConvolutionEngine& engine,
                              double c_tol) {
    if (trajectory.size() < 3)
        throw ArgumentError("check_inequality: need at least 3 samples");
    const GridMask& m = trajectory.front().mask();

    EnergyReport report;
    report.rows.reserve(trajectory.size());
    for (const FluidState& state : trajectory) {
        const PotentialSet pots =
            potentials(m, state.rho, state.j, params.kernels, params.conf, engine);
        const EnergyComponents e = energy(state, pots);
        const EnergyRhs r = energy_rhs(state, pots, params);
        report.rows.push_back({state.t, e.kinetic, e.interaction, r.alignment, r.confinement,
                               r.propulsion, 0.0});
    }

    double rhs_integral = 0.0;
    const double e0 = report.rows.front().kinetic + report.rows.front().interaction;
    double scale = 0.0, max_rhs = 0.0;
    for (std::size_t s = 0; s < report.rows.size(); ++s) {
        EnergySample& row = report.rows[s];
        if (s > 0) {
            const EnergySample& prev = report.rows[s - 1];
            const double dt = row.t - prev.t;
            const double rhs_prev = prev.rhs_alignment + prev.rhs_confinement + prev.rhs_propulsion;
            const double rhs_cur = row.rhs_alignment + row.rhs_confinement + row.rhs_propulsion;
            rhs_integral += 0.5 * dt * (rhs_prev + rhs_cur);
        }
        row.slack = rhs_integral - ((row.kinetic + row.interaction) - e0);
        scale = std::max(scale, std::fabs(row.kinetic) + std::fabs(row.interaction));
        max_rhs = std::max(max_rhs,
                           std::fabs(row.rhs_alignment + row.rhs_confinement + row.rhs_propulsion));
    }
    const double horizon = report.rows.back().t - report.rows.front().t;
    scale += horizon * max_rhs + 1e-30;
    const double dt_sample = horizon / double(trajectory.size() - 1);
    report.tol = c_tol * (m.h + dt_sample) * scale;
    report.min_slack = report.rows.front().slack;
    for (const EnergySample& row : report.rows)
        report.min_slack = std::min(report.min_slack, row.slack);
    report.pass = report.min_slack >= -report.tol;
    return report;
}

double relative_energy(const FluidState& a, const FluidState& b) {
    if (!a.mask().compatible(b.mask()))
        throw ArgumentError("relative_energy: states live on different masks");
    if (std::fabs(a.t - b.t) > 1e-9 * (1.0 + std::fabs(a.t)))
        throw ArgumentError("relative_energy: states at different times");
    const GridMask& m = a.mask();
    double e = 0.0;
    for (int cell : m.cells) {
        const Vec3 du = a.j.get(cell) / a.rho[cell] - b.j.get(cell) / b.rho[cell];
        e += a.rho[cell] * dot(du, du);
    }
    return 0.5 * e * m.cell_volume();
}

GronwallResult gronwall_check(const std::vector<double>& times, const std::vector<double>& E,
                              double atol, double c_cfg) {
    if (times.size() != E.size() || times.size() < 5)
        throw ArgumentError("gronwall_check: need at least 5 matching samples");
    for (std::size_t s = 1; s < times.size(); ++s)
        if (times[s] <= times[s - 1])
            throw ArgumentError("gronwall_check: times must be strictly increasing");

    GronwallResult res;
    const double t0 = times.front();
    const double e0 = E.front();

    if (e0 <= atol) {
        // Zero initial relative energy must stay (numerically) zero.
        res.c_fit = 0.0;
        res.max_ratio = 0.0;
        res.pass = true;
        for (std::size_t s = 0; s < E.size(); ++s) {
            const double bound = atol * std::exp(c_cfg * (times[s] - t0));
            res.max_ratio = std::max(res.max_ratio, E[s] / bound);
            if (E[s] > bound)
                res.pass = false;
        }
        return res;
    }

    // Least squares of log E against t over positive samples.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < E.size(); ++s) {
        if (E[s] <= 0.0)
            continue;
        const double x = times[s] - t0;
        const double y = std::log(E[s]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    const double denom = double(count) * sxx - sx * sx;
    res.c_fit = denom != 0.0 ? (double(count) * sxy - sx * sy) / denom : 0.0;

    res.pass = true;
    res.max_ratio = 0.0;
    for (std::size_t s = 0; s < E.size(); ++s) {
        const double bound = e0 * std::exp(res.c_fit * (times[s] - t0)) * 1.1;
        res.max_ratio = std::max(res.max_ratio, E[s] / bound);
        if (E[s] > bound)
            res.pass = false;
    }
    return res;
}

} // namespace eulign
