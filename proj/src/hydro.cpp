#include "eulign/hydro.hpp"

#include <cmath>

namespace eulign {

VectorField source(const GridMask& m, const ScalarField& rho_f, const VectorField& j_f,
                   const PotentialSet& pots, const ModelParams& params) {
    VectorField s(m);
    for (int cell : m.cells) {
        const double rho = rho_f[cell];
        const Vec3 j = j_f.get(cell);
        Vec3 val;
        if (pots.has_alignment)
            val += rho * pots.pi_j.get(cell) - j * pots.pi_rho[cell];
        Vec3 grad_pot;
        if (pots.has_cohesion)
            grad_pot += pots.grad_vc.get(cell);
        if (pots.has_repulsion)
            grad_pot += pots.grad_vr.get(cell);
        if (pots.has_confinement)
            grad_pot += pots.grad_U.get(cell);
        val -= rho * grad_pot;
        if (params.kappa_p != 0.0) {
            const double speed = norm(j) / rho;
            val += params.kappa_p * (1.0 - params.prop(speed)) * j;
        }
        s.set(cell, val);
    }
    return s;
}

VectorField source(const FluidState& state, const PotentialSet& pots,
                   const ModelParams& params) {
    return source(state.mask(), state.rho, state.j, pots, params);
}

namespace {

inline double minmod(double a, double b) {
    if (a * b <= 0.0)
        return 0.0;
    return std::fabs(a) < std::fabs(b) ? a : b;
}

struct CellVars {
    double rho;
    Vec3 j;
};

// One 1D sweep over a maximal run of inside cells along `axis`.
// ext holds [ghost2, ghost1, cells..., ghost1, ghost2].
void sweep_run(const FluidState& state, int axis, const std::vector<int>& run,
               ScalarField& drho, VectorField& dj) {
    const GridMask& m = state.mask();
    const int len = int(run.size());
    const double inv_h = 1.0 / m.h;

    auto mirror = [&](const CellVars& v) {
        CellVars g = v;
        g.j[axis] = -g.j[axis];
        return g;
    };
    std::vector<CellVars> ext(std::size_t(len) + 4);
    for (int i = 0; i < len; ++i)
        ext[std::size_t(i) + 2] = {state.rho[run[std::size_t(i)]],
                                   state.j.get(run[std::size_t(i)])};
    ext[1] = mirror(ext[2]);
    ext[0] = mirror(ext[len >= 2 ? 3 : 2]);
    ext[std::size_t(len) + 2] = mirror(ext[std::size_t(len) + 1]);
    ext[std::size_t(len) + 3] = mirror(ext[len >= 2 ? std::size_t(len) : std::size_t(len) + 1]);

    // minmod slopes for ghost1..ghost1 (indices 1 .. len+2 in ext)
    std::vector<CellVars> slope(std::size_t(len) + 2);
    for (int i = 1; i <= len + 2; ++i) {
        const CellVars& lo = ext[std::size_t(i) - 1];
        const CellVars& mid = ext[std::size_t(i)];
        const CellVars& hi = ext[std::size_t(i) + 1];
        CellVars s;
        s.rho = minmod(mid.rho - lo.rho, hi.rho - mid.rho);
        for (int d = 0; d < 3; ++d)
            s.j[d] = minmod(mid.j[d] - lo.j[d], hi.j[d] - mid.j[d]);
        slope[std::size_t(i) - 1] = s;
    }

    // Faces f = 0..len between ext cells (f+1, f+2); f = 0 and f = len
    // are wall faces.
    double prev_fmass = 0.0;
    Vec3 prev_fmom;
    for (int f = 0; f <= len; ++f) {
        const CellVars& cl = ext[std::size_t(f) + 1];
        const CellVars& cr = ext[std::size_t(f) + 2];
        const CellVars& sl = slope[std::size_t(f)];
        const CellVars& sr = slope[std::size_t(f) + 1];
        CellVars ul{cl.rho + 0.5 * sl.rho, cl.j + 0.5 * sl.j};
        CellVars ur{cr.rho - 0.5 * sr.rho, cr.j - 0.5 * sr.j};
        const double rl = std::max(ul.rho, 1e-300);
        const double rr = std::max(ur.rho, 1e-300);
        const double unl = ul.j[axis] / rl;
        const double unr = ur.j[axis] / rr;
        const double a = std::max(std::fabs(unl), std::fabs(unr));

        double fmass;
        Vec3 fmom = 0.5 * (unl * ul.j + unr * ur.j) - (0.5 * a) * (ur.j - ul.j);
        if (f == 0 || f == len) {
            fmass = 0.0; // non-penetration: zero normal mass flux
        } else {
            fmass = 0.5 * (ul.j[axis] + ur.j[axis]) - 0.5 * a * (ur.rho - ul.rho);
        }

        if (f > 0) {
            const int cell = run[std::size_t(f) - 1];
            drho[cell] -= (fmass - prev_fmass) * inv_h;
            dj.add(cell, (prev_fmom - fmom) * inv_h);
        }
        prev_fmass = fmass;
        prev_fmom = fmom;
    }
}

} // namespace

void hyperbolic_rhs(const FluidState& state, ScalarField& drho, VectorField& dj) {
    const GridMask& m = state.mask();
    drho = ScalarField(m);
    dj = VectorField(m);
    std::vector<int> run;
    run.reserve(std::size_t(std::max({m.nx, m.ny, m.nz})));
    for (int axis = 0; axis < 3; ++axis) {
        // (a, b) indexes the two transverse axes, s sweeps along `axis`.
        const int n0 = axis == 0 ? m.ny : m.nx;
        const int n1 = axis == 2 ? m.ny : m.nz;
        const int extent = axis == 0 ? m.nx : (axis == 1 ? m.ny : m.nz);
        for (int b = 0; b < n1; ++b)
            for (int a = 0; a < n0; ++a) {
                run.clear();
                for (int s = 0; s < extent; ++s) {
                    const int i = axis == 0 ? s : a;
                    const int j = axis == 0 ? a : (axis == 1 ? s : b);
                    const int k = axis == 2 ? s : b;
                    if (m.is_inside(i, j, k)) {
                        run.push_back(m.flat(i, j, k));
                    } else if (!run.empty()) {
                        sweep_run(state, axis, run, drho, dj);
                        run.clear();
                    }
                }
                if (!run.empty())
                    sweep_run(state, axis, run, drho, dj);
            }
    }
}

FluidState apply_bc(const FluidState& state) {
    const GridMask& m = state.mask();
    FluidState out = state;
    const int di[6] = {1, -1, 0, 0, 0, 0};
    const int dj6[6] = {0, 0, 1, -1, 0, 0};
    const int dk[6] = {0, 0, 0, 0, 1, -1};
    for (std::size_t f = 0; f < m.grid_size(); ++f) {
        if (m.is_inside(int(f)))
            continue;
        int i, j, k;
        m.unflat(int(f), i, j, k);
        double rho_sum = 0.0;
        Vec3 j_sum;
        int count = 0;
        for (int d = 0; d < 6; ++d) {
            const int ii = i + di[d], jj = j + dj6[d], kk = k + dk[d];
            if (!m.is_inside(ii, jj, kk))
                continue;
            const int nb = m.flat(ii, jj, kk);
            rho_sum += state.rho[nb];
            Vec3 jn = state.j.get(nb);
            jn[d / 2] = -jn[d / 2]; // negate the face-normal component
            j_sum += jn;
            ++count;
        }
        if (count > 0) {
            out.rho[int(f)] = rho_sum / count;
            out.j.set(int(f), j_sum / double(count));
        }
    }
    return out;
}

double max_signal_speed(const FluidState& state) {
    // sum of per-axis wave speeds: the stability-relevant speed for the
    // unsplit three-axis update
    double s = 0.0;
    for (int cell : state.mask().cells) {
        const double rho = std::max(state.rho[cell], 1e-300);
        const Vec3 j = state.j.get(cell);
        s = std::max(s, (std::fabs(j.x) + std::fabs(j.y) + std::fabs(j.z)) / rho);
    }
    return s;
}

namespace {

void enforce_floor(FluidState& state, double floor, StepDiagnostics* diag) {
    const GridMask& m = state.mask();
    double added = 0.0;
    for (int cell : m.cells) {
        if (state.rho[cell] < floor) {
            added += (floor - state.rho[cell]) * m.cell_volume();
            state.rho[cell] = floor;
        }
    }
    if (diag) {
        diag->floor_mass_added += added;
        if (added > 1e-12)
            diag->vacuum_warning = true;
    }
}

void stage_rhs(const FluidState& state, const ModelParams& params, ConvolutionEngine& engine,
               ScalarField& drho, VectorField& dj) {
    hyperbolic_rhs(state, drho, dj);
    const PotentialSet pots =
        potentials(state.mask(), state.rho, state.j, params.kernels, params.conf, engine);
    const VectorField s = source(state, pots, params);
    for (int cell : state.mask().cells)
        dj.add(cell, s.get(cell));
}

} // namespace

FluidState step(const FluidState& state, const ModelParams& params,
                const SolverOptions& options, ConvolutionEngine& engine, double dt,
                StepDiagnostics* diag) {
    const GridMask& m = state.mask();
    const double floor = options.effective_floor(m);
    const double speed = max_signal_speed(state) + 1e-12;
    if (dt > options.cfl * m.h / speed)
        throw StepSizeError("step: dt violates the CFL bound");

    ScalarField drho;
    VectorField dj;
    stage_rhs(state, params, engine, drho, dj);

    FluidState mid(m);
    mid.t = state.t + dt;
    for (int cell : m.cells) {
        mid.rho[cell] = state.rho[cell] + dt * drho[cell];
        mid.j.set(cell, state.j.get(cell) + dt * dj.get(cell));
    }
    enforce_floor(mid, floor, diag);

    stage_rhs(mid, params, engine, drho, dj);

    FluidState out(m);
    out.t = state.t + dt;
    for (int cell : m.cells) {
        out.rho[cell] = 0.5 * (state.rho[cell] + mid.rho[cell] + dt * drho[cell]);
        out.j.set(cell, 0.5 * (state.j.get(cell) + mid.j.get(cell) + dt * dj.get(cell)));
    }
    enforce_floor(out, floor, diag);
    return out;
}

} // namespace eulign
