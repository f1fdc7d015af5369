#include "eulign/leaders.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eulign/rng.hpp"

namespace eulign {

std::vector<std::string> validate_schedules(const LeaderSet& set, double t0, double tf) {
    std::vector<std::string> errs;
    const double tol = 1e-9 * std::max(1.0, tf - t0);
    for (std::size_t i = 0; i < set.leaders.size(); ++i) {
        const auto& sched = set.leaders[i].schedule;
        std::ostringstream key;
        key << "leaders." << (i + 1) << ".control";
        if (sched.empty()) {
            errs.push_back(key.str() + ": empty schedule");
            continue;
        }
        if (sched.front().t_begin > t0 + tol || sched.back().t_end < tf - tol)
            errs.push_back(key.str() + ": schedule does not cover [t0, t_f]");
        for (std::size_t p = 0; p + 1 < sched.size(); ++p)
            if (std::fabs(sched[p].t_end - sched[p + 1].t_begin) > tol)
                errs.push_back(key.str() + ": gap or overlap between pieces");
        for (const ControlPiece& p : sched)
            if (p.t_end <= p.t_begin)
                errs.push_back(key.str() + ": piece with nonpositive length");
    }
    return errs;
}

Region leader_region(const DomainSpec& domain, double margin) {
    return {domain.box_min + Vec3{margin, margin, margin},
            domain.box_max - Vec3{margin, margin, margin}};
}

namespace {

// quartic ramp: 0 for s <= 0, s^4 beyond
inline double ramp4(double s) { return s > 0.0 ? s * s * s * s : 0.0; }
inline double dramp4(double s) { return s > 0.0 ? 4.0 * s * s * s : 0.0; }

} // namespace

double BarrierSpec::value(const Region& r, const Vec3& p) const {
    double w = 0.0;
    for (int d = 0; d < 3; ++d) {
        w += ramp4((p[d] - (r.hi[d] - width)) / width);
        w += ramp4(((r.lo[d] + width) - p[d]) / width);
    }
    return strength * w;
}

Vec3 BarrierSpec::gradient(const Region& r, const Vec3& p) const {
    Vec3 g;
    for (int d = 0; d < 3; ++d) {
        g[d] += strength * dramp4((p[d] - (r.hi[d] - width)) / width) / width;
        g[d] -= strength * dramp4(((r.lo[d] + width) - p[d]) / width) / width;
    }
    return g;
}

Vec3 leader_force(const LeaderForceSpec& spec, const Region& region, const Vec3& xi,
                  const Vec3& upsilon, const Vec3& f, const VectorField* grad_rho) {
    Vec3 F = f - spec.gamma * upsilon - spec.barrier.gradient(region, xi);
    if (spec.feedback_gain != 0.0 && grad_rho != nullptr)
        F += spec.feedback_gain * interpolate(*grad_rho, xi);
    return F;
}

namespace {

const ControlPiece* find_piece(const std::vector<ControlPiece>& sched, double t, double tol) {
    for (const ControlPiece& p : sched)
        if (t >= p.t_begin - tol && t < p.t_end - tol)
            return &p;
    if (!sched.empty() && t >= sched.back().t_end - tol)
        return &sched.back(); // endpoint of the final piece
    return nullptr;
}

struct PhaseState {
    Vec3 xi, upsilon;
};

PhaseState rk4_substep(const PhaseState& y0, const Vec3& f, const LeaderForceSpec& spec,
                       const Region& region, const VectorField* grad_rho, double h) {
    auto rhs = [&](const PhaseState& y) -> PhaseState {
        return {y.upsilon, leader_force(spec, region, y.xi, y.upsilon, f, grad_rho)};
    };
    const PhaseState k1 = rhs(y0);
    const PhaseState k2 = rhs({y0.xi + 0.5 * h * k1.xi, y0.upsilon + 0.5 * h * k1.upsilon});
    const PhaseState k3 = rhs({y0.xi + 0.5 * h * k2.xi, y0.upsilon + 0.5 * h * k2.upsilon});
    const PhaseState k4 = rhs({y0.xi + h * k3.xi, y0.upsilon + h * k3.upsilon});
    return {y0.xi + (h / 6.0) * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi),
            y0.upsilon + (h / 6.0) * (k1.upsilon + 2.0 * k2.upsilon + 2.0 * k3.upsilon + k4.upsilon)};
}

} // namespace

LeaderSet leader_step(const LeaderSet& set, const ScalarField* rho, const LeaderForceSpec& spec,
                      const Region& region, double dt) {
    if (dt <= 0.0)
        throw PreconditionError("leader_step: dt must be positive");
    VectorField grad_rho;
    const VectorField* grad_ptr = nullptr;
    if (rho != nullptr && spec.feedback_gain != 0.0) {
        grad_rho = gradient_onesided(*rho);
        grad_ptr = &grad_rho;
    }

    LeaderSet out = set;
    out.t = set.t + dt;
    const double tol = 1e-12 * std::max(1.0, std::fabs(set.t) + dt);
    for (Leader& leader : out.leaders) {
        PhaseState y{leader.xi, leader.upsilon};
        double t = set.t;
        double remaining = dt;
        while (remaining > tol) {
            const ControlPiece* piece = find_piece(leader.schedule, t, tol);
            if (piece == nullptr)
                throw ConfigError("leader_step: control schedule does not cover the step");
            const double h = std::min(remaining, std::max(piece->t_end - t, tol));
            y = rk4_substep(y, piece->f, spec, region, grad_ptr, h);
            t += h;
            remaining -= h;
        }
        leader.xi = y.xi;
        leader.upsilon = y.upsilon;
    }
    return out;
}

InvarianceReport invariance_check(const LeaderForceSpec& spec, const Region& region,
                                  double speed_bound, int samples, std::uint64_t seed) {
    InvarianceReport report;
    report.min_margin = -1e300;
    const double s = speed_bound;
    const CounterRng rng(seed, 7);
    std::uint64_t counter = 0;

    auto unit_sample = [&]() -> Vec3 {
        // normal deviates normalized to the sphere
        Vec3 v{rng.normal(counter), rng.normal(counter + 1), rng.normal(counter + 2)};
        counter += 3;
        const double n = norm(v);
        return n > 0.0 ? v / n : Vec3{0, 0, 1};
    };

    // Worst-case margin at (xi, upsilon): the control aligns with nu_ups
    // and the density feedback contributes its configured bound.
    auto margin_at = [&](const Vec3& xi, const Vec3& ups, const Vec3& nu_xi,
                         const Vec3& nu_ups) -> double {
        double m = dot(ups, nu_xi);
        const Vec3 passive = -spec.gamma * ups - spec.barrier.gradient(region, xi);
        m += dot(passive, nu_ups);
        m += spec.f_max * norm(nu_ups);
        m += std::fabs(spec.feedback_gain) * spec.rho_grad_bound * norm(nu_ups);
        return m;
    };

    auto consider = [&](const Vec3& xi, const Vec3& ups, const Vec3& nu_xi, const Vec3& nu_ups) {
        const double m = margin_at(xi, ups, nu_xi, nu_ups);
        if (m > report.min_margin) {
            report.min_margin = m;
            report.witness_xi = xi;
            report.witness_upsilon = ups;
        }
    };

    // Face-grid over each of the 6 position faces of D-tilde paired with
    // extreme velocities: the outward face normal, its negation, and
    // random sphere directions.
    const int grid = std::max(2, int(std::round(std::cbrt(double(samples)))));
    for (int face = 0; face < 6; ++face) {
        const int axis = face / 2;
        const bool high = face % 2 == 0;
        Vec3 nu_xi;
        nu_xi[axis] = high ? 1.0 : -1.0;
        for (int u = 0; u < grid; ++u)
            for (int v = 0; v < grid; ++v) {
                Vec3 xi;
                xi[axis] = high ? region.hi[axis] : region.lo[axis];
                const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
                xi[a1] = region.lo[a1] + (u + 0.5) / grid * (region.hi[a1] - region.lo[a1]);
                xi[a2] = region.lo[a2] + (v + 0.5) / grid * (region.hi[a2] - region.lo[a2]);
                consider(xi, s * nu_xi, nu_xi, nu_xi);
                consider(xi, -s * nu_xi, nu_xi, -nu_xi);
                for (int r = 0; r < 4; ++r) {
                    const Vec3 dir = unit_sample();
                    consider(xi, s * dir, nu_xi, dir);
                }
            }
    }

    // Interior positions on the speed sphere (nu_xi = 0 there).
    for (int q = 0; q < samples; ++q) {
        Vec3 xi;
        for (int d = 0; d < 3; ++d) {
            xi[d] = region.lo[d] +
                    rng.uniform(counter) * (region.hi[d] - region.lo[d]);
            ++counter;
        }
        const Vec3 dir = unit_sample();
        consider(xi, s * dir, Vec3{}, dir);
    }

    report.pass = report.min_margin <= 0.0;
    return report;
}

std::pair<double, Vec3> leader_potential(const Vec3& x, const LeaderSet& set,
                                         const ModelParams& params) {
    Confinement conf = params.conf;
    conf.well_centers.clear();
    for (const Leader& leader : set.leaders)
        conf.well_centers.push_back(leader.xi);
    return {conf.value(x), conf.gradient(x)};
}

double leader_gradient_bound(const ModelParams& params, const DomainSpec& domain,
                             std::size_t leader_count) {
    double bound = 0.0;
    if (params.conf.quadratic)
        bound += params.conf.omega * params.conf.omega * domain.diagonal();
    bound += params.conf.well_amplitude * std::exp(-0.5) * double(leader_count) /
             params.conf.well_sigma;
    return bound;
}

std::pair<FluidState, LeaderSet> coupled_step(const FluidState& fluid, const LeaderSet& leaders,
                                              const ModelParams& params,
                                              const LeaderForceSpec& force, const Region& region,
                                              const SolverOptions& options,
                                              ConvolutionEngine& engine, double dt,
                                              StepDiagnostics* diag) {
    LeaderSet half = leader_step(leaders, &fluid.rho, force, region, 0.5 * dt);

    ModelParams coupled = params;
    coupled.conf.well_centers.clear();
    for (const Leader& leader : half.leaders)
        coupled.conf.well_centers.push_back(leader.xi);

    FluidState fluid_next = step(fluid, coupled, options, engine, dt, diag);
    LeaderSet full = leader_step(half, &fluid_next.rho, force, region, 0.5 * dt);
    return {std::move(fluid_next), std::move(full)};
}

namespace {

std::vector<ControlPiece> schedule_from_values(const std::vector<Vec3>& values, double t0,
                                               double horizon) {
    std::vector<ControlPiece> sched;
    const std::size_t n = values.size();
    for (std::size_t p = 0; p < n; ++p)
        sched.push_back({t0 + horizon * double(p) / double(n),
                         t0 + horizon * double(p + 1) / double(n), values[p]});
    return sched;
}

Vec3 clamp_control(const Vec3& f, double f_max) {
    const double n = norm(f);
    return n > f_max ? f * (f_max / n) : f;
}

} // namespace

double coupled_l1_objective(const SteerContext& ctx, const std::vector<std::vector<Vec3>>& controls,
                            const ScalarField& target, ConvolutionEngine& engine) {
    const GridMask& m = *ctx.mask;
    FluidState fluid = ctx.fluid0;
    LeaderSet leaders = ctx.leaders0;
    for (std::size_t i = 0; i < leaders.leaders.size(); ++i)
        leaders.leaders[i].schedule =
            schedule_from_values(controls[i], ctx.fluid0.t, ctx.horizon);

    const double t_end = ctx.fluid0.t + ctx.horizon;
    const double eps = 1e-12;
    while (fluid.t < t_end - eps) {
        const double speed = max_signal_speed(fluid) + 1e-12;
        double dt = ctx.options.cfl * m.h / speed;
        dt = std::min(dt, t_end - fluid.t);
        auto [next_fluid, next_leaders] =
            coupled_step(fluid, leaders, ctx.params, ctx.force, ctx.region, ctx.options, engine, dt);
        fluid = std::move(next_fluid);
        leaders = std::move(next_leaders);
    }
    return l1_distance(fluid.rho, target);
}

SteerResult steer_to_target(const SteerContext& ctx, const ScalarField& target, int budget) {
    if (budget < 1)
        throw ArgumentError("steer_to_target: budget must be >= 1");
    const GridMask& m = *ctx.mask;
    if (target.mask == nullptr || !target.mask->compatible(m))
        throw ArgumentError("steer_to_target: target mask mismatch");
    if (std::fabs(integrate(target) - 1.0) > 1e-9)
        throw ArgumentError("steer_to_target: target density must have mass 1");
    for (int cell : m.cells)
        if (target[cell] <= 0.0)
            throw ArgumentError("steer_to_target: target density must be positive");

    ConvolutionEngine engine(m);
    const std::size_t k = ctx.leaders0.leaders.size();
    const std::size_t pieces = std::size_t(std::max(1, ctx.pieces));

    std::vector<std::vector<Vec3>> best(k, std::vector<Vec3>(pieces, Vec3{}));
    if (ctx.seed_schedule)
        best = *ctx.seed_schedule;

    SteerResult result;
    result.evaluations = 0;
    double best_l1 = coupled_l1_objective(ctx, best, target, engine);
    ++result.evaluations;
    result.seed_l1 = best_l1;

    double step_size = ctx.initial_step;
    bool improved_in_sweep = true;
    while (result.evaluations < budget) {
        if (!improved_in_sweep)
            step_size *= 0.5;
        improved_in_sweep = false;
        for (std::size_t li = 0; li < k && result.evaluations < budget; ++li)
            for (std::size_t pi = 0; pi < pieces && result.evaluations < budget; ++pi)
                for (int comp = 0; comp < 3 && result.evaluations < budget; ++comp)
                    for (int dir = -1; dir <= 1 && result.evaluations < budget; dir += 2) {
                        auto cand = best;
                        Vec3 f = cand[li][pi];
                        f[comp] += dir * step_size;
                        cand[li][pi] = clamp_control(f, ctx.force.f_max);
                        const double l1 = coupled_l1_objective(ctx, cand, target, engine);
                        ++result.evaluations;
                        if (l1 < best_l1) {
                            best_l1 = l1;
                            best = std::move(cand);
                            improved_in_sweep = true;
                        }
                    }
    }
    result.schedule = std::move(best);
    result.achieved_l1 = best_l1;
    return result;
}

} // namespace eulign
