// Acceptance suite: one end-to-end check per criterion, printed as a
// single PASS/FAIL line each (runtime budgets included). The process
// exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "eulign/construction.hpp"
#include "eulign/energy.hpp"
#include "eulign/leaders.hpp"
#include "eulign/particles.hpp"
#include "eulign/rng.hpp"
#include "eulign/run.hpp"

using namespace eulign;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

KernelSpec yukawa(double k, double lambda, KernelRole role = KernelRole::Alignment) {
    return {KernelFamily::Yukawa, k, lambda, role};
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// --- criterion 1: Yukawa ball-indicator convolution ------------------------

Outcome criterion_kernel_exactness() {
    const double R = 0.3;
    const double exact = 4.0 * M_PI * (1.0 - std::exp(-R) * (1.0 + R));
    double err32 = 0.0, err64 = 0.0;
    for (int n : {32, 64}) {
        const GridMask mask = rasterize(DomainSpec{}, n);
        ScalarField f(mask);
        for (int cell : mask.cells)
            if (norm(mask.cell_center(cell) - Vec3{0.5, 0.5, 0.5}) < R)
                f[cell] = 1.0;
        const ScalarField out = convolve(mask, f, yukawa(1.0, 1.0));
        const double err = std::fabs(out[mask.flat(n / 2, n / 2, n / 2)] - exact) / exact;
        (n == 32 ? err32 : err64) = err;
    }
    Outcome o;
    o.pass = err64 < 0.015 && err64 < err32;
    o.detail = "rel err n=32: " + fmt(err32) + ", n=64: " + fmt(err64) + " (exact " +
               fmt(exact) + ")";
    return o;
}

// --- criterion 2: Bessel order-2 equivalence --------------------------------

Outcome criterion_bessel_equivalence() {
    const GridMask mask = rasterize(DomainSpec{}, 32);
    ScalarField f(mask);
    const CounterRng rng(404, 0);
    for (std::size_t i = 0; i < mask.cells.size(); ++i)
        f[mask.cells[i]] = rng.uniform(i);
    const ScalarField via_bessel =
        convolve(mask, f, {KernelFamily::Bessel, 1.0, 2.0, KernelRole::Alignment});
    const ScalarField via_yukawa = convolve(mask, f, yukawa(1.0 / (4.0 * M_PI), 1.0));
    double scale = 0.0, worst = 0.0;
    for (int cell : mask.cells) {
        scale = std::max(scale, std::fabs(via_yukawa[cell]));
        worst = std::max(worst, std::fabs(via_bessel[cell] - via_yukawa[cell]));
    }
    double kernel_err = 0.0;
    for (double r : {0.02, 0.2, 1.0, 3.0}) {
        const double a = kernel_eval({KernelFamily::Bessel, 1.0, 2.0, KernelRole::Alignment}, r);
        const double b = kernel_eval(yukawa(1.0 / (4.0 * M_PI), 1.0), r);
        kernel_err = std::max(kernel_err, std::fabs(a - b) / std::fabs(b));
    }
    Outcome o;
    o.pass = worst <= 1e-10 * scale && kernel_err <= 1e-12;
    o.detail = "field rel dev " + fmt(worst / scale) + ", kernel rel dev " + fmt(kernel_err);
    return o;
}

// --- criterion 3: reflection isometry ----------------------------------------

Outcome criterion_reflection() {
    const CounterRng rng(11, 0);
    double worst_iso = 0.0, worst_inv = 0.0;
    for (int s = 0; s < 10000; ++s) {
        const Vec3 v{rng.normal(6 * s), rng.normal(6 * s + 1), rng.normal(6 * s + 2)};
        Vec3 nu{rng.normal(6 * s + 3), rng.normal(6 * s + 4), rng.normal(6 * s + 5)};
        nu = normalized(nu);
        const Vec3 r = reflect(v, nu);
        worst_iso = std::max(worst_iso, std::fabs(norm(r) - norm(v)) / norm(v));
        worst_inv = std::max(worst_inv, norm(reflect(r, nu) - v) / norm(v));
    }
    Outcome o;
    o.pass = worst_iso <= 1e-14 && worst_inv <= 1e-14;
    o.detail = "isometry " + fmt(worst_iso) + ", involution " + fmt(worst_inv);
    return o;
}

// --- criterion 4: particle momentum conservation ----------------------------

Outcome criterion_momentum() {
    const DomainSpec dom{{0, 0, 0}, {4, 4, 4}, {}, 0.0};
    ModelParams p;
    p.kernels.alignment = yukawa(1.0, 1.0);
    p.kernels.cohesion = yukawa(-0.5, 1.5, KernelRole::Cohesion);
    p.kernels.repulsion = yukawa(0.8, 3.0, KernelRole::Repulsion);

    ParticleEnsemble ens;
    const CounterRng rng(77, 0);
    for (int i = 0; i < 500; ++i) {
        ens.x.push_back(Vec3{2, 2, 2} + Vec3{0.4 * rng.normal(6 * i), 0.4 * rng.normal(6 * i + 1),
                                             0.4 * rng.normal(6 * i + 2)});
        ens.v.push_back({0.05 * rng.normal(6 * i + 3), 0.05 * rng.normal(6 * i + 4),
                         0.05 * rng.normal(6 * i + 5)});
    }
    double worst = 0.0;
    const double dt = 0.01;
    for (int s = 0; s < 100; ++s) {
        Vec3 before;
        for (const Vec3& v : ens.v)
            before += v;
        ens = step(dom, ens, p, dt);
        Vec3 after;
        for (const Vec3& v : ens.v)
            after += v;
        worst = std::max(worst, norm(after - before));
    }
    Outcome o;
    o.pass = worst <= 1e-10;
    o.detail = "max per-step drift " + fmt(worst);
    return o;
}

// --- criterion 5: alignment contraction --------------------------------------

Outcome criterion_alignment_contraction() {
    const DomainSpec dom;
    ModelParams p;
    p.kernels.alignment = yukawa(1.0, 1.0);
    ParticleEnsemble ens;
    const CounterRng rng(55, 0);
    int idx = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                ens.x.push_back({0.2 + 0.2 * i, 0.2 + 0.2 * j, 0.2 + 0.2 * k});
                ens.v.push_back({0.05 * rng.normal(3 * idx), 0.05 * rng.normal(3 * idx + 1),
                                 0.05 * rng.normal(3 * idx + 2)});
                ++idx;
            }
    const auto diameter = [&](const ParticleEnsemble& e) {
        double d = 0.0;
        for (std::size_t a = 0; a < e.size(); ++a)
            for (std::size_t b = a + 1; b < e.size(); ++b)
                d = std::max(d, norm(e.v[a] - e.v[b]));
        return d;
    };
    double prev = diameter(ens);
    bool monotone = true;
    double worst_increase = 0.0;
    for (int s = 0; s < 2000; ++s) {
        ens = step(dom, ens, p, 0.005);
        const double cur = diameter(ens);
        worst_increase = std::max(worst_increase, cur - prev);
        if (cur > prev + 1e-12)
            monotone = false;
        prev = cur;
    }
    Outcome o;
    o.pass = monotone;
    o.detail = "worst increase " + fmt(worst_increase) + ", final diameter " + fmt(prev);
    return o;
}

// --- criterion 6: propulsion equilibrium -------------------------------------

Outcome criterion_propulsion() {
    const DomainSpec dom{{0, 0, 0}, {8, 8, 8}, {}, 0.0};
    ModelParams p;
    p.kappa_p = 1.0;
    ParticleEnsemble ens;
    ens.x = {{4, 4, 4}};
    ens.v = {{0.5, 0, 0}};
    const double dt = 1e-3;
    for (int s = 0; s < 10000; ++s)
        ens = step(dom, ens, p, dt);
    const double dev = std::fabs(norm(ens.v[0]) - 1.0);

    // independent reference: RK4 on s' = s (1 - P(s)) at dt = 1e-5
    double s_ref = 0.5;
    const auto f = [&](double s) { return s * (1.0 - p.prop(s)); };
    for (int i = 0; i < 1000000; ++i) {
        const double k1 = f(s_ref), k2 = f(s_ref + 0.5e-5 * k1), k3 = f(s_ref + 0.5e-5 * k2),
                     k4 = f(s_ref + 1e-5 * k3);
        s_ref += 1e-5 / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    Outcome o;
    o.pass = dev < 1e-4 && std::fabs(norm(ens.v[0]) - s_ref) < 5e-3;
    o.detail = "| |v(10)| - 1 | = " + fmt(dev) + ", reference |v| = " + fmt(s_ref);
    return o;
}

// --- criterion 7: hydro conservation and symmetry ----------------------------

Outcome criterion_hydro_conservation() {
    const int n = 48;
    const GridMask mask = rasterize(DomainSpec{}, n);
    ConvolutionEngine engine(mask);
    ModelParams params;
    params.kernels.alignment = yukawa(1.0, 1.0);
    params.kernels.cohesion = yukawa(-1.0, 1.0, KernelRole::Cohesion);
    params.kernels.repulsion = yukawa(1.5, 2.0, KernelRole::Repulsion);
    SolverOptions options;

    DensityProfile prof;
    prof.kind = DensityProfile::Kind::Gaussian;
    prof.center = {0.5, 0.5, 0.5};
    prof.sigma = 0.12;
    prof.baseline = 0.15;
    FluidState s = hydro_initial_state(mask, prof, VelocityProfile{}, 0.0);

    StepDiagnostics diag;
    for (int it = 0; it < 500; ++it) {
        const double dt = options.cfl * mask.h / (max_signal_speed(s) + 1e-2);
        s = step(s, params, options, engine, dt, &diag);
    }
    const double mass_err = std::fabs(integrate(s.rho) - 1.0);
    double asym = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                asym = std::max(asym, std::fabs(s.rho[mask.flat(i, j, k)] -
                                                s.rho[mask.flat(n - 1 - i, j, k)]));
    Outcome o;
    o.pass = mass_err <= 1e-11 && asym <= 1e-10 && diag.floor_mass_added <= 1e-12;
    o.detail = "|mass-1| = " + fmt(mass_err) + ", mirror asym " + fmt(asym) + " at t=" +
               fmt(s.t);
    return o;
}

// --- criterion 8: Neumann manufactured solution -------------------------------

Outcome criterion_neumann() {
    const auto error_at = [](int n) {
        const GridMask mask = rasterize(DomainSpec{}, n);
        ScalarField g(mask);
        for (int cell : mask.cells) {
            const Vec3 x = mask.cell_center(cell);
            g[cell] = 3.0 * M_PI * M_PI * std::cos(M_PI * x.x) * std::cos(M_PI * x.y) *
                      std::cos(M_PI * x.z);
        }
        const ScalarField phi = solve_neumann(mask, g);
        double err2 = 0.0;
        for (int cell : mask.cells) {
            const Vec3 x = mask.cell_center(cell);
            const double d = phi[cell] - std::cos(M_PI * x.x) * std::cos(M_PI * x.y) *
                                             std::cos(M_PI * x.z);
            err2 += d * d;
        }
        return std::sqrt(err2 * mask.cell_volume());
    };
    const double e16 = error_at(16), e32 = error_at(32), e64 = error_at(64);
    const double order1 = std::log2(e16 / e32);
    const double order2 = std::log2(e32 / e64);
    Outcome o;
    o.pass = order1 >= 1.9 && order2 >= 1.9;
    o.detail = "L2 errors " + fmt(e16) + " / " + fmt(e32) + " / " + fmt(e64) + ", orders " +
               fmt(order1) + ", " + fmt(order2);
    return o;
}

// --- criterion 9: trace-free elliptic system ----------------------------------

Outcome criterion_elliptic() {
    const auto solve_at = [](int n, double& err, bool& exact_mt) {
        const GridMask mask = rasterize(DomainSpec{}, n);
        VectorField S(mask);
        const double pi2 = M_PI * M_PI;
        for (int cell : mask.cells) {
            const Vec3 p = mask.cell_center(cell);
            const double sx = std::sin(M_PI * p.x), cx = std::cos(M_PI * p.x);
            const double sy = std::sin(M_PI * p.y), cy = std::cos(M_PI * p.y);
            const double sz = std::sin(M_PI * p.z), cz = std::cos(M_PI * p.z);
            const double psi = sx * sy * sz;
            const Vec3 grad_div{pi2 * (-psi - cx * cy * sz), pi2 * (cx * cy * sz + psi),
                                pi2 * (cx * sy - sx * cy) * cz};
            S.set(cell, Vec3{3.0 * pi2 * psi, -3.0 * pi2 * psi, 0.0} - grad_div / 3.0);
        }
        const EllipticSolution sol = solve_elliptic_system(mask, S);
        double err2 = 0.0;
        exact_mt = true;
        for (int cell : mask.cells) {
            const Vec3 p = mask.cell_center(cell);
            const double psi = std::sin(M_PI * p.x) * std::sin(M_PI * p.y) * std::sin(M_PI * p.z);
            const Vec3 d = sol.w.get(cell) - Vec3{psi, -psi, 0.0};
            err2 += dot(d, d);
            const TraceFreeTensor& M = sol.M[std::size_t(cell)];
            if (M[0] + M[1] + M[2] != 0.0)
                exact_mt = false;
        }
        err = std::sqrt(err2 * mask.cell_volume());
    };
    double e16, e32, e64;
    bool mt16, mt32, mt64;
    solve_at(16, e16, mt16);
    solve_at(32, e32, mt32);
    solve_at(64, e64, mt64);
    const double order1 = std::log2(e16 / e32);
    const double order2 = std::log2(e32 / e64);
    Outcome o;
    o.pass = order1 >= 1.9 && order2 >= 1.9 && mt16 && mt32 && mt64;
    o.detail = "L2 errors " + fmt(e16) + " / " + fmt(e32) + " / " + fmt(e64) + ", orders " +
               fmt(order1) + ", " + fmt(order2) +
               (mt64 ? ", M exactly trace-free" : ", M trace BAD");
    return o;
}

// --- criterion 10: non-uniqueness via momentum construction -------------------

Outcome criterion_nonuniqueness() {
    const DomainSpec dom;
    ModelParams params;

    CurlSpec spec_a;
    spec_a.halfwidth = {0.3, 0.3, 0.3};
    CurlSpec spec_b = spec_a;
    spec_b.axis = 0;
    spec_b.amp = 0.7;

    const auto mass_residual = [&](int n, int samples, const CurlSpec& cs, double* jdiff) {
        const GridMask mask = rasterize(dom, n);
        std::vector<double> times;
        std::vector<ScalarField> rhos;
        for (int s = 0; s < samples; ++s) {
            const double t = double(s) / (samples - 1);
            times.push_back(t);
            ScalarField rho(mask);
            for (int cell : mask.cells) {
                const Vec3 d = mask.cell_center(cell) - Vec3{0.5, 0.5, 0.5};
                rho[cell] = 1.0 + 0.3 * std::sin(2.0 * M_PI * t) *
                                      std::exp(-dot(d, d) / (2.0 * 0.18 * 0.18));
            }
            const double mass = integrate(rho);
            for (int cell : mask.cells)
                rho[cell] /= mass;
            rhos.push_back(std::move(rho));
        }
        const DensityPath path = make_density_path(mask, times, std::move(rhos));
        const VectorField v0 = make_curl_field(mask, cs);
        const auto momenta = momentum_from_density(path, v0);
        if (jdiff) {
            const VectorField v0b = make_curl_field(mask, spec_b);
            const auto momenta_b = momentum_from_density(path, v0b);
            double d = 0.0;
            for (int cell : mask.cells)
                d = std::max(d, norm(momenta[0].get(cell) - momenta_b[0].get(cell)));
            *jdiff = d;
        }
        std::vector<PotentialSet> pots(path.times.size());
        const TestFunctionBank bank = TestFunctionBank::defaults(dom, mask, 0.0, 1.0);
        const auto rows = weak_residual(path.times, path.rho, momenta, pots, params, bank);
        double worst = 0.0;
        for (const WeakResidualRow& row : rows)
            if (row.kind == "mass")
                worst = std::max(worst, row.absolute);
        return worst;
    };

    double jdiff = 0.0;
    const double r16 = mass_residual(16, 11, spec_a, &jdiff);
    const double r24 = mass_residual(24, 16, spec_a, nullptr);
    const double r36 = mass_residual(36, 23, spec_a, nullptr);
    const double order1 = std::log(r16 / r24) / std::log(24.0 / 16.0);
    const double order2 = std::log(r24 / r36) / std::log(36.0 / 24.0);
    Outcome o;
    o.pass = order1 >= 1.5 && order2 >= 1.5 && jdiff > 1e-2;
    o.detail = "mass residuals " + fmt(r16) + " / " + fmt(r24) + " / " + fmt(r36) +
               ", orders " + fmt(order1) + ", " + fmt(order2) + ", |j1-j2|_inf " + fmt(jdiff);
    return o;
}

// --- criteria 11 and 12 share smooth hydro trajectories -----------------------

std::vector<FluidState> smooth_run(int n, double t_end, int samples, double delta) {
    const GridMask mask = rasterize(DomainSpec{}, n);
    ConvolutionEngine engine(mask);
    ModelParams params;
    params.kernels.alignment = yukawa(1.0, 1.0);
    params.kernels.repulsion = yukawa(0.5, 2.0, KernelRole::Repulsion);
    SolverOptions options;

    DensityProfile prof;
    prof.kind = DensityProfile::Kind::Gaussian;
    prof.center = {0.5, 0.5, 0.5};
    prof.sigma = 0.14;
    prof.baseline = 0.15;
    VelocityProfile vel;
    vel.swirl_amp = 0.3;
    vel.swirl_center = {0.5, 0.5, 0.5};
    vel.swirl_sigma = 0.15;
    vel.perturb_delta = delta;
    vel.perturb_center = {0.55, 0.45, 0.5};
    vel.perturb_sigma = 0.12;
    vel.perturb_axis = 0;
    FluidState s = hydro_initial_state(mask, prof, vel, 0.0);

    std::vector<FluidState> traj{s};
    const double stride = t_end / (samples - 1);
    double next = stride;
    while (s.t < t_end - 1e-12) {
        double dt = options.cfl * mask.h / (max_signal_speed(s) + 1e-12);
        dt = std::min(dt, next - s.t);
        s = step(s, params, options, engine, dt);
        if (s.t >= next - 1e-12) {
            s.t = next;
            traj.push_back(s);
            next += stride;
        }
    }
    return traj;
}

Outcome criterion_energy_inequality() {
    ModelParams params;
    params.kernels.alignment = yukawa(1.0, 1.0);
    params.kernels.repulsion = yukawa(0.5, 2.0, KernelRole::Repulsion);

    const auto report_at = [&](int n, int samples) {
        const GridMask mask = rasterize(DomainSpec{}, n);
        ConvolutionEngine engine(mask);
        const auto traj = smooth_run(n, 0.24, samples, 0.0);
        return check_inequality(traj, params, engine, 10.0);
    };
    const EnergyReport r24 = report_at(24, 9);
    const EnergyReport r48 = report_at(48, 17);
    double s24 = 0.0, s48 = 0.0;
    for (const EnergySample& row : r24.rows)
        s24 = std::max(s24, std::fabs(row.slack));
    for (const EnergySample& row : r48.rows)
        s48 = std::max(s48, std::fabs(row.slack));
    Outcome o;
    o.pass = r24.pass && r48.pass && s48 <= s24 / 1.5;
    o.detail = "max|slack| n=24: " + fmt(s24) + ", n=48: " + fmt(s48) + " (tol " +
               fmt(r24.tol) + " / " + fmt(r48.tol) + "), shrink x" + fmt(s24 / s48);
    return o;
}

Outcome criterion_weak_strong() {
    const int n = 24, samples = 13;
    const double t_end = 0.3;
    const auto base_a = smooth_run(n, t_end, samples, 0.0);
    const auto base_b = smooth_run(n, t_end, samples, 0.0);

    double identical_worst = 0.0;
    for (int s = 0; s < samples; ++s)
        identical_worst = std::max(
            identical_worst, relative_energy(base_a[std::size_t(s)], base_b[std::size_t(s)]));

    const auto pert2 = smooth_run(n, t_end, samples, 1e-2);
    const auto pert3 = smooth_run(n, t_end, samples, 1e-3);
    std::vector<double> times, e2, e3;
    for (int s = 0; s < samples; ++s) {
        times.push_back(base_a[std::size_t(s)].t);
        e2.push_back(relative_energy(pert2[std::size_t(s)], base_a[std::size_t(s)]));
        e3.push_back(relative_energy(pert3[std::size_t(s)], base_a[std::size_t(s)]));
    }
    const double ratio0 = e2.front() / e3.front();
    const GronwallResult g2 = gronwall_check(times, e2);
    const GronwallResult g3 = gronwall_check(times, e3);
    const double cdev = std::fabs(g2.c_fit - g3.c_fit) /
                        std::max({std::fabs(g2.c_fit), std::fabs(g3.c_fit), 1e-6});
    Outcome o;
    o.pass = identical_worst <= 1e-12 && std::fabs(ratio0 - 100.0) <= 10.0 && g2.pass &&
             g3.pass && cdev <= 0.2;
    o.detail = "identical E " + fmt(identical_worst) + ", E0 ratio " + fmt(ratio0) +
               ", C_fit " + fmt(g2.c_fit) + " / " + fmt(g3.c_fit);
    return o;
}

// --- criterion 13: monokinetic consistency ------------------------------------

Outcome criterion_monokinetic() {
    const DomainSpec dom;
    const int n = 32;
    const GridMask mask = rasterize(dom, n);
    const double t_end = 0.5;

    ModelParams params;
    params.kernels.alignment = yukawa(1.0, 1.0);

    DensityProfile prof;
    prof.kind = DensityProfile::Kind::Gaussian;
    prof.center = {0.5, 0.5, 0.5};
    prof.sigma = 0.15;
    prof.baseline = 0.3;
    VelocityProfile vel;
    vel.swirl_amp = 0.4;
    vel.swirl_center = {0.5, 0.5, 0.5};
    vel.swirl_sigma = 0.15;

    // hydro tier
    ConvolutionEngine engine(mask);
    SolverOptions options;
    FluidState fluid = hydro_initial_state(mask, prof, vel, 0.0);
    while (fluid.t < t_end - 1e-12) {
        double dt = options.cfl * mask.h / (max_signal_speed(fluid) + 1e-12);
        dt = std::min(dt, t_end - fluid.t);
        fluid = step(fluid, params, options, engine, dt);
    }

    // particle tier, sampled i.i.d. from (rho0, u0)
    VelocityInit vinit;
    vinit.kind = VelocityInit::Kind::Monokinetic;
    vinit.profile = vel;
    ParticleEnsemble ens = sample_initial(dom, 10000, prof, vinit, 4242);
    const double dt_p = 0.02;
    const long steps = std::lround(t_end / dt_p);
    for (long s = 0; s < steps; ++s)
        ens = step(dom, ens, params, dt_p);
    const auto deposited = deposit(ens, mask);

    const double l1 = l1_distance(deposited.first, fluid.rho);

    // Monte-Carlo budget: sqrt(2/(pi N h^3)) sum_c sqrt(rho_c) h^3
    double sum_sqrt = 0.0;
    for (int cell : mask.cells)
        sum_sqrt += std::sqrt(std::max(fluid.rho[cell], 0.0));
    sum_sqrt *= mask.cell_volume();
    const double budget_mc = std::sqrt(2.0 / (M_PI * 10000.0 * mask.cell_volume())) * sum_sqrt;
    // first-order discretization budget: h * total variation
    double tv = 0.0;
    for (int cell : mask.cells) {
        int i, j, k;
        mask.unflat(cell, i, j, k);
        if (mask.is_inside(i + 1, j, k))
            tv += std::fabs(fluid.rho[mask.flat(i + 1, j, k)] - fluid.rho[cell]);
        if (mask.is_inside(i, j + 1, k))
            tv += std::fabs(fluid.rho[mask.flat(i, j + 1, k)] - fluid.rho[cell]);
        if (mask.is_inside(i, j, k + 1))
            tv += std::fabs(fluid.rho[mask.flat(i, j, k + 1)] - fluid.rho[cell]);
    }
    const double budget_disc = mask.h * tv * mask.h * mask.h;

    Outcome o;
    o.pass = l1 <= 3.0 * (budget_mc + budget_disc);
    o.detail = "L1 " + fmt(l1) + " vs 3 x (MC " + fmt(budget_mc) + " + disc " +
               fmt(budget_disc) + ")";
    return o;
}

// --- criterion 14: leader invariance + steering --------------------------------

Outcome criterion_leaders() {
    const DomainSpec dom;
    const Region region = leader_region(dom, 0.1);

    // documented defaults
    LeaderForceSpec force;
    force.gamma = 4.0;
    force.f_max = 1.0;
    force.barrier.strength = 0.05;
    force.barrier.width = 0.1;
    const InvarianceReport inv = invariance_check(force, region, 1.5, 400, 5);

    // shifted-blob steering at budget 40
    const GridMask mask = rasterize(dom, 16);
    SteerContext ctx;
    ctx.mask = &mask;
    ctx.domain = dom;
    ctx.params.kernels.alignment = yukawa(1.0, 1.0);
    ctx.params.conf.well_amplitude = 1.2;
    ctx.params.conf.well_sigma = 0.18;
    ctx.force = force;
    ctx.force.gamma = 2.5;
    ctx.region = region;
    DensityProfile prof;
    prof.kind = DensityProfile::Kind::Gaussian;
    prof.center = {0.4, 0.5, 0.5};
    prof.sigma = 0.12;
    prof.baseline = 0.25;
    ctx.fluid0 = hydro_initial_state(mask, prof, VelocityProfile{}, 0.0);
    LeaderSet leaders;
    Leader l;
    l.xi = {0.4, 0.5, 0.5};
    leaders.leaders.push_back(l);
    ctx.leaders0 = leaders;
    ctx.horizon = 0.8;
    ctx.pieces = 2;
    ctx.initial_step = 0.5;

    DensityProfile target_prof = prof;
    target_prof.center = {0.6, 0.5, 0.5}; // blob shifted by 0.2 box lengths
    ScalarField target(mask);
    for (int cell : mask.cells)
        target[cell] = target_prof.value(mask.cell_center(cell));
    const double mass = integrate(target);
    for (int cell : mask.cells)
        target[cell] /= mass;

    const SteerResult res = steer_to_target(ctx, target, 40);
    const double baseline = res.seed_l1; // zero-control seed = uncontrolled run
    const double improvement = (baseline - res.achieved_l1) / baseline;

    Outcome o;
    o.pass = inv.pass && improvement >= 0.25;
    o.detail = std::string("invariance ") + (inv.pass ? "PASS" : "FAIL") + " (margin " +
               fmt(inv.min_margin) + "), L1 " + fmt(baseline) + " -> " + fmt(res.achieved_l1) +
               " (" + fmt(100.0 * improvement) + "% better)";
    return o;
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        Outcome (*fn)();
        double budget_s;
    };
    const Entry entries[] = {
        {1, "kernel exactness (ball indicator)", criterion_kernel_exactness, 10},
        {2, "Bessel order-2 equivalence", criterion_bessel_equivalence, 5},
        {3, "reflection isometry", criterion_reflection, 1},
        {4, "particle momentum conservation", criterion_momentum, 30},
        {5, "alignment contraction", criterion_alignment_contraction, 120},
        {6, "propulsion equilibrium", criterion_propulsion, 60},
        {7, "hydro conservation + symmetry", criterion_hydro_conservation, 120},
        {8, "Neumann manufactured solution", criterion_neumann, 30},
        {9, "trace-free elliptic system", criterion_elliptic, 60},
        {10, "non-uniqueness construction", criterion_nonuniqueness, 300},
        {11, "energy inequality", criterion_energy_inequality, 300},
        {12, "weak-strong uniqueness witness", criterion_weak_strong, 300},
        {13, "monokinetic consistency", criterion_monokinetic, 180},
        {14, "leader invariance + steering", criterion_leaders, 600},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs < e.budget_s;
        const bool pass = o.pass && in_budget;
        std::printf("[%2d] %-38s %s  (%.1fs%s)  %s\n", e.id, e.name, pass ? "PASS" : "FAIL",
                    secs, in_budget ? "" : " OVER BUDGET", o.detail.c_str());
        std::fflush(stdout);
        if (!pass)
            ++failures;
    }
    std::printf("%d/14 criteria passed\n", 14 - failures);
    return failures;
}
