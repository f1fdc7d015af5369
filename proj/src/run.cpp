#include "eulign/run.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "eulign/rng.hpp"

namespace eulign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint32_t kEulfVersion = 1;

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), std::streamsize(size));
}

std::string num(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

struct Logger {
    std::ofstream file;
    explicit Logger(const std::string& path) : file(path) {}
    void line(const std::string& text) { file << text << "\n"; }
};

} // namespace

void write_eulf(const std::string& path, const FluidState& state) {
    const GridMask& m = state.mask();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("write_eulf: cannot open " + path);
    out.write("EULF", 4);
    const std::uint32_t header[4] = {kEulfVersion, std::uint32_t(m.nx), std::uint32_t(m.ny),
                                     std::uint32_t(m.nz)};
    write_bytes(out, header, sizeof(header));
    const double meta[2] = {m.h, state.t};
    write_bytes(out, meta, sizeof(meta));
    write_bytes(out, state.rho.v.data(), state.rho.v.size() * sizeof(double));
    for (int d = 0; d < 3; ++d)
        write_bytes(out, state.j.c[std::size_t(d)].data(),
                    state.j.c[std::size_t(d)].size() * sizeof(double));
}

FluidState read_eulf(const std::string& path, const GridMask& mask) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("read_eulf: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "EULF", 4) != 0)
        throw ArgumentError("read_eulf: bad magic in " + path);
    std::uint32_t header[4];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (header[0] != kEulfVersion)
        throw ArgumentError("read_eulf: unsupported version");
    if (int(header[1]) != mask.nx || int(header[2]) != mask.ny || int(header[3]) != mask.nz)
        throw ArgumentError("read_eulf: snapshot dimensions do not match the mask");
    double meta[2];
    in.read(reinterpret_cast<char*>(meta), sizeof(meta));
    if (std::fabs(meta[0] - mask.h) > 1e-12 * mask.h)
        throw ArgumentError("read_eulf: cell size mismatch");
    FluidState state(mask);
    state.t = meta[1];
    in.read(reinterpret_cast<char*>(state.rho.v.data()),
            std::streamsize(state.rho.v.size() * sizeof(double)));
    for (int d = 0; d < 3; ++d)
        in.read(reinterpret_cast<char*>(state.j.c[std::size_t(d)].data()),
                std::streamsize(state.j.c[std::size_t(d)].size() * sizeof(double)));
    if (!in)
        throw ArgumentError("read_eulf: truncated file " + path);
    return state;
}

std::string fnv1a_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("fnv1a_hex: cannot open " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= std::uint8_t(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    std::ostringstream out;
    out << std::hex << hash;
    return out.str();
}

FluidState hydro_initial_state(const GridMask& mask, const DensityProfile& density,
                               const VelocityProfile& velocity, double t0) {
    FluidState state(mask);
    state.t = t0;
    for (int cell : mask.cells)
        state.rho[cell] = density.value(mask.cell_center(cell));
    const double mass = integrate(state.rho);
    if (mass <= 0.0)
        throw ConfigError("hydro_initial_state: initial density has nonpositive mass");
    for (int cell : mask.cells) {
        state.rho[cell] /= mass;
        state.j.set(cell, state.rho[cell] * velocity.value(mask.cell_center(cell)));
    }
    return state;
}

namespace {

struct ManifestBuilder {
    json outputs = json::object();
    void add(const std::string& dir, const std::string& rel) {
        outputs[rel] = fnv1a_hex(dir + "/" + rel);
    }
};

void write_manifest(const std::string& dir, const Scenario& sc, ManifestBuilder& mb,
                    const std::string& status, const json& extra = json::object()) {
    json manifest;
    manifest["format"] = "eulign-run";
    manifest["version"] = 1;
    switch (sc.mode) {
    case RunMode::Particles: manifest["mode"] = "particles"; break;
    case RunMode::Hydro: manifest["mode"] = "hydro"; break;
    case RunMode::Coupled: manifest["mode"] = "coupled"; break;
    case RunMode::Construct: manifest["mode"] = "construct"; break;
    }
    manifest["status"] = status;
    manifest["config_hash"] = fnv1a_hex(dir + "/config.normalized");
    manifest["outputs"] = mb.outputs;
    for (auto it = extra.begin(); it != extra.end(); ++it)
        manifest[it.key()] = it.value();
    std::ofstream out(dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

std::string snapshot_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snapshots/state_%06d.eulf", index);
    return buf;
}

void append_energy_row(std::ofstream& csv, const FluidState& state, const ModelParams& params,
                       ConvolutionEngine& engine) {
    const GridMask& m = state.mask();
    const PotentialSet pots = potentials(m, state.rho, state.j, params.kernels, params.conf, engine);
    const EnergyComponents e = energy(state, pots);
    const EnergyRhs r = energy_rhs(state, pots, params);
    const double mass = integrate(state.rho);
    const Vec3 mom = integrate(state.j);
    csv << num(state.t) << "," << num(mass) << "," << num(mom.x) << "," << num(mom.y) << ","
        << num(mom.z) << "," << num(e.kinetic) << "," << num(e.interaction) << ","
        << num(r.alignment) << "," << num(r.confinement) << "," << num(r.propulsion) << "\n";
}

RunOutcome run_hydro_like(const Scenario& sc, const std::string& dir, Logger& log,
                          ManifestBuilder& mb) {
    const GridMask mask = rasterize(sc.domain, sc.resolution);
    ConvolutionEngine engine(mask);
    FluidState state = hydro_initial_state(mask, sc.hydro_density, sc.hydro_velocity, sc.t0);
    const bool coupled = sc.mode == RunMode::Coupled;
    LeaderSet leaders = sc.leaders0;
    const Region region = leader_region(sc.domain, sc.region_margin);

    std::ofstream energy_csv(dir + "/energy.csv");
    energy_csv << "t,mass,momentum_x,momentum_y,momentum_z,kinetic,interaction,"
                  "rhs_alignment,rhs_confinement,rhs_propulsion\n";
    std::ofstream leaders_csv;
    if (coupled) {
        leaders_csv.open(dir + "/leaders.csv");
        leaders_csv << "t,id,xi_x,xi_y,xi_z,ups_x,ups_y,ups_z,f_x,f_y,f_z\n";
    }

    ModelParams params = sc.params;
    if (coupled) {
        params.conf.well_centers.clear();
        for (const Leader& l : leaders.leaders)
            params.conf.well_centers.push_back(l.xi);
    }

    StepDiagnostics diag;
    int snap_index = 0;
    int emitted = 0;
    bool leaders_in_region = true;
    const auto emit = [&]() {
        const std::string rel = snapshot_name(snap_index++);
        write_eulf(dir + "/" + rel, state);
        mb.add(dir, rel);
        append_energy_row(energy_csv, state, params, engine);
        if (coupled) {
            for (std::size_t i = 0; i < leaders.leaders.size(); ++i) {
                const Leader& l = leaders.leaders[i];
                Vec3 f;
                for (const ControlPiece& p : l.schedule)
                    if (leaders.t >= p.t_begin && leaders.t <= p.t_end)
                        f = p.f;
                leaders_csv << num(leaders.t) << "," << (i + 1) << "," << num(l.xi.x) << ","
                            << num(l.xi.y) << "," << num(l.xi.z) << "," << num(l.upsilon.x) << ","
                            << num(l.upsilon.y) << "," << num(l.upsilon.z) << "," << num(f.x)
                            << "," << num(f.y) << "," << num(f.z) << "\n";
                if (!region.contains(l.xi, 1e-9))
                    leaders_in_region = false;
            }
        }
        ++emitted;
    };

    emit();
    const double eps = 1e-12 * std::max(1.0, sc.t_end - sc.t0);
    double next_snap = sc.t0 + sc.snapshot_stride;
    while (state.t < sc.t_end - eps) {
        double dt;
        const double speed = max_signal_speed(state) + 1e-12;
        const double cfl_dt = sc.solver.cfl * mask.h / speed;
        if (sc.fixed_dt > 0.0) {
            if (sc.fixed_dt > cfl_dt)
                throw StepSizeError("run: hydro.dt violates the CFL bound at t=" +
                                    std::to_string(state.t));
            dt = sc.fixed_dt;
        } else {
            dt = cfl_dt;
        }
        dt = std::min(dt, std::min(next_snap, sc.t_end) - state.t);
        if (coupled) {
            auto [fluid_next, leaders_next] =
                coupled_step(state, leaders, params, sc.force, region, sc.solver, engine, dt, &diag);
            state = std::move(fluid_next);
            leaders = std::move(leaders_next);
            params.conf.well_centers.clear();
            for (const Leader& l : leaders.leaders)
                params.conf.well_centers.push_back(l.xi);
        } else {
            state = step(state, params, sc.solver, engine, dt, &diag);
        }
        if (state.t >= next_snap - eps) {
            state.t = std::min(next_snap, sc.t_end); // snap sampled times exactly
            leaders.t = state.t;
            emit();
            next_snap += sc.snapshot_stride;
        }
    }
    if (diag.vacuum_warning)
        log.line("vacuum warning: density floor added mass " + num(diag.floor_mass_added));
    log.line("final mass " + num(integrate(state.rho)) + " after " + std::to_string(emitted) +
             " snapshots");
    if (coupled)
        log.line(std::string("leaders in region: ") + (leaders_in_region ? "yes" : "NO"));

    energy_csv.close();
    mb.add(dir, "energy.csv");
    if (coupled) {
        leaders_csv.close();
        mb.add(dir, "leaders.csv");
    }
    json extra;
    extra["snapshots"] = snap_index;
    if (coupled)
        extra["leaders_in_region"] = leaders_in_region;
    write_manifest(dir, sc, mb, "ok", extra);
    return {0, "ok"};
}

RunOutcome run_particles(const Scenario& sc, const std::string& dir, Logger& log,
                         ManifestBuilder& mb) {
    const GridMask mask = rasterize(sc.domain, sc.resolution);
    ParticleEnsemble ens = sample_initial(sc.domain, sc.particle_count, sc.particle_density,
                                          sc.particle_velocity, sc.seed);
    ens.t = sc.t0;

    std::ofstream traj(dir + "/trajectory.csv");
    traj << "t,id,x,y,z,vx,vy,vz\n";
    const auto write_rows = [&]() {
        for (std::size_t i = 0; i < ens.size(); ++i)
            traj << num(ens.t) << "," << (i + 1) << "," << num(ens.x[i].x) << ","
                 << num(ens.x[i].y) << "," << num(ens.x[i].z) << "," << num(ens.v[i].x) << ","
                 << num(ens.v[i].y) << "," << num(ens.v[i].z) << "\n";
    };

    int snap_index = 0;
    const auto emit_moments = [&]() {
        auto [rho, mom] = deposit(ens, mask);
        FluidState state(mask);
        state.t = ens.t;
        state.rho = std::move(rho);
        state.j = std::move(mom);
        const std::string rel = snapshot_name(snap_index++);
        write_eulf(dir + "/" + rel, state);
        mb.add(dir, rel);
    };

    const long snap_steps =
        std::max<long>(1, std::lround(sc.snapshot_stride / sc.particle_dt));
    const long total_steps = std::lround((sc.t_end - sc.t0) / sc.particle_dt);
    write_rows();
    emit_moments();
    for (long s = 1; s <= total_steps; ++s) {
        ens = step(sc.domain, ens, sc.params, sc.particle_dt);
        if (s % std::max(1, sc.particle_output_stride) == 0 || s == total_steps)
            write_rows();
        if (s % snap_steps == 0 || s == total_steps)
            emit_moments();
    }
    log.line("advanced " + std::to_string(total_steps) + " particle steps, N = " +
             std::to_string(ens.size()));

    traj.close();
    mb.add(dir, "trajectory.csv");
    json extra;
    extra["snapshots"] = snap_index;
    write_manifest(dir, sc, mb, "ok", extra);
    return {0, "ok"};
}

RunOutcome run_construct(const Scenario& sc, const std::string& dir, Logger& log,
                         ManifestBuilder& mb) {
    const GridMask mask = rasterize(sc.domain, sc.resolution);

    // breathing density: rho0(x) (1 + amp sin(2 pi t / T) g(x)), renormalized
    std::vector<double> times(std::size_t(sc.construct_samples));
    std::vector<ScalarField> rhos;
    const double T = sc.t_end - sc.t0;
    const Vec3 c = sc.domain.center();
    ScalarField base(mask), shape(mask);
    for (int cell : mask.cells) {
        const Vec3 x = mask.cell_center(cell);
        base[cell] = sc.hydro_density.value(x);
        const Vec3 d = x - c;
        shape[cell] = std::exp(-dot(d, d) / (2.0 * sc.construct_sigma * sc.construct_sigma));
    }
    for (int s = 0; s < sc.construct_samples; ++s) {
        times[std::size_t(s)] = sc.t0 + T * double(s) / double(sc.construct_samples - 1);
        ScalarField rho(mask);
        const double osc = sc.construct_amp * std::sin(2.0 * M_PI * double(s) /
                                                       double(sc.construct_samples - 1));
        for (int cell : mask.cells)
            rho[cell] = base[cell] * (1.0 + osc * shape[cell]);
        const double mass = integrate(rho);
        for (int cell : mask.cells)
            rho[cell] /= mass;
        rhos.push_back(std::move(rho));
    }
    const DensityPath path = make_density_path(mask, times, std::move(rhos));
    const VectorField v0 = make_curl_field(mask, sc.construct_v0);
    const std::vector<VectorField> momenta = momentum_from_density(path, v0);

    std::ofstream cont(dir + "/continuity.csv");
    cont << "t,residual_linf,residual_l2\n";
    for (std::size_t s = 0; s < path.times.size(); ++s) {
        FluidState state(mask);
        state.t = path.times[s];
        state.rho = path.rho[s];
        state.j = momenta[s];
        const std::string rel = snapshot_name(int(s));
        write_eulf(dir + "/" + rel, state);
        mb.add(dir, rel);

        const ScalarField div = divergence_mirror(momenta[s]);
        double linf = 0.0, l2 = 0.0;
        for (int cell : mask.cells) {
            const double r = path.rho_dot[s][cell] + div[cell];
            linf = std::max(linf, std::fabs(r));
            l2 += r * r;
        }
        l2 = std::sqrt(l2 * mask.cell_volume());
        cont << num(path.times[s]) << "," << num(linf) << "," << num(l2) << "\n";
    }
    cont.close();
    mb.add(dir, "continuity.csv");
    log.line("constructed " + std::to_string(path.times.size()) + " momentum samples");
    json extra;
    extra["snapshots"] = int(path.times.size());
    write_manifest(dir, sc, mb, "ok", extra);
    return {0, "ok"};
}

} // namespace

RunOutcome run_scenario(const Scenario& sc, const std::string& out_dir) {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/snapshots");
    {
        std::ofstream cfg(out_dir + "/config.normalized");
        cfg << sc.normalized();
    }
    Logger log(out_dir + "/run.log");
    ManifestBuilder mb;
    try {
        switch (sc.mode) {
        case RunMode::Hydro:
        case RunMode::Coupled:
            return run_hydro_like(sc, out_dir, log, mb);
        case RunMode::Particles:
            return run_particles(sc, out_dir, log, mb);
        case RunMode::Construct:
            return run_construct(sc, out_dir, log, mb);
        }
    } catch (const Error& e) {
        log.line(std::string("solver error: ") + e.what());
        write_manifest(out_dir, sc, mb, std::string("error: ") + e.what());
        return {3, e.what()};
    }
    return {3, "unreachable"};
}

LoadedRun load_run(const std::string& dir) {
    ValidationResult vr = validate_file(dir + "/config.normalized");
    if (!vr.ok()) {
        std::string msg = "load_run: stored config invalid:";
        for (const std::string& e : vr.errors)
            msg += " " + e;
        throw ConfigError(msg);
    }
    LoadedRun run;
    run.scenario = *vr.scenario;
    run.mask = std::make_shared<GridMask>(rasterize(run.scenario.domain, run.scenario.resolution));
    for (int index = 0;; ++index) {
        const std::string path = dir + "/" + snapshot_name(index);
        if (!fs::exists(path))
            break;
        run.states.push_back(read_eulf(path, *run.mask));
        run.times.push_back(run.states.back().t);
    }
    if (run.states.empty())
        throw ArgumentError("load_run: no snapshots in " + dir);
    return run;
}

RunOutcome verify_energy(const std::string& dir) {
    const LoadedRun run = load_run(dir);
    ConvolutionEngine engine(*run.mask);
    const EnergyReport report =
        check_inequality(run.states, run.scenario.params, engine, run.scenario.energy_c_tol);

    std::ofstream csv(dir + "/energy.csv");
    csv << "t,kinetic,interaction,rhs_alignment,rhs_confinement,rhs_propulsion,slack\n";
    for (const EnergySample& row : report.rows)
        csv << num(row.t) << "," << num(row.kinetic) << "," << num(row.interaction) << ","
            << num(row.rhs_alignment) << "," << num(row.rhs_confinement) << ","
            << num(row.rhs_propulsion) << "," << num(row.slack) << "\n";

    json verdict;
    verdict["pass"] = report.pass;
    verdict["tol"] = report.tol;
    verdict["min_slack"] = report.min_slack;
    std::ofstream out(dir + "/energy_verdict.json");
    out << verdict.dump(2) << "\n";
    return report.pass ? RunOutcome{0, "energy inequality PASS"}
                       : RunOutcome{4, "energy inequality FAIL"};
}

RunOutcome verify_weak(const std::string& dir) {
    const LoadedRun run = load_run(dir);
    ConvolutionEngine engine(*run.mask);
    std::vector<ScalarField> rho;
    std::vector<VectorField> j;
    std::vector<PotentialSet> pots;
    for (const FluidState& s : run.states) {
        rho.push_back(s.rho);
        j.push_back(s.j);
        pots.push_back(potentials(*run.mask, s.rho, s.j, run.scenario.params.kernels,
                                  run.scenario.params.conf, engine));
    }
    const TestFunctionBank bank = TestFunctionBank::defaults(
        run.scenario.domain, *run.mask, run.times.front(), run.times.back());
    const auto rows = weak_residual(run.times, rho, j, pots, run.scenario.params, bank);

    std::ofstream csv(dir + "/weak_residual.csv");
    csv << "test-id,kind,absolute,normalized\n";
    double worst = 0.0;
    const bool construct_mode = run.scenario.mode == RunMode::Construct;
    for (const WeakResidualRow& row : rows) {
        csv << row.test_id << "," << row.kind << "," << num(row.absolute) << ","
            << num(row.normalized) << "\n";
        if (!construct_mode || row.kind == "mass")
            worst = std::max(worst, row.normalized);
    }
    const bool pass = worst <= run.scenario.weak_tol;
    json verdict;
    verdict["pass"] = pass;
    verdict["max_normalized_residual"] = worst;
    verdict["tol"] = run.scenario.weak_tol;
    verdict["judged"] = construct_mode ? "mass" : "mass+momentum";
    std::ofstream out(dir + "/weak_verdict.json");
    out << verdict.dump(2) << "\n";
    return pass ? RunOutcome{0, "weak residuals PASS"} : RunOutcome{4, "weak residuals FAIL"};
}

RunOutcome compare_runs(const std::string& dir_a, const std::string& dir_b) {
    const LoadedRun a = load_run(dir_a);
    const LoadedRun b = load_run(dir_b);
    if (!a.mask->compatible(*b.mask))
        throw ArgumentError("compare: runs use incompatible masks");

    const bool particle_vs_hydro =
        a.scenario.mode == RunMode::Particles && b.scenario.mode != RunMode::Particles;

    if (particle_vs_hydro) {
        std::ofstream csv(dir_a + "/compare.csv");
        csv << "t,l1_discrepancy,budget_mc,budget_disc\n";
        bool pass = true;
        double last_l1 = 0.0, last_budget = 0.0;
        for (std::size_t s = 0; s < a.times.size(); ++s) {
            // match by time
            std::size_t match = b.times.size();
            for (std::size_t q = 0; q < b.times.size(); ++q)
                if (std::fabs(b.times[q] - a.times[s]) <= 1e-9) {
                    match = q;
                    break;
                }
            if (match == b.times.size())
                continue;
            const double l1 = l1_distance(a.states[s].rho, b.states[match].rho);
            // binomial-count budget: sqrt(2/(pi N h^3)) sum_c sqrt(rho_c) h^3
            const GridMask& m = *a.mask;
            double sum_sqrt = 0.0;
            for (int cell : m.cells)
                sum_sqrt += std::sqrt(std::max(b.states[match].rho[cell], 0.0));
            sum_sqrt *= m.cell_volume();
            const double n_part = double(a.scenario.particle_count);
            const double budget_mc =
                std::sqrt(2.0 / (M_PI * n_part * m.cell_volume())) * sum_sqrt;
            // first-order budget: h * total variation of the hydro density
            double tv = 0.0;
            for (int cell : m.cells) {
                int i, j, k;
                m.unflat(cell, i, j, k);
                if (m.is_inside(i + 1, j, k))
                    tv += std::fabs(b.states[match].rho[m.flat(i + 1, j, k)] -
                                    b.states[match].rho[cell]);
                if (m.is_inside(i, j + 1, k))
                    tv += std::fabs(b.states[match].rho[m.flat(i, j + 1, k)] -
                                    b.states[match].rho[cell]);
                if (m.is_inside(i, j, k + 1))
                    tv += std::fabs(b.states[match].rho[m.flat(i, j, k + 1)] -
                                    b.states[match].rho[cell]);
            }
            const double budget_disc = m.h * tv * m.h * m.h; // h * TV, faces weighted h^2
            csv << num(a.times[s]) << "," << num(l1) << "," << num(budget_mc) << ","
                << num(budget_disc) << "\n";
            last_l1 = l1;
            last_budget = budget_mc + budget_disc;
            if (l1 > 3.0 * (budget_mc + budget_disc))
                pass = false;
        }
        json verdict;
        verdict["pass"] = pass;
        verdict["final_l1"] = last_l1;
        verdict["final_budget"] = last_budget;
        std::ofstream out(dir_a + "/compare_verdict.json");
        out << verdict.dump(2) << "\n";
        return pass ? RunOutcome{0, "moment consistency PASS"}
                    : RunOutcome{4, "moment consistency FAIL"};
    }

    // hydro vs hydro: relative energy + Gronwall
    std::ofstream csv(dir_a + "/relative_energy.csv");
    csv << "t,relative_energy\n";
    std::vector<double> times, E;
    for (std::size_t s = 0; s < a.times.size() && s < b.times.size(); ++s) {
        if (std::fabs(a.times[s] - b.times[s]) > 1e-9)
            throw ArgumentError("compare: snapshot times differ between runs");
        const double e = relative_energy(a.states[s], b.states[s]);
        csv << num(a.times[s]) << "," << num(e) << "\n";
        times.push_back(a.times[s]);
        E.push_back(e);
    }
    const GronwallResult g = gronwall_check(times, E);
    json verdict;
    verdict["pass"] = g.pass;
    verdict["c_fit"] = g.c_fit;
    verdict["max_ratio"] = g.max_ratio;
    verdict["initial_relative_energy"] = E.front();
    std::ofstream out(dir_a + "/compare_verdict.json");
    out << verdict.dump(2) << "\n";
    return g.pass ? RunOutcome{0, "Gronwall PASS"} : RunOutcome{4, "Gronwall FAIL"};
}

RunOutcome run_steer(const Scenario& sc, const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream cfg(out_dir + "/config.normalized");
        cfg << sc.normalized();
    }
    const GridMask mask = rasterize(sc.domain, sc.resolution);

    SteerContext ctx;
    ctx.mask = &mask;
    ctx.domain = sc.domain;
    ctx.params = sc.params;
    ctx.options = sc.solver;
    ctx.force = sc.force;
    ctx.region = leader_region(sc.domain, sc.region_margin);
    ctx.leaders0 = sc.leaders0;
    ctx.fluid0 = hydro_initial_state(mask, sc.hydro_density, sc.hydro_velocity, sc.t0);
    ctx.horizon = sc.t_end - sc.t0;
    ctx.pieces = sc.steer_pieces;
    ctx.initial_step = sc.steer_step;

    ScalarField target(mask);
    for (int cell : mask.cells)
        target[cell] = sc.steer_target.value(mask.cell_center(cell));
    const double mass = integrate(target);
    for (int cell : mask.cells)
        target[cell] /= mass;

    const SteerResult res = steer_to_target(ctx, target, sc.steer_budget);

    json report;
    report["achieved_l1"] = res.achieved_l1;
    report["seed_l1"] = res.seed_l1;
    report["evaluations"] = res.evaluations;
    json sched = json::array();
    for (const auto& leader : res.schedule) {
        json pieces = json::array();
        for (const Vec3& f : leader)
            pieces.push_back({f.x, f.y, f.z});
        sched.push_back(pieces);
    }
    report["schedule"] = sched;
    std::ofstream out(out_dir + "/steer_report.json");
    out << report.dump(2) << "\n";
    return {0, "steer finished, L1 " + num(res.achieved_l1)};
}

int selftest() {
    int failures = 0;
    const auto check = [&](const char* name, bool ok) {
        std::printf("%-52s %s\n", name, ok ? "PASS" : "FAIL");
        if (!ok)
            ++failures;
    };

    // reflection isometry and involution over random samples
    {
        CounterRng rng(2024, 3);
        double worst_iso = 0.0, worst_inv = 0.0;
        for (int s = 0; s < 10000; ++s) {
            Vec3 v{rng.normal(6 * s), rng.normal(6 * s + 1), rng.normal(6 * s + 2)};
            Vec3 nu{rng.normal(6 * s + 3), rng.normal(6 * s + 4), rng.normal(6 * s + 5)};
            nu = normalized(nu);
            if (norm(nu) == 0.0)
                continue;
            const Vec3 r = reflect(v, nu);
            worst_iso = std::max(worst_iso, std::fabs(norm(r) - norm(v)) /
                                                std::max(norm(v), 1e-300));
            worst_inv = std::max(worst_inv, norm(reflect(r, nu) - v));
        }
        check("reflect: isometry over 10^4 samples", worst_iso <= 1e-14);
        check("reflect: double reflection is identity", worst_inv <= 1e-13);
    }

    // kernel closed forms
    {
        const KernelSpec yk{KernelFamily::Yukawa, 1.0, 1.0, KernelRole::Alignment};
        check("kernel: Yukawa eval closed form",
              std::fabs(kernel_eval(yk, 1.0) - std::exp(-1.0)) < 1e-15);
        const Vec3 g = kernel_grad(yk, Vec3{1, 0, 0});
        check("kernel: Yukawa grad closed form",
              std::fabs(g.x + 2.0 * std::exp(-1.0)) < 1e-14 && g.y == 0.0 && g.z == 0.0);
        const KernelSpec bs{KernelFamily::Bessel, 1.0, 2.0, KernelRole::Alignment};
        check("kernel: Bessel order 2 equals Yukawa / 4 pi",
              std::fabs(kernel_eval(bs, 1.0) - std::exp(-1.0) / (4.0 * M_PI)) < 1e-12);
    }

    // convolution: direct sum vs transform on a small obstacle mask
    {
        DomainSpec dom;
        dom.obstacles.push_back({{0.5, 0.5, 0.5}, 0.2});
        const GridMask mask = rasterize(dom, 16);
        ScalarField f(mask);
        CounterRng rng(7, 1);
        for (std::size_t i = 0; i < mask.cells.size(); ++i)
            f[mask.cells[i]] = rng.uniform(i);
        const KernelSpec spec{KernelFamily::Yukawa, 1.0, 2.0, KernelRole::Alignment};
        const ScalarField via_fft = convolve(mask, f, spec);
        const ScalarField via_sum = convolve_direct(mask, f, spec);
        double worst = 0.0, scale = 0.0;
        for (int cell : mask.cells) {
            worst = std::max(worst, std::fabs(via_fft[cell] - via_sum[cell]));
            scale = std::max(scale, std::fabs(via_sum[cell]));
        }
        check("convolve: transform matches direct sum (1e-12)", worst <= 1e-12 * scale);
    }

    // deposit conserves unit mass
    {
        DomainSpec dom;
        const GridMask mask = rasterize(dom, 16);
        DensityProfile density;
        VelocityInit vel;
        const ParticleEnsemble ens = sample_initial(dom, 2000, density, vel, 99);
        const auto [rho, mom] = deposit(ens, mask);
        check("deposit: total mass 1 (1e-13)", std::fabs(integrate(rho) - 1.0) <= 1e-13);
    }

    // Neumann solve on a manufactured solution
    {
        DomainSpec dom;
        const GridMask mask = rasterize(dom, 16);
        ScalarField g(mask);
        for (int cell : mask.cells) {
            const Vec3 x = mask.cell_center(cell);
            g[cell] = 3.0 * M_PI * M_PI * std::cos(M_PI * x.x) * std::cos(M_PI * x.y) *
                      std::cos(M_PI * x.z);
        }
        const ScalarField phi = solve_neumann(mask, g);
        double err = 0.0;
        for (int cell : mask.cells) {
            const Vec3 x = mask.cell_center(cell);
            err = std::max(err, std::fabs(phi[cell] - std::cos(M_PI * x.x) *
                                                          std::cos(M_PI * x.y) *
                                                          std::cos(M_PI * x.z)));
        }
        check("neumann: manufactured solution within O(h^2)", err < 0.05);
    }

    return failures;
}

} // namespace eulign
