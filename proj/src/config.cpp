#include "eulign/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace eulign {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(text, &pos);
        return pos == text.size();
    } catch (...) {
        return false;
    }
}

bool parse_vec3(const std::string& raw, Vec3& out) {
    std::string s = trim(raw);
    if (!s.empty() && s.front() == '(' && s.back() == ')')
        s = s.substr(1, s.size() - 2);
    std::istringstream in(s);
    std::string part;
    double comp[3];
    for (int d = 0; d < 3; ++d) {
        if (!std::getline(in, part, ','))
            return false;
        if (!parse_double(trim(part), comp[d]))
            return false;
    }
    if (std::getline(in, part, ','))
        return false;
    out = {comp[0], comp[1], comp[2]};
    return true;
}

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string format_vec3(const Vec3& v) {
    return "(" + format_number(v.x) + "," + format_number(v.y) + "," + format_number(v.z) + ")";
}

} // namespace

ConfigMap ConfigMap::parse_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            cfg.errors_.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            cfg.errors_.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        if (cfg.kv_.count(key))
            cfg.errors_.push_back("line " + std::to_string(lineno) + ": duplicate key " + key);
        cfg.kv_[key] = value;
    }
    return cfg;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ConfigMap::get_number(const std::string& key, double fallback) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end())
        return fallback;
    double out;
    if (!parse_double(it->second, out)) {
        errors_.push_back(key + ": not a number: " + it->second);
        return fallback;
    }
    return out;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end())
        return fallback;
    if (it->second == "true" || it->second == "1")
        return true;
    if (it->second == "false" || it->second == "0")
        return false;
    errors_.push_back(key + ": not a boolean: " + it->second);
    return fallback;
}

Vec3 ConfigMap::get_vec3(const std::string& key, const Vec3& fallback) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end())
        return fallback;
    Vec3 out;
    if (!parse_vec3(it->second, out)) {
        errors_.push_back(key + ": not a 3-vector: " + it->second);
        return fallback;
    }
    return out;
}

std::vector<std::string> ConfigMap::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : kv_)
        if (!used_.count(key))
            out.push_back(key);
    return out;
}

namespace {

std::optional<KernelSpec> read_kernel(const ConfigMap& cfg, const std::string& base,
                                      KernelRole role, std::vector<std::string>& errs) {
    const bool present = cfg.has(base + ".family") || cfg.has(base + ".k") ||
                         cfg.has(base + ".lambda") || cfg.has(base + ".enabled");
    if (!cfg.get_bool(base + ".enabled", present))
        return std::nullopt;
    if (!present)
        return std::nullopt;
    KernelSpec spec;
    spec.role = role;
    const std::string family = cfg.get_string(base + ".family", "yukawa");
    if (family == "yukawa") {
        spec.family = KernelFamily::Yukawa;
    } else if (family == "bessel") {
        spec.family = KernelFamily::Bessel;
    } else {
        errs.push_back(base + ".family: must be yukawa or bessel");
    }
    spec.k = cfg.get_number(base + ".k", role == KernelRole::Cohesion ? -1.0 : 1.0);
    spec.lambda = cfg.get_number(base + ".lambda", spec.family == KernelFamily::Bessel ? 2.0 : 1.0);
    const auto kernel_errs = validate_kernel(spec, base);
    errs.insert(errs.end(), kernel_errs.begin(), kernel_errs.end());
    return spec;
}

DensityProfile read_density(const ConfigMap& cfg, const std::string& base, const DomainSpec& dom,
                            std::vector<std::string>& errs) {
    DensityProfile prof;
    const std::string kind = cfg.get_string(base, "uniform");
    if (kind == "uniform") {
        prof.kind = DensityProfile::Kind::Uniform;
    } else if (kind == "gaussian") {
        prof.kind = DensityProfile::Kind::Gaussian;
    } else {
        errs.push_back(base + ": must be uniform or gaussian");
    }
    prof.center = cfg.get_vec3(base + ".center", dom.center());
    prof.sigma = cfg.get_number(base + ".sigma", 0.12 * std::min({dom.extent().x, dom.extent().y,
                                                                  dom.extent().z}));
    prof.baseline = cfg.get_number(base + ".baseline", 0.1);
    if (prof.sigma <= 0.0)
        errs.push_back(base + ".sigma: must be positive");
    if (prof.kind == DensityProfile::Kind::Gaussian && prof.baseline <= 0.0)
        errs.push_back(base + ".baseline: must be positive (rho_0 > 0 everywhere)");
    return prof;
}

VelocityProfile read_velocity_profile(const ConfigMap& cfg, const std::string& base,
                                      const DomainSpec& dom, std::vector<std::string>& errs) {
    VelocityProfile prof;
    prof.constant = cfg.get_vec3(base + ".constant", Vec3{});
    prof.swirl_amp = cfg.get_number(base + ".swirl_amp", 0.0);
    prof.swirl_center = cfg.get_vec3(base + ".swirl_center", dom.center());
    prof.swirl_sigma = cfg.get_number(base + ".swirl_sigma", 0.15);
    prof.swirl_axis = int(cfg.get_number(base + ".swirl_axis", 2));
    prof.perturb_delta = cfg.get_number(base + ".perturb_delta", 0.0);
    prof.perturb_center = cfg.get_vec3(base + ".perturb_center",
                                       dom.center() + Vec3{0.08, -0.05, 0.03});
    prof.perturb_sigma = cfg.get_number(base + ".perturb_sigma", 0.12);
    prof.perturb_axis = int(cfg.get_number(base + ".perturb_axis", 0));
    if (prof.swirl_axis < 0 || prof.swirl_axis > 2)
        errs.push_back(base + ".swirl_axis: must be 0, 1 or 2");
    if (prof.perturb_axis < 0 || prof.perturb_axis > 2)
        errs.push_back(base + ".perturb_axis: must be 0, 1 or 2");
    if (prof.swirl_sigma <= 0.0 || prof.perturb_sigma <= 0.0)
        errs.push_back(base + ": swirl/perturb sigma must be positive");
    return prof;
}

bool parse_schedule(const std::string& raw, std::vector<ControlPiece>& out) {
    out.clear();
    std::istringstream in(raw);
    std::string piece;
    while (std::getline(in, piece, ';')) {
        piece = trim(piece);
        if (piece.empty())
            continue;
        // t_begin : t_end : (fx,fy,fz)
        const auto c1 = piece.find(':');
        if (c1 == std::string::npos)
            return false;
        const auto c2 = piece.find(':', c1 + 1);
        if (c2 == std::string::npos)
            return false;
        ControlPiece cp;
        if (!parse_double(trim(piece.substr(0, c1)), cp.t_begin))
            return false;
        if (!parse_double(trim(piece.substr(c1 + 1, c2 - c1 - 1)), cp.t_end))
            return false;
        if (!parse_vec3(piece.substr(c2 + 1), cp.f))
            return false;
        out.push_back(cp);
    }
    return !out.empty();
}

std::string format_schedule(const std::vector<ControlPiece>& sched) {
    std::string out;
    for (std::size_t i = 0; i < sched.size(); ++i) {
        if (i)
            out += "; ";
        out += format_number(sched[i].t_begin) + ":" + format_number(sched[i].t_end) + ":" +
               format_vec3(sched[i].f);
    }
    return out;
}

} // namespace

ValidationResult validate(const ConfigMap& cfg) {
    ValidationResult result;
    std::vector<std::string>& errs = result.errors;
    Scenario sc;

    const std::string mode = cfg.get_string("mode", "hydro");
    if (mode == "particles")
        sc.mode = RunMode::Particles;
    else if (mode == "hydro")
        sc.mode = RunMode::Hydro;
    else if (mode == "coupled")
        sc.mode = RunMode::Coupled;
    else if (mode == "construct")
        sc.mode = RunMode::Construct;
    else
        errs.push_back("mode: must be particles, hydro, coupled or construct");

    sc.t0 = cfg.get_number("t0", 0.0);
    sc.t_end = cfg.get_number("t_end", 1.0);
    if (sc.t_end <= sc.t0)
        errs.push_back("t_end: must exceed t0");
    sc.seed = std::uint64_t(cfg.get_number("seed", 1));

    // domain
    sc.domain.box_min = cfg.get_vec3("domain.box.min", Vec3{0, 0, 0});
    sc.domain.box_max = cfg.get_vec3("domain.box.max", Vec3{1, 1, 1});
    sc.domain.smoothing = cfg.get_number("domain.smoothing", 0.0);
    for (int b = 1;; ++b) {
        const std::string base = "domain.obstacle." + std::to_string(b);
        if (!cfg.has(base + ".center") && !cfg.has(base + ".radius"))
            break;
        Ball ball;
        ball.center = cfg.get_vec3(base + ".center", sc.domain.center());
        ball.radius = cfg.get_number(base + ".radius", 0.0);
        sc.domain.obstacles.push_back(ball);
    }
    {
        const auto dom_errs = validate_domain(sc.domain);
        errs.insert(errs.end(), dom_errs.begin(), dom_errs.end());
    }

    // kernels
    sc.params.kernels.alignment = read_kernel(cfg, "kernels.alignment", KernelRole::Alignment, errs);
    sc.params.kernels.cohesion = read_kernel(cfg, "kernels.cohesion", KernelRole::Cohesion, errs);
    sc.params.kernels.repulsion = read_kernel(cfg, "kernels.repulsion", KernelRole::Repulsion, errs);

    // model
    sc.params.kappa_p = cfg.get_number("model.kappa_p", 0.0);
    sc.params.prop.s_eq = cfg.get_number("model.equilibrium_speed", 1.0);
    const std::string prop_name = cfg.get_string("model.propulsion_profile", "rational");
    if (prop_name != "rational")
        errs.push_back("model.propulsion_profile: only 'rational' is available");
    const std::string conf_kind = cfg.get_string("model.confinement", "none");
    if (conf_kind == "quadratic") {
        sc.params.conf.quadratic = true;
        sc.params.conf.omega = cfg.get_number("model.confinement.omega", 1.0);
        sc.params.conf.center = cfg.get_vec3("model.confinement.center", sc.domain.center());
    } else if (conf_kind != "none") {
        errs.push_back("model.confinement: must be none or quadratic");
    }
    sc.params.conf.well_amplitude = cfg.get_number("leaders.wells.amplitude", 1.0);
    sc.params.conf.well_sigma = cfg.get_number("leaders.wells.sigma", 0.2);
    if (sc.params.conf.well_sigma <= 0.0)
        errs.push_back("leaders.wells.sigma: must be positive");
    sc.params.seed = sc.seed;
    {
        const auto model_errs = validate_model_params(sc.params);
        errs.insert(errs.end(), model_errs.begin(), model_errs.end());
    }

    // particles
    sc.particle_count = std::size_t(cfg.get_number("particles.count", 1000));
    sc.particle_dt = cfg.get_number("particles.dt", 0.005);
    sc.particle_output_stride = int(cfg.get_number("particles.output_stride", 10));
    if (sc.particle_dt <= 0.0)
        errs.push_back("particles.dt: must be positive");
    if (sc.particle_count < 1)
        errs.push_back("particles.count: must be >= 1");
    sc.particle_density = read_density(cfg, "particles.init.density", sc.domain, errs);
    {
        const std::string vk = cfg.get_string("particles.init.velocity", "monokinetic");
        if (vk == "monokinetic")
            sc.particle_velocity.kind = VelocityInit::Kind::Monokinetic;
        else if (vk == "gaussian")
            sc.particle_velocity.kind = VelocityInit::Kind::Gaussian;
        else
            errs.push_back("particles.init.velocity: must be monokinetic or gaussian");
        sc.particle_velocity.mean = cfg.get_vec3("particles.init.velocity.mean", Vec3{});
        sc.particle_velocity.stddev = cfg.get_number("particles.init.velocity.stddev", 0.1);
    }

    // hydro
    sc.resolution = int(cfg.get_number("hydro.resolution", 32));
    if (sc.resolution < 8)
        errs.push_back("hydro.resolution: must be >= 8");
    sc.solver.cfl = cfg.get_number("hydro.cfl", 0.45);
    if (!(sc.solver.cfl > 0.0 && sc.solver.cfl < 1.0))
        errs.push_back("hydro.cfl: must be in (0, 1)");
    sc.solver.floor = cfg.get_number("hydro.floor", 0.0);
    if (sc.solver.floor < 0.0)
        errs.push_back("hydro.floor: must be >= 0 (0 selects the default)");
    sc.fixed_dt = cfg.get_number("hydro.dt", 0.0);
    if (sc.fixed_dt < 0.0)
        errs.push_back("hydro.dt: must be >= 0 (0 selects CFL-adaptive)");
    sc.snapshot_stride = cfg.get_number("hydro.snapshot_stride", (sc.t_end - sc.t0) / 20.0);
    if (sc.snapshot_stride <= 0.0)
        errs.push_back("hydro.snapshot_stride: must be positive");
    sc.hydro_density = read_density(cfg, "hydro.init.density", sc.domain, errs);
    sc.hydro_velocity = read_velocity_profile(cfg, "hydro.init.velocity", sc.domain, errs);
    // monokinetic particle velocities follow the same u0 profile
    sc.particle_velocity.profile = sc.hydro_velocity;

    sc.energy_c_tol = cfg.get_number("energy.c_tol", 10.0);
    sc.weak_tol = cfg.get_number("weak.tol", 0.1);

    // leaders
    const int leader_count = int(cfg.get_number("leaders.count", 0));
    sc.force.gamma = cfg.get_number("leaders.gamma", 4.0);
    sc.force.f_max = cfg.get_number("leaders.f_max", 1.0);
    sc.force.barrier.strength = cfg.get_number("leaders.barrier.strength", 0.05);
    sc.force.barrier.width = cfg.get_number("leaders.barrier.width", 0.1);
    sc.force.feedback_gain = cfg.get_number("leaders.feedback_gain", 0.0);
    sc.force.rho_grad_bound = cfg.get_number("leaders.rho_grad_bound", 0.0);
    sc.region_margin = cfg.get_number("leaders.margin", 0.1);
    sc.speed_bound = cfg.get_number("leaders.speed_bound", 1.5);
    if (sc.force.gamma < 0.0)
        errs.push_back("leaders.gamma: must be >= 0");
    if (sc.force.barrier.width <= 0.0)
        errs.push_back("leaders.barrier.width: must be positive");
    sc.leaders0.t = sc.t0;
    for (int i = 1; i <= leader_count; ++i) {
        const std::string base = "leaders." + std::to_string(i);
        Leader leader;
        leader.xi = cfg.get_vec3(base + ".position", sc.domain.center());
        leader.upsilon = cfg.get_vec3(base + ".velocity", Vec3{});
        const std::string sched = cfg.get_string(base + ".control", "");
        if (sched.empty()) {
            leader.schedule = {{sc.t0, sc.t_end, Vec3{}}};
        } else if (!parse_schedule(sched, leader.schedule)) {
            errs.push_back(base + ".control: cannot parse schedule");
        }
        sc.leaders0.leaders.push_back(leader);
    }
    if (sc.mode == RunMode::Coupled && leader_count < 1)
        errs.push_back("leaders.count: coupled mode needs at least one leader");
    {
        const auto sched_errs = validate_schedules(sc.leaders0, sc.t0, sc.t_end);
        errs.insert(errs.end(), sched_errs.begin(), sched_errs.end());
    }

    // steering
    sc.steer_pieces = int(cfg.get_number("steer.pieces", 2));
    sc.steer_budget = int(cfg.get_number("steer.budget", 40));
    sc.steer_step = cfg.get_number("steer.step", 0.5);
    if (sc.steer_pieces < 1)
        errs.push_back("steer.pieces: must be >= 1");
    if (sc.steer_budget < 1)
        errs.push_back("steer.budget: must be >= 1");
    sc.steer_target = read_density(cfg, "steer.target", sc.domain, errs);

    // construct mode
    sc.construct_samples = int(cfg.get_number("construct.samples", 21));
    if (sc.construct_samples < 3)
        errs.push_back("construct.samples: must be >= 3");
    sc.construct_amp = cfg.get_number("construct.amp", 0.3);
    sc.construct_sigma = cfg.get_number("construct.sigma", 0.18);
    if (std::fabs(sc.construct_amp) >= 0.9)
        errs.push_back("construct.amp: |amp| must stay below 0.9 (rho > 0)");
    sc.construct_v0.amp = cfg.get_number("construct.v0.amp", 1.0);
    sc.construct_v0.center = cfg.get_vec3("construct.v0.center", sc.domain.center());
    const Vec3 default_hw = sc.domain.extent() * 0.3;
    sc.construct_v0.halfwidth = cfg.get_vec3("construct.v0.halfwidth", default_hw);
    sc.construct_v0.axis = int(cfg.get_number("construct.v0.axis", 2));
    if (sc.construct_v0.axis < 0 || sc.construct_v0.axis > 2)
        errs.push_back("construct.v0.axis: must be 0, 1 or 2");

    // initial density positivity on the mask (names the first bad cell)
    if (errs.empty() && sc.mode != RunMode::Particles) {
        try {
            const GridMask mask = rasterize(sc.domain, sc.resolution);
            const DensityProfile& prof =
                sc.mode == RunMode::Construct ? sc.hydro_density : sc.hydro_density;
            for (int cell : mask.cells) {
                if (prof.value(mask.cell_center(cell)) <= 0.0) {
                    int i, j, k;
                    mask.unflat(cell, i, j, k);
                    std::ostringstream msg;
                    msg << "hydro.init.density: nonpositive at cell (" << i << "," << j << ","
                        << k << ")";
                    errs.push_back(msg.str());
                    break;
                }
            }
        } catch (const Error& e) {
            errs.push_back(std::string("domain: ") + e.what());
        }
    }

    // syntax / unknown keys
    for (const std::string& err : cfg.parse_errors())
        errs.push_back(err);
    for (const std::string& key : cfg.unused_keys())
        errs.push_back("unknown key: " + key);

    if (errs.empty())
        result.scenario = std::move(sc);
    return result;
}

ValidationResult validate_file(const std::string& path) {
    try {
        return validate(ConfigMap::parse_file(path));
    } catch (const Error& e) {
        ValidationResult r;
        r.errors.push_back(e.what());
        return r;
    }
}

std::string Scenario::normalized() const {
    ConfigMap out;
    switch (mode) {
    case RunMode::Particles: out.set("mode", "particles"); break;
    case RunMode::Hydro: out.set("mode", "hydro"); break;
    case RunMode::Coupled: out.set("mode", "coupled"); break;
    case RunMode::Construct: out.set("mode", "construct"); break;
    }
    out.set("t0", format_number(t0));
    out.set("t_end", format_number(t_end));
    out.set("seed", format_number(double(seed)));

    out.set("domain.box.min", format_vec3(domain.box_min));
    out.set("domain.box.max", format_vec3(domain.box_max));
    out.set("domain.smoothing", format_number(domain.smoothing));
    for (std::size_t b = 0; b < domain.obstacles.size(); ++b) {
        const std::string base = "domain.obstacle." + std::to_string(b + 1);
        out.set(base + ".center", format_vec3(domain.obstacles[b].center));
        out.set(base + ".radius", format_number(domain.obstacles[b].radius));
    }

    const auto put_kernel = [&](const char* base, const std::optional<KernelSpec>& spec) {
        if (!spec) {
            out.set(std::string(base) + ".enabled", "false");
            return;
        }
        out.set(std::string(base) + ".enabled", "true");
        out.set(std::string(base) + ".family",
                spec->family == KernelFamily::Yukawa ? "yukawa" : "bessel");
        out.set(std::string(base) + ".k", format_number(spec->k));
        out.set(std::string(base) + ".lambda", format_number(spec->lambda));
    };
    put_kernel("kernels.alignment", params.kernels.alignment);
    put_kernel("kernels.cohesion", params.kernels.cohesion);
    put_kernel("kernels.repulsion", params.kernels.repulsion);

    out.set("model.kappa_p", format_number(params.kappa_p));
    out.set("model.propulsion_profile", "rational");
    out.set("model.equilibrium_speed", format_number(params.prop.s_eq));
    out.set("model.confinement", params.conf.quadratic ? "quadratic" : "none");
    if (params.conf.quadratic) {
        out.set("model.confinement.omega", format_number(params.conf.omega));
        out.set("model.confinement.center", format_vec3(params.conf.center));
    }

    out.set("particles.count", format_number(double(particle_count)));
    out.set("particles.dt", format_number(particle_dt));
    out.set("particles.output_stride", format_number(particle_output_stride));
    out.set("particles.init.density",
            particle_density.kind == DensityProfile::Kind::Uniform ? "uniform" : "gaussian");
    out.set("particles.init.density.center", format_vec3(particle_density.center));
    out.set("particles.init.density.sigma", format_number(particle_density.sigma));
    out.set("particles.init.density.baseline", format_number(particle_density.baseline));
    out.set("particles.init.velocity",
            particle_velocity.kind == VelocityInit::Kind::Monokinetic ? "monokinetic"
                                                                      : "gaussian");
    out.set("particles.init.velocity.mean", format_vec3(particle_velocity.mean));
    out.set("particles.init.velocity.stddev", format_number(particle_velocity.stddev));

    out.set("hydro.resolution", format_number(resolution));
    out.set("hydro.cfl", format_number(solver.cfl));
    out.set("hydro.floor", format_number(solver.floor));
    out.set("hydro.dt", format_number(fixed_dt));
    out.set("hydro.snapshot_stride", format_number(snapshot_stride));
    out.set("hydro.init.density",
            hydro_density.kind == DensityProfile::Kind::Uniform ? "uniform" : "gaussian");
    out.set("hydro.init.density.center", format_vec3(hydro_density.center));
    out.set("hydro.init.density.sigma", format_number(hydro_density.sigma));
    out.set("hydro.init.density.baseline", format_number(hydro_density.baseline));
    out.set("hydro.init.velocity.constant", format_vec3(hydro_velocity.constant));
    out.set("hydro.init.velocity.swirl_amp", format_number(hydro_velocity.swirl_amp));
    out.set("hydro.init.velocity.swirl_center", format_vec3(hydro_velocity.swirl_center));
    out.set("hydro.init.velocity.swirl_sigma", format_number(hydro_velocity.swirl_sigma));
    out.set("hydro.init.velocity.swirl_axis", format_number(hydro_velocity.swirl_axis));
    out.set("hydro.init.velocity.perturb_delta", format_number(hydro_velocity.perturb_delta));
    out.set("hydro.init.velocity.perturb_center", format_vec3(hydro_velocity.perturb_center));
    out.set("hydro.init.velocity.perturb_sigma", format_number(hydro_velocity.perturb_sigma));
    out.set("hydro.init.velocity.perturb_axis", format_number(hydro_velocity.perturb_axis));

    out.set("energy.c_tol", format_number(energy_c_tol));
    out.set("weak.tol", format_number(weak_tol));

    out.set("leaders.count", format_number(double(leaders0.leaders.size())));
    out.set("leaders.gamma", format_number(force.gamma));
    out.set("leaders.f_max", format_number(force.f_max));
    out.set("leaders.barrier.strength", format_number(force.barrier.strength));
    out.set("leaders.barrier.width", format_number(force.barrier.width));
    out.set("leaders.feedback_gain", format_number(force.feedback_gain));
    out.set("leaders.rho_grad_bound", format_number(force.rho_grad_bound));
    out.set("leaders.margin", format_number(region_margin));
    out.set("leaders.speed_bound", format_number(speed_bound));
    out.set("leaders.wells.amplitude", format_number(params.conf.well_amplitude));
    out.set("leaders.wells.sigma", format_number(params.conf.well_sigma));
    for (std::size_t i = 0; i < leaders0.leaders.size(); ++i) {
        const std::string base = "leaders." + std::to_string(i + 1);
        out.set(base + ".position", format_vec3(leaders0.leaders[i].xi));
        out.set(base + ".velocity", format_vec3(leaders0.leaders[i].upsilon));
        out.set(base + ".control", format_schedule(leaders0.leaders[i].schedule));
    }

    out.set("steer.pieces", format_number(steer_pieces));
    out.set("steer.budget", format_number(steer_budget));
    out.set("steer.step", format_number(steer_step));
    out.set("steer.target",
            steer_target.kind == DensityProfile::Kind::Uniform ? "uniform" : "gaussian");
    out.set("steer.target.center", format_vec3(steer_target.center));
    out.set("steer.target.sigma", format_number(steer_target.sigma));
    out.set("steer.target.baseline", format_number(steer_target.baseline));

    out.set("construct.samples", format_number(construct_samples));
    out.set("construct.amp", format_number(construct_amp));
    out.set("construct.sigma", format_number(construct_sigma));
    out.set("construct.v0.amp", format_number(construct_v0.amp));
    out.set("construct.v0.center", format_vec3(construct_v0.center));
    out.set("construct.v0.halfwidth", format_vec3(construct_v0.halfwidth));
    out.set("construct.v0.axis", format_number(construct_v0.axis));

    std::string text;
    for (const auto& [key, value] : out.entries())
        text += key + " = " + value + "\n";
    return text;
}

} // namespace eulign
