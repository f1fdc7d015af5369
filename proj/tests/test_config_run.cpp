#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "eulign/run.hpp"

using namespace eulign;
namespace fs = std::filesystem;

namespace {

std::string minimal_hydro_cfg() {
    return "mode = hydro\n"
           "t_end = 0.1\n"
           "hydro.resolution = 16\n"
           "hydro.snapshot_stride = 0.05\n"
           "kernels.alignment.k = 1\n"
           "kernels.alignment.lambda = 1\n";
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("config parsing basics") {
    const ConfigMap cfg = ConfigMap::parse_text("a.b = 1.5\n# comment\nname = yukawa\n"
                                                "vec = (1, 2, 3)\nflag = true\n");
    CHECK(cfg.get_number("a.b", 0.0) == 1.5);
    CHECK(cfg.get_string("name", "") == "yukawa");
    CHECK(norm(cfg.get_vec3("vec", {}) - Vec3{1, 2, 3}) == 0.0);
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_number("missing", 7.0) == 7.0);
    CHECK(cfg.unused_keys().empty());

    const ConfigMap bad = ConfigMap::parse_text("x 1\n");
    CHECK_FALSE(bad.parse_errors().empty());
}

TEST_CASE("validate: constraint violations are all reported by name") {
    // cohesion must have negative k
    {
        const auto vr = validate(ConfigMap::parse_text("kernels.cohesion.k = 1\n"));
        REQUIRE_FALSE(vr.ok());
        bool found = false;
        for (const auto& e : vr.errors)
            found = found || e.find("kernels.cohesion.k must be negative") != std::string::npos;
        CHECK(found);
    }
    // nonpositive screening rate
    {
        const auto vr =
            validate(ConfigMap::parse_text("kernels.alignment.k = 1\nkernels.alignment.lambda = -2\n"));
        REQUIRE_FALSE(vr.ok());
    }
    // initial density with a nonpositive cell names the cell
    {
        const auto vr = validate(ConfigMap::parse_text(
            "hydro.init.density = gaussian\nhydro.init.density.baseline = -0.5\n"));
        REQUIRE_FALSE(vr.ok());
        bool found = false;
        for (const auto& e : vr.errors)
            found = found || e.find("nonpositive at cell") != std::string::npos;
        CHECK(found);
    }
    // unknown keys are rejected
    {
        const auto vr = validate(ConfigMap::parse_text("no.such.key = 3\n"));
        REQUIRE_FALSE(vr.ok());
        CHECK(vr.errors.front().find("unknown key") != std::string::npos);
    }
    // control schedule must cover [t0, t_end]
    {
        const auto vr = validate(ConfigMap::parse_text(
            "mode = coupled\nleaders.count = 1\nleaders.1.control = 0:0.4:(1,0,0)\n"));
        REQUIRE_FALSE(vr.ok());
    }
}

TEST_CASE("validate + normalize is idempotent") {
    const auto vr = validate(ConfigMap::parse_text(minimal_hydro_cfg()));
    REQUIRE(vr.ok());
    const std::string normal = vr.scenario->normalized();
    const auto vr2 = validate(ConfigMap::parse_text(normal));
    REQUIRE(vr2.ok());
    CHECK(vr2.scenario->normalized() == normal);
}

TEST_CASE("EULF snapshots round-trip bitwise") {
    const GridMask mask = rasterize(DomainSpec{}, 16);
    DensityProfile prof;
    prof.kind = DensityProfile::Kind::Gaussian;
    prof.center = {0.4, 0.55, 0.5};
    prof.sigma = 0.2;
    prof.baseline = 0.3;
    VelocityProfile vel;
    vel.constant = {0.3, -0.1, 0.05};
    const FluidState state = hydro_initial_state(mask, prof, vel, 0.75);

    TempDir tmp("eulign_eulf_test");
    const std::string path = tmp.str() + "/state.eulf";
    write_eulf(path, state);
    const FluidState back = read_eulf(path, mask);
    CHECK(back.t == state.t);
    CHECK(back.rho.v == state.rho.v);
    CHECK(back.j.c[0] == state.j.c[0]);
    CHECK(back.j.c[2] == state.j.c[2]);

    const GridMask other = rasterize(DomainSpec{}, 8);
    CHECK_THROWS_AS((void)read_eulf(path, other), ArgumentError);
}

TEST_CASE("hydro run directory: equilibrium slack, reload, determinism") {
    TempDir tmp("eulign_run_test");
    // uniform density, zero velocity: exact equilibrium
    const std::string cfg_text = "mode = hydro\n"
                                 "t_end = 0.1\n"
                                 "hydro.resolution = 16\n"
                                 "hydro.snapshot_stride = 0.02\n"
                                 "kernels.alignment.k = 1\n"
                                 "kernels.alignment.lambda = 1\n";
    const auto vr = validate(ConfigMap::parse_text(cfg_text));
    REQUIRE(vr.ok());

    const std::string dir_a = tmp.str() + "/a";
    const std::string dir_b = tmp.str() + "/b";
    CHECK(run_scenario(*vr.scenario, dir_a).exit_code == 0);
    CHECK(run_scenario(*vr.scenario, dir_b).exit_code == 0);

    // identical runs produce identical output hashes
    CHECK(fnv1a_hex(dir_a + "/snapshots/state_000004.eulf") ==
          fnv1a_hex(dir_b + "/snapshots/state_000004.eulf"));
    CHECK(fnv1a_hex(dir_a + "/energy.csv") == fnv1a_hex(dir_b + "/energy.csv"));

    const LoadedRun run = load_run(dir_a);
    CHECK(run.states.size() >= 5);
    CHECK(std::fabs(integrate(run.states.back().rho) - 1.0) <= 1e-12);

    // the equilibrium trajectory passes verify-energy with tiny slack
    const RunOutcome verdict = verify_energy(dir_a);
    CHECK(verdict.exit_code == 0);

    // verify-weak judges the residual table
    const RunOutcome weak = verify_weak(dir_a);
    CHECK(weak.exit_code == 0);

    // relative energy of a run against itself is identically zero
    const RunOutcome cmp = compare_runs(dir_a, dir_b);
    CHECK(cmp.exit_code == 0);
    CHECK(fs::exists(dir_a + "/relative_energy.csv"));
}

TEST_CASE("particle run writes trajectory and moment snapshots") {
    TempDir tmp("eulign_particle_run");
    const std::string cfg_text = "mode = particles\n"
                                 "t_end = 0.05\n"
                                 "seed = 9\n"
                                 "particles.count = 200\n"
                                 "particles.dt = 0.005\n"
                                 "hydro.resolution = 16\n"
                                 "hydro.snapshot_stride = 0.025\n"
                                 "kernels.alignment.k = 1\n"
                                 "kernels.alignment.lambda = 1\n";
    const auto vr = validate(ConfigMap::parse_text(cfg_text));
    REQUIRE(vr.ok());
    const std::string dir = tmp.str() + "/p";
    CHECK(run_scenario(*vr.scenario, dir).exit_code == 0);
    CHECK(fs::exists(dir + "/trajectory.csv"));
    const LoadedRun run = load_run(dir);
    CHECK(run.states.size() >= 3);
    CHECK(std::fabs(integrate(run.states.front().rho) - 1.0) <= 1e-12);
}

TEST_CASE("construct run emits a consistent density/momentum family") {
    TempDir tmp("eulign_construct_run");
    const std::string cfg_text = "mode = construct\n"
                                 "t_end = 1\n"
                                 "hydro.resolution = 16\n"
                                 "construct.samples = 9\n";
    const auto vr = validate(ConfigMap::parse_text(cfg_text));
    REQUIRE(vr.ok());
    const std::string dir = tmp.str() + "/c";
    CHECK(run_scenario(*vr.scenario, dir).exit_code == 0);
    CHECK(fs::exists(dir + "/continuity.csv"));
    const RunOutcome weak = verify_weak(dir);
    CHECK(weak.exit_code == 0);
}
