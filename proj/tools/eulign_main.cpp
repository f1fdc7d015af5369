#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eulign/run.hpp"

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("EULIGN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            omp_set_num_threads(n);
    }
#endif
}

std::string default_out_dir(const std::string& cfg_path) {
    const std::filesystem::path p(cfg_path);
    return "runs/" + p.stem().string();
}

int guarded(const std::function<eulign::RunOutcome()>& body) {
    try {
        const eulign::RunOutcome outcome = body();
        std::printf("%s\n", outcome.message.c_str());
        return outcome.exit_code;
    } catch (const eulign::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const eulign::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

eulign::Scenario load_scenario_or_exit(const std::string& path, int& code) {
    const eulign::ValidationResult vr = eulign::validate_file(path);
    if (!vr.ok()) {
        for (const std::string& err : vr.errors)
            std::fprintf(stderr, "invalid: %s\n", err.c_str());
        code = 2;
    }
    return vr.scenario.value_or(eulign::Scenario{});
}

} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"Euler alignment / Cucker-Smale two-tier flocking simulator"};
    app.require_subcommand(1);

    std::string cfg_path, out_dir, dir_a, dir_b;
    std::string density_override, v0_override;

    auto* validate_cmd = app.add_subcommand("validate", "check a scenario config");
    validate_cmd->add_option("config", cfg_path)->required();

    auto* run_cmd = app.add_subcommand("run", "execute a scenario");
    run_cmd->add_option("config", cfg_path)->required();
    run_cmd->add_option("--out", out_dir, "run directory (default runs/<config-stem>)");

    auto* venergy_cmd = app.add_subcommand("verify-energy", "energy inequality check on a run");
    venergy_cmd->add_option("dir", dir_a)->required();

    auto* vweak_cmd = app.add_subcommand("verify-weak", "weak-form residual check on a run");
    vweak_cmd->add_option("dir", dir_a)->required();

    auto* compare_cmd = app.add_subcommand("compare", "particle/hydro moments or relative energy");
    compare_cmd->add_option("dir-a", dir_a)->required();
    compare_cmd->add_option("dir-b", dir_b)->required();

    auto* construct_cmd = app.add_subcommand("construct", "momentum construction from a density path");
    construct_cmd->add_option("config", cfg_path)->required();
    construct_cmd->add_option("--out", out_dir);
    construct_cmd->add_option("--density", density_override,
                              "breathing density override: amp,sigma");
    construct_cmd->add_option("--v0", v0_override, "curl v0 override: amp,axis");

    auto* steer_cmd = app.add_subcommand("steer", "control search towards a target density");
    steer_cmd->add_option("config", cfg_path)->required();
    steer_cmd->add_option("--out", out_dir);

    auto* selftest_cmd = app.add_subcommand("selftest", "kernel and geometry property suites");

    CLI11_PARSE(app, argc, argv);

    if (validate_cmd->parsed()) {
        const eulign::ValidationResult vr = eulign::validate_file(cfg_path);
        if (!vr.ok()) {
            for (const std::string& err : vr.errors)
                std::fprintf(stderr, "invalid: %s\n", err.c_str());
            return 2;
        }
        std::fputs(vr.scenario->normalized().c_str(), stdout);
        return 0;
    }

    if (run_cmd->parsed()) {
        int code = 0;
        const eulign::Scenario sc = load_scenario_or_exit(cfg_path, code);
        if (code)
            return code;
        return guarded([&] {
            return eulign::run_scenario(sc, out_dir.empty() ? default_out_dir(cfg_path) : out_dir);
        });
    }

    if (venergy_cmd->parsed())
        return guarded([&] { return eulign::verify_energy(dir_a); });

    if (vweak_cmd->parsed())
        return guarded([&] { return eulign::verify_weak(dir_a); });

    if (compare_cmd->parsed())
        return guarded([&] { return eulign::compare_runs(dir_a, dir_b); });

    if (construct_cmd->parsed()) {
        int code = 0;
        eulign::Scenario sc = load_scenario_or_exit(cfg_path, code);
        if (code)
            return code;
        sc.mode = eulign::RunMode::Construct;
        if (!density_override.empty()) {
            double amp, sigma;
            if (std::sscanf(density_override.c_str(), "%lf,%lf", &amp, &sigma) != 2) {
                std::fprintf(stderr, "invalid --density override (want amp,sigma)\n");
                return 2;
            }
            sc.construct_amp = amp;
            sc.construct_sigma = sigma;
        }
        if (!v0_override.empty()) {
            double amp;
            int axis;
            if (std::sscanf(v0_override.c_str(), "%lf,%d", &amp, &axis) != 2) {
                std::fprintf(stderr, "invalid --v0 override (want amp,axis)\n");
                return 2;
            }
            sc.construct_v0.amp = amp;
            sc.construct_v0.axis = axis;
        }
        return guarded([&] {
            return eulign::run_scenario(sc, out_dir.empty() ? default_out_dir(cfg_path) : out_dir);
        });
    }

    if (steer_cmd->parsed()) {
        int code = 0;
        const eulign::Scenario sc = load_scenario_or_exit(cfg_path, code);
        if (code)
            return code;
        return guarded([&] {
            return eulign::run_steer(sc, out_dir.empty() ? default_out_dir(cfg_path) : out_dir);
        });
    }

    if (selftest_cmd->parsed()) {
        const int failures = eulign::selftest();
        return failures == 0 ? 0 : 4;
    }
    return 0;
}
