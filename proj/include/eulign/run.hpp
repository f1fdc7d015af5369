#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eulign/config.hpp"
#include "eulign/energy.hpp"

namespace eulign {

/// Binary field snapshot.
/// Layout: "EULF" magic, u32 version, u32 nx, ny, nz, f64 h, f64 t,
/// then rho (nx*ny*nz doubles, x-fastest), then jx, jy, jz arrays.
void write_eulf(const std::string& path, const FluidState& state);
FluidState read_eulf(const std::string& path, const GridMask& mask);

/// FNV-1a 64-bit content hash, hex encoded (manifest fingerprints).
std::string fnv1a_hex(const std::string& path);

struct RunOutcome {
    int exit_code{0}; // 0 ok, 2 validation, 3 solver, 4 verification FAIL
    std::string message;
};

/// Builds (rho0, j0) on the mask from the analytic profiles; rho0 is
/// normalized to mass exactly 1.
FluidState hydro_initial_state(const GridMask& mask, const DensityProfile& density,
                               const VelocityProfile& velocity, double t0);

/// Executes a validated scenario end to end, writing snapshots, CSV
/// series, run.log and manifest.json into `out_dir`.
RunOutcome run_scenario(const Scenario& scenario, const std::string& out_dir);

/// A run directory loaded back: the stored normalized config re-validated
/// and every snapshot read onto a freshly rasterized mask.
struct LoadedRun {
    Scenario scenario;
    std::shared_ptr<GridMask> mask;
    std::vector<double> times;
    std::vector<FluidState> states;
};
LoadedRun load_run(const std::string& dir);

/// verify-energy: recomputes the energy series, writes energy.csv and
/// energy_verdict.json; exit 4 when the relaxed inequality fails.
RunOutcome verify_energy(const std::string& dir);

/// verify-weak: weak-form residual table (weak_residual.csv) plus
/// verdict against weak.tol. Construct-mode runs are judged on the mass
/// identity only (their momenta are deliberately non-unique).
RunOutcome verify_weak(const std::string& dir);

/// compare: particle run vs hydro run -> L1 density discrepancy series
/// with Monte-Carlo and discretization budgets; hydro vs hydro ->
/// relative-energy series with a Gronwall verdict. Results land in dir_a.
RunOutcome compare_runs(const std::string& dir_a, const std::string& dir_b);

/// steer: best-effort control search for the configured target; writes
/// steer_report.json into out_dir.
RunOutcome run_steer(const Scenario& scenario, const std::string& out_dir);

/// Fast property sweep over kernels and geometry; prints one line per
/// check, returns the failure count.
int selftest();

} // namespace eulign
