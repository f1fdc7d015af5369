#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "eulign/hydro.hpp"

namespace eulign {

struct ControlPiece {
    double t_begin{0.0};
    double t_end{0.0};
    Vec3 f;
};

struct Leader {
    Vec3 xi;      // position
    Vec3 upsilon; // velocity
    std::vector<ControlPiece> schedule;
};

struct LeaderSet {
    double t{0.0};
    std::vector<Leader> leaders;
};

/// Checks that every schedule partitions [t0, tf] without gaps/overlaps.
std::vector<std::string> validate_schedules(const LeaderSet& set, double t0, double tf);

/// Axis-aligned invariant region D-tilde (the domain box shrunk by a
/// margin) that leaders are meant to stay in.
struct Region {
    Vec3 lo, hi;

    bool contains(const Vec3& p, double tol = 0.0) const {
        for (int d = 0; d < 3; ++d)
            if (p[d] < lo[d] - tol || p[d] > hi[d] + tol)
                return false;
        return true;
    }
};

Region leader_region(const DomainSpec& domain, double margin);

/// Soft-wall barrier W over the region: quartic ramps switched on within
/// `width` of each face, smooth with gradient 4 strength / width at the
/// wall (and growing only beyond it).
struct BarrierSpec {
    double strength{0.05};
    double width{0.1};

    double value(const Region& r, const Vec3& p) const;
    Vec3 gradient(const Region& r, const Vec3& p) const;
};

/// Leader force F(xi, upsilon, f; rho) = f - gamma upsilon - grad W(xi)
/// + feedback_gain * grad rho(xi) (density gradient by trilinear
/// interpolation).
struct LeaderForceSpec {
    double gamma{4.0};
    double f_max{1.0};
    BarrierSpec barrier;
    double feedback_gain{0.0};
    double rho_grad_bound{0.0}; // |grad rho| bound assumed by the check
};

Vec3 leader_force(const LeaderForceSpec& spec, const Region& region, const Vec3& xi,
                  const Vec3& upsilon, const Vec3& f, const VectorField* grad_rho);

/// Classical RK4 on (xi, upsilon), split at control breakpoints so every
/// substep sees a constant control. Throws ConfigError on schedule gaps.
LeaderSet leader_step(const LeaderSet& set, const ScalarField* rho, const LeaderForceSpec& spec,
                      const Region& region, double dt);

struct InvarianceReport {
    bool pass{true};
    double min_margin{0.0}; // most negative value of the flux inequality margin
    Vec3 witness_xi, witness_upsilon;
};

/// Samples the distinguished boundary of D-tilde x B(0, s) (position
/// faces paired with extreme speed-sphere velocities, plus interior
/// positions on the speed sphere) and evaluates the worst-case outward
/// flux  upsilon . nu_xi + F . nu_upsilon  over admissible controls
/// |f| <= f_max and the configured density-gradient extremes. PASS means
/// the margin stays <= 0 at every sample.
InvarianceReport invariance_check(const LeaderForceSpec& spec, const Region& region,
                                  double speed_bound, int samples, std::uint64_t seed = 0);

/// U(x; {xi_i}) and its analytic gradient (confinement plus Gaussian
/// leader wells).
std::pair<double, Vec3> leader_potential(const Vec3& x, const LeaderSet& set,
                                         const ModelParams& params);

/// Closed-form bound omega^2 diam + A e^{-1/2} k / sigma on |grad U|
/// (Gaussian well gradient peaks at distance sigma).
double leader_gradient_bound(const ModelParams& params, const DomainSpec& domain,
                             std::size_t leader_count);

/// Strang-style coupled step: leaders advance dt/2, the fluid advances dt
/// with wells at the updated leader positions, leaders advance dt/2 with
/// the updated density.
std::pair<FluidState, LeaderSet> coupled_step(const FluidState& fluid, const LeaderSet& leaders,
                                              const ModelParams& params,
                                              const LeaderForceSpec& force, const Region& region,
                                              const SolverOptions& options,
                                              ConvolutionEngine& engine, double dt,
                                              StepDiagnostics* diag = nullptr);

/// Everything a steering search needs to run coupled simulations.
struct SteerContext {
    const GridMask* mask{nullptr};
    DomainSpec domain;
    ModelParams params;
    SolverOptions options;
    LeaderForceSpec force;
    Region region;
    LeaderSet leaders0;
    FluidState fluid0;
    double horizon{1.0};
    int pieces{2};              // control breakpoints per leader
    double initial_step{0.5};   // coordinate-descent step size
    std::optional<std::vector<std::vector<Vec3>>> seed_schedule; // per leader, per piece
};

struct SteerResult {
    std::vector<std::vector<Vec3>> schedule; // per leader, per piece
    double achieved_l1{0.0};
    double seed_l1{0.0};
    int evaluations{0};
};

/// Best-effort coordinate descent over piecewise-constant control values
/// minimizing ||rho(t_f) - target||_L1 within `budget` coupled
/// simulations. Never returns a schedule worse than its seed. Throws
/// ArgumentError for budget < 1 or an invalid target density.
SteerResult steer_to_target(const SteerContext& ctx, const ScalarField& target, int budget);

/// Runs one coupled simulation under the given piecewise controls and
/// returns the final L1 distance to the target (used by steer_to_target
/// and by baselines).
double coupled_l1_objective(const SteerContext& ctx, const std::vector<std::vector<Vec3>>& controls,
                            const ScalarField& target, ConvolutionEngine& engine);

} // namespace eulign
