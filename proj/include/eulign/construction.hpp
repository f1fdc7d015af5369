#pragma once

#include <array>
#include <string>
#include <vector>

#include "eulign/field.hpp"
#include "eulign/kernels.hpp"
#include "eulign/model.hpp"

namespace eulign {

/// Sampled density trajectory rho(t_m, .) with time derivatives by
/// centered differences (second-order one-sided at the ends). Enforces
/// mass 1, positivity and the compatibility integral at every sample.
struct DensityPath {
    const GridMask* mask{nullptr};
    std::vector<double> times;
    std::vector<ScalarField> rho;
    std::vector<ScalarField> rho_dot;
};

DensityPath make_density_path(const GridMask& mask, std::vector<double> times,
                              std::vector<ScalarField> rho);

/// Solves the homogeneous Neumann problem  lap Phi = -g,  dPhi/dn = 0
/// on the mask (7-point Laplacian, mirrored ghosts) by conjugate
/// gradients on the mean-zero subspace; the additive constant is fixed
/// by zero mean. Requires |int g| <= 1e-8 ||g||_1.
ScalarField solve_neumann(const GridMask& mask, const ScalarField& g);

struct HelmholtzSplit {
    ScalarField phi;
    VectorField grad_phi; // central differences, Neumann ghost rule
    VectorField v;        // j - grad_phi
};

/// Helmholtz decomposition j = v + grad Phi with Phi from the Neumann
/// problem driven by rho_dot.
HelmholtzSplit helmholtz_split(const VectorField& j, const ScalarField& rho_dot);

/// Momentum trajectories j(t_m) = v0 + grad Phi(t_m) built from a density
/// path; distinct divergence-free v0 give distinct momenta for the same
/// density (the constructive skeleton behind non-uniqueness).
std::vector<VectorField> momentum_from_density(const DensityPath& path, const VectorField& v0);

/// Compactly supported bump parameters for building divergence-free v0
/// fields as discrete curls of A = amp * bump(x) e_axis.
struct CurlSpec {
    double amp{1.0};
    Vec3 center{0.5, 0.5, 0.5};
    Vec3 halfwidth{0.3, 0.3, 0.3};
    int axis{2};
};

/// v0 = discrete curl (central differences) of a compactly supported
/// vector potential; discrete divergence is machine-level by symmetry of
/// the mixed differences, and v0 vanishes near the boundary.
VectorField make_curl_field(const GridMask& mask, const CurlSpec& spec);

/// Symmetric trace-free 3x3 per cell, stored (xx, yy, zz, xy, xz, yz)
/// with zz = -(xx + yy) so the trace vanishes exactly.
using TraceFreeTensor = std::array<double, 6>;

struct EllipticSolution {
    VectorField w;
    std::vector<TraceFreeTensor> M; // per flat cell
};

/// Solves -div(grad w + grad w^T - (2/3) I tr grad w) = S with w = 0 on
/// the boundary (antisymmetric mirror ghosts), by conjugate gradients on
/// the symmetric positive-definite discretization, then assembles M from
/// centered gradients of w.
EllipticSolution solve_elliptic_system(const GridMask& mask, const VectorField& S);

/// Coercivity witness: sum over cells of <grad w + grad w^T
/// - (2/3) I tr grad w, grad w> h^3 (nonnegative pointwise).
double elliptic_energy_form(const GridMask& mask, const VectorField& w);

/// Space-time test function: product of compactly supported mollifier
/// bumps in t and in each coordinate, with analytic derivatives.
struct SpaceTimeBump {
    std::string id;
    double t_center{0.5}, t_width{0.3};
    Vec3 x_center;
    Vec3 x_halfwidth;

    static double bump1d(double y);  // exp(1 - 1/(1-y^2)) on |y|<1
    static double dbump1d(double y); // derivative in y

    double time_factor(double t) const;
    double time_derivative(double t) const;
    double space_factor(const Vec3& x) const;
    Vec3 space_gradient(const Vec3& x) const;
};

struct TestFunctionBank {
    std::vector<SpaceTimeBump> bumps; // each used as scalar test and as 3 vector tests

    /// Default bank: 3 widths x 9 centers x 2 time bumps = 54 scalar
    /// tests (plus 3 vector tests each). Supports are shrunk to stay
    /// strictly inside D and clear of obstacles.
    static TestFunctionBank defaults(const DomainSpec& domain, const GridMask& mask, double t0,
                                     double tf);
};

struct WeakResidualRow {
    std::string test_id;
    std::string kind; // "mass" or "momentum-x|y|z"
    double absolute{0.0};
    double normalized{0.0};
};

/// Quadrature residuals of the weak mass and momentum identities for a
/// sampled trajectory (cell midpoint in space, trapezoid in time). The
/// boundary terms vanish because every test function does at t0 and tf.
std::vector<WeakResidualRow> weak_residual(const std::vector<double>& times,
                                           const std::vector<ScalarField>& rho,
                                           const std::vector<VectorField>& j,
                                           const std::vector<PotentialSet>& pots,
                                           const ModelParams& params,
                                           const TestFunctionBank& bank);

} // namespace eulign
