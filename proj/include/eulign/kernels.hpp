#pragma once

#include <complex>
#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "eulign/field.hpp"
#include "eulign/model.hpp"

namespace eulign {

/// Kernel value at separation r > 0.
///   Yukawa:  k e^{-lambda r} / r
///   Bessel:  k r^{(lambda-3)/2} K_{(3-lambda)/2}(r) / (2^{(lambda+1)/2} pi^{3/2} Gamma(lambda/2))
/// Throws DomainError for r <= 0 (the r -> 0 singularity is handled only
/// by kernel_cell_average).
double kernel_eval(const KernelSpec& spec, double r);

/// Gradient with respect to the first argument, evaluated at displacement
/// d != 0. Yukawa uses the closed form; Bessel differentiates kernel_eval
/// radially with a centered step of 1e-6 r.
Vec3 kernel_grad(const KernelSpec& spec, const Vec3& d);

/// Average of the kernel over the ball of volume h^3 (radius
/// a = h (3/4pi)^{1/3}). Yukawa and Bessel order 2 use closed forms;
/// higher Bessel orders fall back to adaptive radial quadrature.
double kernel_cell_average(const KernelSpec& spec, double h);

/// Cached FFT machinery for convolutions over one mask: zero-padding to
/// twice the grid per axis makes the circular convolution exactly linear,
/// and kernel spectra are cached per (family, k, lambda). Instances hold
/// FFTW plans and scratch buffers; they are not safe for concurrent use.
class ConvolutionEngine {
  public:
    explicit ConvolutionEngine(const GridMask& mask);
    ~ConvolutionEngine();
    ConvolutionEngine(const ConvolutionEngine&) = delete;
    ConvolutionEngine& operator=(const ConvolutionEngine&) = delete;

    using Spectrum = std::vector<std::complex<double>>;

    /// Forward transform of the masked field (outside cells read as zero).
    Spectrum forward(const ScalarField& f);

    /// Multiplies the spectrum by the kernel transform and inverts,
    /// returning the discrete L_alpha f restricted to inside cells.
    ScalarField apply(const Spectrum& fhat, const KernelSpec& spec);

    ScalarField convolve(const ScalarField& f, const KernelSpec& spec);

    const GridMask& mask() const { return *mask_; }

  private:
    const Spectrum& kernel_hat(const KernelSpec& spec);

    const GridMask* mask_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
    std::map<std::tuple<int, double, double>, Spectrum> kernel_cache_;
};

/// One-shot convolution: discrete L_alpha f with zero-offset weight
/// kernel_cell_average * h^3. Throws ArgumentError when the field does
/// not live on `mask`.
ScalarField convolve(const GridMask& mask, const ScalarField& f, const KernelSpec& spec);
VectorField convolve(const GridMask& mask, const VectorField& f, const KernelSpec& spec);

/// Direct O(M^2) summation over inside cells. Independent route used to
/// cross-check the transform path; keep it free of FFT machinery.
ScalarField convolve_direct(const GridMask& mask, const ScalarField& f, const KernelSpec& spec);

/// The potentials entering the augmented momentum source: alignment
/// potentials pi_rho, pi_j, cohesion/repulsion potentials v_c, v_r, and
/// cached gradients of v_c, v_r and of the confinement potential U.
struct PotentialSet {
    ScalarField pi_rho;
    VectorField pi_j;
    ScalarField v_c, v_r;
    VectorField grad_vc, grad_vr, grad_U;
    bool has_alignment{false};
    bool has_cohesion{false};
    bool has_repulsion{false};
    bool has_confinement{false};
};

/// Assembles the PotentialSet for a (rho, j) state. The forward transform
/// of rho is shared by the alignment, cohesion and repulsion solves.
/// Gradients use second-order central differences with one-sided stencils
/// at boundary-adjacent cells.
PotentialSet potentials(const GridMask& mask, const ScalarField& rho, const VectorField& j,
                        const KernelTriple& kernels, const Confinement& conf,
                        ConvolutionEngine& engine);

} // namespace eulign
