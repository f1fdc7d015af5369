#include "eulign/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace eulign {

namespace {

constexpr double kPi = std::numbers::pi;

double bessel_norm_constant(double order) {
    return 1.0 / (std::pow(2.0, 0.5 * (order + 1.0)) * std::pow(kPi, 1.5) *
                  std::tgamma(0.5 * order));
}

double bessel_kernel(double k, double order, double r) {
    const double nu = std::fabs(0.5 * (3.0 - order)); // K_nu is even in nu
    return k * bessel_norm_constant(order) * std::pow(r, 0.5 * (order - 3.0)) *
           std::cyl_bessel_k(nu, r);
}

// 1 - e^{-x}(1 + x), stable for small x.
double one_minus_exp_decay(double x) {
    if (x < 1e-3) {
        const double x2 = x * x;
        return x2 * (0.5 - x / 3.0 + x2 / 8.0 - x2 * x / 30.0 + x2 * x2 / 144.0);
    }
    return 1.0 - std::exp(-x) * (1.0 + x);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate_adaptive(const F& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

} // namespace

double kernel_eval(const KernelSpec& spec, double r) {
    if (r <= 0.0)
        throw DomainError("kernel_eval: requires r > 0");
    if (spec.family == KernelFamily::Yukawa)
        return spec.k * std::exp(-spec.lambda * r) / r;
    return bessel_kernel(spec.k, spec.lambda, r);
}

Vec3 kernel_grad(const KernelSpec& spec, const Vec3& d) {
    const double r = norm(d);
    if (r == 0.0)
        throw DomainError("kernel_grad: zero displacement");
    double radial;
    if (spec.family == KernelFamily::Yukawa) {
        radial = -spec.k * std::exp(-spec.lambda * r) * (1.0 + spec.lambda * r) / (r * r);
    } else {
        const double s = 1e-6 * r;
        radial = (kernel_eval(spec, r + s) - kernel_eval(spec, r - s)) / (2.0 * s);
    }
    return d * (radial / r);
}

double kernel_cell_average(const KernelSpec& spec, double h) {
    if (h <= 0.0)
        throw DomainError("kernel_cell_average: requires h > 0");
    const double a = h * std::cbrt(3.0 / (4.0 * kPi)); // equal-volume ball radius
    if (spec.family == KernelFamily::Yukawa) {
        const double la = spec.lambda * a;
        return 3.0 * spec.k * one_minus_exp_decay(la) / (spec.lambda * spec.lambda * a * a * a);
    }
    if (spec.lambda == 2.0) {
        // Order 2 is the Yukawa kernel with k/(4 pi) and unit rate.
        const KernelSpec mapped{KernelFamily::Yukawa, spec.k / (4.0 * kPi), 1.0, spec.role};
        return kernel_cell_average(mapped, h);
    }
    // avg = (3/a^3) int_0^a r^2 G(r) dr; substituting r = a t^2 makes the
    // integrand vanish at t = 0 for every order >= 2.
    const double order = spec.lambda;
    const auto integrand = [a, order](double t) -> double {
        if (t <= 0.0)
            return 0.0;
        const double r = a * t * t;
        return 2.0 * a * t * r * r * bessel_kernel(1.0, order, r);
    };
    const double integral = integrate_adaptive(integrand, 0.0, 1.0, 1e-12);
    return 3.0 * spec.k * integral / (a * a * a);
}

// ---------------------------------------------------------------------------
// FFT convolution

struct ConvolutionEngine::Plans {
    int px, py, pz;
    std::size_t real_size, cplx_size;
    double* real_buf{nullptr};
    fftw_complex* cplx_buf{nullptr};
    fftw_plan fwd{nullptr}, bwd{nullptr};

    Plans(int nx, int ny, int nz) {
        px = 2 * nx;
        py = 2 * ny;
        pz = 2 * nz;
        real_size = std::size_t(px) * py * pz;
        cplx_size = std::size_t(px / 2 + 1) * py * pz;
        real_buf = fftw_alloc_real(real_size);
        cplx_buf = fftw_alloc_complex(cplx_size);
        // x-fastest storage means row-major dims are (pz, py, px).
        // FFTW_ESTIMATE keeps plan selection deterministic run to run.
        fwd = fftw_plan_dft_r2c_3d(pz, py, px, real_buf, cplx_buf, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_3d(pz, py, px, cplx_buf, real_buf, FFTW_ESTIMATE);
    }
    ~Plans() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real_buf);
        fftw_free(cplx_buf);
    }
};

ConvolutionEngine::ConvolutionEngine(const GridMask& mask)
    : mask_(&mask), plans_(std::make_unique<Plans>(mask.nx, mask.ny, mask.nz)) {}

ConvolutionEngine::~ConvolutionEngine() = default;

const ConvolutionEngine::Spectrum& ConvolutionEngine::kernel_hat(const KernelSpec& spec) {
    const auto key = std::make_tuple(int(spec.family), spec.k, spec.lambda);
    auto it = kernel_cache_.find(key);
    if (it != kernel_cache_.end())
        return it->second;

    const GridMask& m = *mask_;
    Plans& p = *plans_;
    std::fill(p.real_buf, p.real_buf + p.real_size, 0.0);
    const double w0 = kernel_cell_average(spec, m.h) * m.cell_volume();
    for (int oz = -(m.nz - 1); oz <= m.nz - 1; ++oz)
        for (int oy = -(m.ny - 1); oy <= m.ny - 1; ++oy)
            for (int ox = -(m.nx - 1); ox <= m.nx - 1; ++ox) {
                double w;
                if (ox == 0 && oy == 0 && oz == 0) {
                    w = w0;
                } else {
                    const double r = m.h * std::sqrt(double(ox) * ox + double(oy) * oy +
                                                     double(oz) * oz);
                    w = kernel_eval(spec, r) * m.cell_volume();
                }
                const int ix = ox < 0 ? ox + p.px : ox;
                const int iy = oy < 0 ? oy + p.py : oy;
                const int iz = oz < 0 ? oz + p.pz : oz;
                p.real_buf[(std::size_t(iz) * p.py + iy) * p.px + ix] = w;
            }
    fftw_execute(p.fwd);
    Spectrum hat(p.cplx_size);
    for (std::size_t i = 0; i < p.cplx_size; ++i)
        hat[i] = {p.cplx_buf[i][0], p.cplx_buf[i][1]};
    return kernel_cache_.emplace(key, std::move(hat)).first->second;
}

ConvolutionEngine::Spectrum ConvolutionEngine::forward(const ScalarField& f) {
    const GridMask& m = *mask_;
    if (f.mask == nullptr || !f.mask->compatible(m))
        throw ArgumentError("convolve: field does not live on this mask");
    Plans& p = *plans_;
    std::fill(p.real_buf, p.real_buf + p.real_size, 0.0);
    for (int cell : m.cells) {
        int i, j, k;
        m.unflat(cell, i, j, k);
        p.real_buf[(std::size_t(k) * p.py + j) * p.px + i] = f[cell];
    }
    fftw_execute(p.fwd);
    Spectrum out(p.cplx_size);
    for (std::size_t i = 0; i < p.cplx_size; ++i)
        out[i] = {p.cplx_buf[i][0], p.cplx_buf[i][1]};
    return out;
}

ScalarField ConvolutionEngine::apply(const Spectrum& fhat, const KernelSpec& spec) {
    const GridMask& m = *mask_;
    Plans& p = *plans_;
    const Spectrum& khat = kernel_hat(spec);
    const double scale = 1.0 / double(p.real_size);
    for (std::size_t i = 0; i < p.cplx_size; ++i) {
        const std::complex<double> prod = fhat[i] * khat[i] * scale;
        p.cplx_buf[i][0] = prod.real();
        p.cplx_buf[i][1] = prod.imag();
    }
    fftw_execute(p.bwd);
    ScalarField out(m);
    for (int cell : m.cells) {
        int i, j, k;
        m.unflat(cell, i, j, k);
        out[cell] = p.real_buf[(std::size_t(k) * p.py + j) * p.px + i];
    }
    return out;
}

ScalarField ConvolutionEngine::convolve(const ScalarField& f, const KernelSpec& spec) {
    return apply(forward(f), spec);
}

ScalarField convolve(const GridMask& mask, const ScalarField& f, const KernelSpec& spec) {
    ConvolutionEngine engine(mask);
    return engine.convolve(f, spec);
}

VectorField convolve(const GridMask& mask, const VectorField& f, const KernelSpec& spec) {
    if (f.mask == nullptr || !f.mask->compatible(mask))
        throw ArgumentError("convolve: field does not live on this mask");
    ConvolutionEngine engine(mask);
    VectorField out(mask);
    for (int d = 0; d < 3; ++d) {
        ScalarField comp(mask);
        comp.v = f.c[std::size_t(d)];
        out.c[std::size_t(d)] = engine.convolve(comp, spec).v;
    }
    return out;
}

ScalarField convolve_direct(const GridMask& mask, const ScalarField& f, const KernelSpec& spec) {
    if (f.mask == nullptr || !f.mask->compatible(mask))
        throw ArgumentError("convolve_direct: field does not live on this mask");
    // Tabulate kernel weights over the offset cube once.
    const int tx = 2 * mask.nx - 1, ty = 2 * mask.ny - 1, tz = 2 * mask.nz - 1;
    std::vector<double> tab(std::size_t(tx) * ty * tz);
    const double w0 = kernel_cell_average(spec, mask.h) * mask.cell_volume();
    for (int oz = -(mask.nz - 1); oz <= mask.nz - 1; ++oz)
        for (int oy = -(mask.ny - 1); oy <= mask.ny - 1; ++oy)
            for (int ox = -(mask.nx - 1); ox <= mask.nx - 1; ++ox) {
                const std::size_t idx =
                    (std::size_t(oz + mask.nz - 1) * ty + (oy + mask.ny - 1)) * tx +
                    (ox + mask.nx - 1);
                if (ox == 0 && oy == 0 && oz == 0) {
                    tab[idx] = w0;
                } else {
                    const double r = mask.h * std::sqrt(double(ox) * ox + double(oy) * oy +
                                                        double(oz) * oz);
                    tab[idx] = kernel_eval(spec, r) * mask.cell_volume();
                }
            }
    ScalarField out(mask);
    for (int target : mask.cells) {
        int ti, tj, tk;
        mask.unflat(target, ti, tj, tk);
        double sum = 0.0;
        for (int source : mask.cells) {
            int si, sj, sk;
            mask.unflat(source, si, sj, sk);
            const std::size_t idx =
                (std::size_t(tk - sk + mask.nz - 1) * ty + (tj - sj + mask.ny - 1)) * tx +
                (ti - si + mask.nx - 1);
            sum += tab[idx] * f[source];
        }
        out[target] = sum;
    }
    return out;
}

PotentialSet potentials(const GridMask& mask, const ScalarField& rho, const VectorField& j,
                        const KernelTriple& kernels, const Confinement& conf,
                        ConvolutionEngine& engine) {
    PotentialSet pots;
    pots.pi_rho = ScalarField(mask);
    pots.v_c = ScalarField(mask);
    pots.v_r = ScalarField(mask);
    pots.pi_j = VectorField(mask);
    pots.grad_vc = VectorField(mask);
    pots.grad_vr = VectorField(mask);
    pots.grad_U = VectorField(mask);

    const bool need_rho_hat =
        kernels.alignment.has_value() || kernels.cohesion.has_value() || kernels.repulsion.has_value();
    if (need_rho_hat) {
        const auto rho_hat = engine.forward(rho);
        if (kernels.alignment) {
            pots.has_alignment = true;
            pots.pi_rho = engine.apply(rho_hat, *kernels.alignment);
            for (int d = 0; d < 3; ++d) {
                ScalarField comp(mask);
                comp.v = j.c[std::size_t(d)];
                pots.pi_j.c[std::size_t(d)] = engine.convolve(comp, *kernels.alignment).v;
            }
        }
        if (kernels.cohesion) {
            pots.has_cohesion = true;
            pots.v_c = engine.apply(rho_hat, *kernels.cohesion);
            pots.grad_vc = gradient_onesided(pots.v_c);
        }
        if (kernels.repulsion) {
            pots.has_repulsion = true;
            pots.v_r = engine.apply(rho_hat, *kernels.repulsion);
            pots.grad_vr = gradient_onesided(pots.v_r);
        }
    }
    if (conf.active()) {
        pots.has_confinement = true;
        for (int cell : mask.cells)
            pots.grad_U.set(cell, conf.gradient(mask.cell_center(cell)));
    }
    return pots;
}

} // namespace eulign
