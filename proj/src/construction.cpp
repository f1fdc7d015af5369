#include "eulign/construction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eulign/hydro.hpp"

namespace eulign {

namespace {

double mass_of(const ScalarField& f) { return integrate(f); }

// Reflected fetch: walks the offset one step at a time (x, then y, then
// z); a step into an outside cell reflects the remaining walk across the
// wall face. With `antisym` the value picks up a sign flip per crossing
// (odd extension, i.e. a homogeneous Dirichlet ghost); without it the
// extension is even (homogeneous Neumann).
struct Fetched {
    int cell;
    double sign;
};

Fetched reflect_fetch(const GridMask& m, int i, int j, int k, int ox, int oy, int oz,
                      bool antisym) {
    int pos[3] = {i, j, k};
    const int off[3] = {ox, oy, oz};
    double sign = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        int dir = off[ax] > 0 ? 1 : -1;
        for (int s = 0; s < std::abs(off[ax]); ++s) {
            int nxt[3] = {pos[0], pos[1], pos[2]};
            nxt[ax] += dir;
            if (m.is_inside(nxt[0], nxt[1], nxt[2])) {
                pos[ax] = nxt[ax];
            } else {
                if (antisym)
                    sign = -sign;
                dir = -dir; // reflect; the image of the ghost is the current cell
            }
        }
    }
    return {m.flat(pos[0], pos[1], pos[2]), sign};
}

double dot_cells(const GridMask& m, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int c : m.cells)
        s += a[std::size_t(c)] * b[std::size_t(c)];
    return s;
}

void project_zero_mean(const GridMask& m, std::vector<double>& a) {
    double mean = 0.0;
    for (int c : m.cells)
        mean += a[std::size_t(c)];
    mean /= double(m.inside_count());
    for (int c : m.cells)
        a[std::size_t(c)] -= mean;
}

// -A phi with A = discrete Laplacian under Neumann mirror ghosts
// (missing-neighbor terms drop out).
void neumann_matvec(const GridMask& m, const std::vector<double>& phi,
                    std::vector<double>& out) {
    const double inv_h2 = 1.0 / (m.h * m.h);
    for (int c : m.cells) {
        int i, j, k;
        m.unflat(c, i, j, k);
        double sum = 0.0;
        const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        for (const auto& o : off) {
            if (m.is_inside(i + o[0], j + o[1], k + o[2]))
                sum += phi[std::size_t(c)] - phi[std::size_t(m.flat(i + o[0], j + o[1], k + o[2]))];
        }
        out[std::size_t(c)] = sum * inv_h2;
    }
}

} // namespace

ScalarField solve_neumann(const GridMask& mask, const ScalarField& g) {
    if (g.mask == nullptr || !g.mask->compatible(mask))
        throw ArgumentError("solve_neumann: field does not live on this mask");
    double g_int = 0.0, g_l1 = 0.0;
    for (int c : mask.cells) {
        g_int += g[c];
        g_l1 += std::fabs(g[c]);
    }
    g_int *= mask.cell_volume();
    g_l1 *= mask.cell_volume();
    if (g_l1 > 0.0 && std::fabs(g_int) > 1e-8 * g_l1) {
        std::ostringstream msg;
        msg << "solve_neumann: incompatible right-hand side, int g = " << g_int
            << " exceeds 1e-8 * ||g||_1 = " << 1e-8 * g_l1;
        throw PreconditionError(msg.str());
    }

    const std::size_t size = mask.grid_size();
    std::vector<double> b(g.v);
    project_zero_mean(mask, b);

    std::vector<double> phi(size, 0.0), r(b), p(b), ap(size, 0.0);
    const double b_norm2 = dot_cells(mask, b, b);
    if (b_norm2 == 0.0) {
        ScalarField out(mask);
        return out;
    }
    const double tol2 = 1e-20 * b_norm2; // ||r|| <= 1e-10 ||g||
    double r_norm2 = b_norm2;
    const int max_iter = 10000;
    int iter = 0;
    for (; iter < max_iter && r_norm2 > tol2; ++iter) {
        neumann_matvec(mask, p, ap);
        const double alpha = r_norm2 / dot_cells(mask, p, ap);
        for (int c : mask.cells) {
            phi[std::size_t(c)] += alpha * p[std::size_t(c)];
            r[std::size_t(c)] -= alpha * ap[std::size_t(c)];
        }
        project_zero_mean(mask, r);
        const double r_next = dot_cells(mask, r, r);
        const double beta = r_next / r_norm2;
        r_norm2 = r_next;
        for (int c : mask.cells)
            p[std::size_t(c)] = r[std::size_t(c)] + beta * p[std::size_t(c)];
    }
    if (iter >= max_iter)
        throw SolverError("solve_neumann: conjugate gradients did not converge in 10^4 iterations");

    project_zero_mean(mask, phi);
    ScalarField out(mask);
    out.v = std::move(phi);
    out.zero_outside();
    return out;
}

HelmholtzSplit helmholtz_split(const VectorField& j, const ScalarField& rho_dot) {
    const GridMask& m = *rho_dot.mask;
    HelmholtzSplit split;
    split.phi = solve_neumann(m, rho_dot);
    split.grad_phi = gradient_neumann(split.phi);
    split.v = VectorField(m);
    for (int c : m.cells)
        split.v.set(c, j.get(c) - split.grad_phi.get(c));
    return split;
}

DensityPath make_density_path(const GridMask& mask, std::vector<double> times,
                              std::vector<ScalarField> rho) {
    if (times.size() != rho.size() || times.size() < 3)
        throw ArgumentError("make_density_path: need >= 3 matching samples");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw ArgumentError("make_density_path: times must be strictly increasing");
    for (std::size_t s = 0; s < rho.size(); ++s) {
        if (rho[s].mask == nullptr || !rho[s].mask->compatible(mask))
            throw ArgumentError("make_density_path: sample mask mismatch");
        if (std::fabs(mass_of(rho[s]) - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg << "make_density_path: sample " << s << " has mass " << mass_of(rho[s]);
            throw ArgumentError(msg.str());
        }
        for (int c : mask.cells)
            if (rho[s][c] <= 0.0)
                throw ArgumentError("make_density_path: density must be positive inside");
    }

    DensityPath path;
    path.mask = &mask;
    path.times = std::move(times);
    path.rho = std::move(rho);
    const std::size_t n = path.times.size();
    path.rho_dot.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        ScalarField dot(mask);
        if (s == 0) {
            const double dt = path.times[1] - path.times[0];
            for (int c : mask.cells)
                dot[c] = (-3.0 * path.rho[0][c] + 4.0 * path.rho[1][c] - path.rho[2][c]) /
                         (2.0 * dt);
        } else if (s + 1 == n) {
            const double dt = path.times[n - 1] - path.times[n - 2];
            for (int c : mask.cells)
                dot[c] = (3.0 * path.rho[n - 1][c] - 4.0 * path.rho[n - 2][c] +
                          path.rho[n - 3][c]) /
                         (2.0 * dt);
        } else {
            const double dt = path.times[s + 1] - path.times[s - 1];
            for (int c : mask.cells)
                dot[c] = (path.rho[s + 1][c] - path.rho[s - 1][c]) / dt;
        }
        const double compat = integrate(dot);
        if (std::fabs(compat) > 1e-10) {
            std::ostringstream msg;
            msg << "make_density_path: sample " << s << " violates compatibility, int d_t rho = "
                << compat;
            throw ArgumentError(msg.str());
        }
        path.rho_dot.push_back(std::move(dot));
    }
    return path;
}

std::vector<VectorField> momentum_from_density(const DensityPath& path, const VectorField& v0) {
    const GridMask& m = *path.mask;
    if (v0.mask == nullptr || !v0.mask->compatible(m))
        throw ArgumentError("momentum_from_density: v0 mask mismatch");
    double v0_scale = 1.0;
    for (int d = 0; d < 3; ++d)
        for (int c : m.cells)
            v0_scale = std::max(v0_scale, std::fabs(v0.c[std::size_t(d)][std::size_t(c)]));
    const ScalarField div = divergence_mirror(v0);
    if (max_abs(div) > 1e-9 * v0_scale)
        throw PreconditionError("momentum_from_density: v0 is not discretely divergence-free");

    std::vector<VectorField> momenta;
    momenta.reserve(path.times.size());
    for (std::size_t s = 0; s < path.times.size(); ++s) {
        const ScalarField phi = solve_neumann(m, path.rho_dot[s]);
        const VectorField grad_phi = gradient_neumann(phi);
        VectorField j(m);
        for (int c : m.cells)
            j.set(c, v0.get(c) + grad_phi.get(c));
        momenta.push_back(std::move(j));
    }
    return momenta;
}

VectorField make_curl_field(const GridMask& mask, const CurlSpec& spec) {
    ScalarField psi(mask);
    for (int c : mask.cells) {
        const Vec3 x = mask.cell_center(c);
        double val = spec.amp;
        for (int d = 0; d < 3; ++d)
            val *= SpaceTimeBump::bump1d((x[d] - spec.center[d]) / spec.halfwidth[d]);
        psi[c] = val;
    }
    // v0 = curl(psi e_axis) = grad(psi) x e_axis, plain central
    // differences with zero extension (psi is compactly supported).
    VectorField v0(mask);
    Vec3 e;
    e[spec.axis] = 1.0;
    const double inv2h = 1.0 / (2.0 * mask.h);
    for (int c : mask.cells) {
        int i, j, k;
        mask.unflat(c, i, j, k);
        Vec3 grad;
        const int off[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        for (int d = 0; d < 3; ++d) {
            const double hi = mask.is_inside(i + off[d][0], j + off[d][1], k + off[d][2])
                                  ? psi[mask.flat(i + off[d][0], j + off[d][1], k + off[d][2])]
                                  : 0.0;
            const double lo = mask.is_inside(i - off[d][0], j - off[d][1], k - off[d][2])
                                  ? psi[mask.flat(i - off[d][0], j - off[d][1], k - off[d][2])]
                                  : 0.0;
            grad[d] = (hi - lo) * inv2h;
        }
        v0.set(c, cross(grad, e));
    }
    return v0;
}

// ---------------------------------------------------------------------------
// Trace-free elliptic system

namespace {

// Row d of  -lap w - (1/3) grad(div w)  at one cell, Dirichlet ghosts.
double elliptic_row_slow(const GridMask& m, const VectorField& w, int i, int j, int k, int d) {
    const double inv_h2 = 1.0 / (m.h * m.h);
    const double wc = w.c[std::size_t(d)][std::size_t(m.flat(i, j, k))];

    double lap = 0.0;
    const int off[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int ax = 0; ax < 3; ++ax) {
        const Fetched hi = reflect_fetch(m, i, j, k, off[ax][0], off[ax][1], off[ax][2], true);
        const Fetched lo = reflect_fetch(m, i, j, k, -off[ax][0], -off[ax][1], -off[ax][2], true);
        lap += hi.sign * w.c[std::size_t(d)][std::size_t(hi.cell)] +
               lo.sign * w.c[std::size_t(d)][std::size_t(lo.cell)] - 2.0 * wc;
    }
    lap *= inv_h2;

    // grad(div w)_d = sum_e d_d d_e w_e
    double grad_div = 0.0;
    {
        // e == d: second difference of w_d along d
        const Fetched hi = reflect_fetch(m, i, j, k, off[d][0], off[d][1], off[d][2], true);
        const Fetched lo = reflect_fetch(m, i, j, k, -off[d][0], -off[d][1], -off[d][2], true);
        grad_div += (hi.sign * w.c[std::size_t(d)][std::size_t(hi.cell)] +
                     lo.sign * w.c[std::size_t(d)][std::size_t(lo.cell)] - 2.0 * wc) *
                    inv_h2;
    }
    for (int e = 0; e < 3; ++e) {
        if (e == d)
            continue;
        const int dd[3] = {off[d][0], off[d][1], off[d][2]};
        const int ee[3] = {off[e][0], off[e][1], off[e][2]};
        const Fetched pp = reflect_fetch(m, i, j, k, dd[0] + ee[0], dd[1] + ee[1], dd[2] + ee[2], true);
        const Fetched pm = reflect_fetch(m, i, j, k, dd[0] - ee[0], dd[1] - ee[1], dd[2] - ee[2], true);
        const Fetched mp = reflect_fetch(m, i, j, k, -dd[0] + ee[0], -dd[1] + ee[1], -dd[2] + ee[2], true);
        const Fetched mm = reflect_fetch(m, i, j, k, -dd[0] - ee[0], -dd[1] - ee[1], -dd[2] - ee[2], true);
        grad_div += (pp.sign * w.c[std::size_t(e)][std::size_t(pp.cell)] -
                     pm.sign * w.c[std::size_t(e)][std::size_t(pm.cell)] -
                     mp.sign * w.c[std::size_t(e)][std::size_t(mp.cell)] +
                     mm.sign * w.c[std::size_t(e)][std::size_t(mm.cell)]) *
                    (0.25 * inv_h2);
    }
    return -lap - grad_div / 3.0;
}

// Cells whose full 3x3x3 neighborhood stays inside the mask take a
// direct-indexing fast path; the reflected fetch only runs near the
// boundary.
struct EllipticOperator {
    const GridMask& m;
    std::vector<std::uint8_t> interior;
    int ox, oy, oz;

    explicit EllipticOperator(const GridMask& mask)
        : m(mask), interior(mask.grid_size(), 0), ox(1), oy(mask.nx), oz(mask.nx * mask.ny) {
        for (int c : m.cells) {
            int i, j, k;
            m.unflat(c, i, j, k);
            bool ok = true;
            for (int dk = -1; dk <= 1 && ok; ++dk)
                for (int dj = -1; dj <= 1 && ok; ++dj)
                    for (int di = -1; di <= 1 && ok; ++di)
                        ok = m.is_inside(i + di, j + dj, k + dk);
            interior[std::size_t(c)] = ok ? 1 : 0;
        }
    }

    void apply(const VectorField& w, VectorField& out) const {
        const double inv_h2 = 1.0 / (m.h * m.h);
        const int offs[3] = {ox, oy, oz};
        for (int c : m.cells) {
            if (interior[std::size_t(c)]) {
                for (int d = 0; d < 3; ++d) {
                    const auto& wd = w.c[std::size_t(d)];
                    const double wc = wd[std::size_t(c)];
                    double lap = 0.0;
                    for (int ax = 0; ax < 3; ++ax)
                        lap += wd[std::size_t(c + offs[ax])] + wd[std::size_t(c - offs[ax])] -
                               2.0 * wc;
                    double grad_div =
                        wd[std::size_t(c + offs[d])] + wd[std::size_t(c - offs[d])] - 2.0 * wc;
                    for (int e = 0; e < 3; ++e) {
                        if (e == d)
                            continue;
                        const auto& we = w.c[std::size_t(e)];
                        grad_div += 0.25 * (we[std::size_t(c + offs[d] + offs[e])] -
                                            we[std::size_t(c + offs[d] - offs[e])] -
                                            we[std::size_t(c - offs[d] + offs[e])] +
                                            we[std::size_t(c - offs[d] - offs[e])]);
                    }
                    out.c[std::size_t(d)][std::size_t(c)] =
                        (-lap - grad_div / 3.0) * inv_h2;
                }
            } else {
                int i, j, k;
                m.unflat(c, i, j, k);
                for (int d = 0; d < 3; ++d)
                    out.c[std::size_t(d)][std::size_t(c)] = elliptic_row_slow(m, w, i, j, k, d);
            }
        }
    }
};

double dot_fields(const GridMask& m, const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (int d = 0; d < 3; ++d)
        for (int c : m.cells)
            s += a.c[std::size_t(d)][std::size_t(c)] * b.c[std::size_t(d)][std::size_t(c)];
    return s;
}

// Centered gradient of w with antisymmetric (Dirichlet) ghosts:
// G[d][e] = d_d w_e.
void velocity_gradient(const GridMask& m, const VectorField& w, int i, int j, int k,
                       double G[3][3]) {
    const double inv2h = 1.0 / (2.0 * m.h);
    const int off[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int d = 0; d < 3; ++d) {
        const Fetched hi = reflect_fetch(m, i, j, k, off[d][0], off[d][1], off[d][2], true);
        const Fetched lo = reflect_fetch(m, i, j, k, -off[d][0], -off[d][1], -off[d][2], true);
        for (int e = 0; e < 3; ++e)
            G[d][e] = (hi.sign * w.c[std::size_t(e)][std::size_t(hi.cell)] -
                       lo.sign * w.c[std::size_t(e)][std::size_t(lo.cell)]) *
                      inv2h;
    }
}

} // namespace

EllipticSolution solve_elliptic_system(const GridMask& mask, const VectorField& S) {
    if (S.mask == nullptr || !S.mask->compatible(mask))
        throw ArgumentError("solve_elliptic_system: field does not live on this mask");

    EllipticSolution sol;
    sol.w = VectorField(mask);
    const EllipticOperator op(mask);
    VectorField r(mask), p(mask), ap(mask);
    for (int d = 0; d < 3; ++d)
        for (int c : mask.cells) {
            r.c[std::size_t(d)][std::size_t(c)] = S.c[std::size_t(d)][std::size_t(c)];
            p.c[std::size_t(d)][std::size_t(c)] = S.c[std::size_t(d)][std::size_t(c)];
        }
    const double b_norm2 = dot_fields(mask, r, r);
    double r_norm2 = b_norm2;
    if (b_norm2 > 0.0) {
        const double tol2 = 1e-22 * b_norm2;
        const int max_iter = 20000;
        int iter = 0;
        for (; iter < max_iter && r_norm2 > tol2; ++iter) {
            op.apply(p, ap);
            const double alpha = r_norm2 / dot_fields(mask, p, ap);
            for (int d = 0; d < 3; ++d)
                for (int c : mask.cells) {
                    sol.w.c[std::size_t(d)][std::size_t(c)] += alpha * p.c[std::size_t(d)][std::size_t(c)];
                    r.c[std::size_t(d)][std::size_t(c)] -= alpha * ap.c[std::size_t(d)][std::size_t(c)];
                }
            const double r_next = dot_fields(mask, r, r);
            const double beta = r_next / r_norm2;
            r_norm2 = r_next;
            for (int d = 0; d < 3; ++d)
                for (int c : mask.cells)
                    p.c[std::size_t(d)][std::size_t(c)] =
                        r.c[std::size_t(d)][std::size_t(c)] + beta * p.c[std::size_t(d)][std::size_t(c)];
        }
        if (iter >= max_iter)
            throw SolverError("solve_elliptic_system: conjugate gradients did not converge");
    }

    sol.M.assign(mask.grid_size(), TraceFreeTensor{});
    for (int c : mask.cells) {
        int i, j, k;
        mask.unflat(c, i, j, k);
        double G[3][3];
        velocity_gradient(mask, sol.w, i, j, k, G);
        const double mxx = 2.0 * G[0][0] - (2.0 / 3.0) * (G[0][0] + G[1][1] + G[2][2]);
        const double myy = 2.0 * G[1][1] - (2.0 / 3.0) * (G[0][0] + G[1][1] + G[2][2]);
        // third diagonal entry from the other two, so the trace is
        // exactly zero in floating point
        const double mzz = -(mxx + myy);
        sol.M[std::size_t(c)] = {mxx, myy, mzz, G[0][1] + G[1][0], G[0][2] + G[2][0],
                                 G[1][2] + G[2][1]};
    }
    return sol;
}

double elliptic_energy_form(const GridMask& mask, const VectorField& w) {
    double total = 0.0;
    for (int c : mask.cells) {
        int i, j, k;
        mask.unflat(c, i, j, k);
        double G[3][3];
        velocity_gradient(mask, w, i, j, k, G);
        const double tr = G[0][0] + G[1][1] + G[2][2];
        double s = 0.0;
        for (int d = 0; d < 3; ++d)
            for (int e = 0; e < 3; ++e) {
                const double M_de = G[d][e] + G[e][d] - (d == e ? (2.0 / 3.0) * tr : 0.0);
                s += M_de * G[d][e];
            }
        total += s;
    }
    return total * mask.cell_volume();
}

// ---------------------------------------------------------------------------
// Test functions and weak residuals

double SpaceTimeBump::bump1d(double y) {
    const double y2 = y * y;
    if (y2 >= 1.0 - 1e-12)
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - y2));
}

double SpaceTimeBump::dbump1d(double y) {
    const double y2 = y * y;
    if (y2 >= 1.0 - 1e-12)
        return 0.0;
    const double denom = 1.0 - y2;
    return bump1d(y) * (-2.0 * y) / (denom * denom);
}

double SpaceTimeBump::time_factor(double t) const { return bump1d((t - t_center) / t_width); }

double SpaceTimeBump::time_derivative(double t) const {
    return dbump1d((t - t_center) / t_width) / t_width;
}

double SpaceTimeBump::space_factor(const Vec3& x) const {
    double v = 1.0;
    for (int d = 0; d < 3; ++d)
        v *= bump1d((x[d] - x_center[d]) / x_halfwidth[d]);
    return v;
}

Vec3 SpaceTimeBump::space_gradient(const Vec3& x) const {
    double b[3], db[3];
    for (int d = 0; d < 3; ++d) {
        const double y = (x[d] - x_center[d]) / x_halfwidth[d];
        b[d] = bump1d(y);
        db[d] = dbump1d(y) / x_halfwidth[d];
    }
    return {db[0] * b[1] * b[2], b[0] * db[1] * b[2], b[0] * b[1] * db[2]};
}

TestFunctionBank TestFunctionBank::defaults(const DomainSpec& domain, const GridMask& mask,
                                            double t0, double tf) {
    TestFunctionBank bank;
    const Vec3 lo = domain.box_min, hi = domain.box_max;
    const Vec3 ext = domain.extent();
    const double min_ext = std::min({ext.x, ext.y, ext.z});
    const double rel_width[3] = {0.12, 0.2, 0.3};
    const double rel_center[3] = {0.35, 0.5, 0.65};
    const double T = tf - t0;
    const double t_centers[2] = {t0 + 0.35 * T, t0 + 0.65 * T};
    const double t_width = 0.3 * T;

    int id = 0;
    for (double rw : rel_width)
        for (int axis = 0; axis < 3; ++axis)
            for (double rc : rel_center)
                for (double tc : t_centers) {
                    SpaceTimeBump bump;
                    bump.t_center = tc;
                    bump.t_width = t_width;
                    bump.x_center = domain.center();
                    bump.x_center[axis] = lo[axis] + rc * ext[axis];
                    double w = rw * min_ext;
                    // keep the support strictly inside the box...
                    for (int d = 0; d < 3; ++d)
                        w = std::min(w, 0.95 * std::min(bump.x_center[d] - lo[d],
                                                        hi[d] - bump.x_center[d]));
                    // ...and clear of every obstacle
                    for (const Ball& ball : domain.obstacles) {
                        const double gap = norm(bump.x_center - ball.center) - ball.radius;
                        w = std::min(w, 0.95 * gap / std::sqrt(3.0));
                    }
                    if (w < 2.0 * mask.h)
                        continue; // too thin to quadrature at this resolution
                    bump.x_halfwidth = {w, w, w};
                    bump.id = "bump" + std::to_string(id++);
                    bank.bumps.push_back(bump);
                }
    return bank;
}

std::vector<WeakResidualRow> weak_residual(const std::vector<double>& times,
                                           const std::vector<ScalarField>& rho,
                                           const std::vector<VectorField>& j,
                                           const std::vector<PotentialSet>& pots,
                                           const ModelParams& params,
                                           const TestFunctionBank& bank) {
    const std::size_t n = times.size();
    if (n < 2 || rho.size() != n || j.size() != n || pots.size() != n)
        throw ArgumentError("weak_residual: mismatched sampling");
    const GridMask& m = *rho[0].mask;
    for (std::size_t s = 1; s < n; ++s)
        if (!rho[s].mask->compatible(m) || !j[s].mask->compatible(m))
            throw ArgumentError("weak_residual: samples on different masks");

    // trapezoid weights (general spacing)
    std::vector<double> wt(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double left = s == 0 ? times[0] : times[s - 1];
        const double right = s + 1 == n ? times[n - 1] : times[s + 1];
        wt[s] = 0.5 * (right - left);
    }

    const std::size_t nb = bank.bumps.size();
    std::vector<double> acc_mass(nb, 0.0), nrm_mass(nb, 0.0);
    std::vector<std::array<double, 3>> acc_mom(nb, {0, 0, 0}), nrm_mom(nb, {0, 0, 0});

    // per-bump 1D factor tables (time-independent)
    struct Tables {
        std::vector<double> bx, by, bz, dbx, dby, dbz;
    };
    std::vector<Tables> tables(nb);
    for (std::size_t t = 0; t < nb; ++t) {
        const SpaceTimeBump& bump = bank.bumps[t];
        Tables& tab = tables[t];
        tab.bx.resize(std::size_t(m.nx));
        tab.dbx.resize(std::size_t(m.nx));
        tab.by.resize(std::size_t(m.ny));
        tab.dby.resize(std::size_t(m.ny));
        tab.bz.resize(std::size_t(m.nz));
        tab.dbz.resize(std::size_t(m.nz));
        for (int i = 0; i < m.nx; ++i) {
            const double y = (m.origin.x + (i + 0.5) * m.h - bump.x_center.x) / bump.x_halfwidth.x;
            tab.bx[std::size_t(i)] = SpaceTimeBump::bump1d(y);
            tab.dbx[std::size_t(i)] = SpaceTimeBump::dbump1d(y) / bump.x_halfwidth.x;
        }
        for (int i = 0; i < m.ny; ++i) {
            const double y = (m.origin.y + (i + 0.5) * m.h - bump.x_center.y) / bump.x_halfwidth.y;
            tab.by[std::size_t(i)] = SpaceTimeBump::bump1d(y);
            tab.dby[std::size_t(i)] = SpaceTimeBump::dbump1d(y) / bump.x_halfwidth.y;
        }
        for (int i = 0; i < m.nz; ++i) {
            const double y = (m.origin.z + (i + 0.5) * m.h - bump.x_center.z) / bump.x_halfwidth.z;
            tab.bz[std::size_t(i)] = SpaceTimeBump::bump1d(y);
            tab.dbz[std::size_t(i)] = SpaceTimeBump::dbump1d(y) / bump.x_halfwidth.z;
        }
    }

    const double vol = m.cell_volume();
    for (std::size_t s = 0; s < n; ++s) {
        const VectorField S = source(m, rho[s], j[s], pots[s], params);
        for (std::size_t t = 0; t < nb; ++t) {
            const SpaceTimeBump& bump = bank.bumps[t];
            const double bt = bump.time_factor(times[s]);
            const double dbt = bump.time_derivative(times[s]);
            if (bt == 0.0 && dbt == 0.0)
                continue;
            const Tables& tab = tables[t];
            double mass_sum = 0.0, mass_abs = 0.0;
            double mom_sum[3] = {0, 0, 0}, mom_abs[3] = {0, 0, 0};
            for (int cell : m.cells) {
                int ci, cj, ck;
                m.unflat(cell, ci, cj, ck);
                const double sb = tab.bx[std::size_t(ci)] * tab.by[std::size_t(cj)] *
                                  tab.bz[std::size_t(ck)];
                const Vec3 sg{tab.dbx[std::size_t(ci)] * tab.by[std::size_t(cj)] *
                                  tab.bz[std::size_t(ck)],
                              tab.bx[std::size_t(ci)] * tab.dby[std::size_t(cj)] *
                                  tab.bz[std::size_t(ck)],
                              tab.bx[std::size_t(ci)] * tab.by[std::size_t(cj)] *
                                  tab.dbz[std::size_t(ck)]};
                if (sb == 0.0 && sg.x == 0.0 && sg.y == 0.0 && sg.z == 0.0)
                    continue;
                const double rho_c = rho[s][cell];
                const Vec3 j_c = j[s].get(cell);
                // phi = bt * sb:  d_t phi = dbt * sb, grad phi = bt * sg
                const double t1 = rho_c * dbt * sb;
                const double t2 = dot(j_c, sg) * bt;
                mass_sum += t1 + t2;
                mass_abs += std::fabs(t1) + std::fabs(t2);
                const double jdotg = dot(j_c, sg) * bt / rho_c;
                const Vec3 S_c = S.get(cell);
                for (int d = 0; d < 3; ++d) {
                    const double a1 = j_c[d] * dbt * sb;      // j . d_t psi
                    const double a2 = j_c[d] * jdotg;         // rho^{-1} j j^T : grad psi
                    const double a3 = S_c[d] * bt * sb;       // psi . S
                    mom_sum[d] += a1 + a2 + a3;
                    mom_abs[d] += std::fabs(a1) + std::fabs(a2) + std::fabs(a3);
                }
            }
            acc_mass[t] += wt[s] * mass_sum * vol;
            nrm_mass[t] += wt[s] * mass_abs * vol;
            for (int d = 0; d < 3; ++d) {
                acc_mom[t][std::size_t(d)] += wt[s] * mom_sum[d] * vol;
                nrm_mom[t][std::size_t(d)] += wt[s] * mom_abs[d] * vol;
            }
        }
    }

    std::vector<WeakResidualRow> rows;
    rows.reserve(nb * 4);
    const char* comp_name[3] = {"momentum-x", "momentum-y", "momentum-z"};
    for (std::size_t t = 0; t < nb; ++t) {
        const double mass_abs = std::fabs(acc_mass[t]);
        rows.push_back({bank.bumps[t].id, "mass", mass_abs,
                        nrm_mass[t] > 0.0 ? mass_abs / nrm_mass[t] : 0.0});
        for (int d = 0; d < 3; ++d) {
            const double mom_abs = std::fabs(acc_mom[t][std::size_t(d)]);
            rows.push_back({bank.bumps[t].id, comp_name[d], mom_abs,
                            nrm_mom[t][std::size_t(d)] > 0.0 ? mom_abs / nrm_mom[t][std::size_t(d)]
                                                             : 0.0});
        }
    }
    return rows;
}

} // namespace eulign
