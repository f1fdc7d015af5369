#include "eulign/field.hpp"

#include <cmath>

namespace eulign {

double integrate(const ScalarField& f) {
    double sum = 0.0;
    for (int cell : f.mask->cells)
        sum += f[cell];
    return sum * f.mask->cell_volume();
}

Vec3 integrate(const VectorField& f) {
    Vec3 sum;
    for (int cell : f.mask->cells)
        sum += f.get(cell);
    return sum * f.mask->cell_volume();
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (int cell : f.mask->cells)
        m = std::max(m, std::fabs(f[cell]));
    return m;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
    double sum = 0.0;
    for (int cell : a.mask->cells)
        sum += std::fabs(a[cell] - b[cell]);
    return sum * a.mask->cell_volume();
}

double l2_norm(const ScalarField& f) {
    double sum = 0.0;
    for (int cell : f.mask->cells)
        sum += f[cell] * f[cell];
    return std::sqrt(sum * f.mask->cell_volume());
}

namespace {

inline void axis_neighbors(const GridMask& m, int f, int axis, int& prev, int& next) {
    int i, j, k;
    m.unflat(f, i, j, k);
    int ip = i, jp = j, kp = k, in = i, jn = j, kn = k;
    (axis == 0 ? ip : axis == 1 ? jp : kp) -= 1;
    (axis == 0 ? in : axis == 1 ? jn : kn) += 1;
    prev = m.is_inside(ip, jp, kp) ? m.flat(ip, jp, kp) : -1;
    next = m.is_inside(in, jn, kn) ? m.flat(in, jn, kn) : -1;
}

inline int axis_offset_cell(const GridMask& m, int f, int axis, int off) {
    int i, j, k;
    m.unflat(f, i, j, k);
    (axis == 0 ? i : axis == 1 ? j : k) += off;
    return m.is_inside(i, j, k) ? m.flat(i, j, k) : -1;
}

} // namespace

VectorField gradient_onesided(const ScalarField& f) {
    const GridMask& m = *f.mask;
    VectorField g(m);
    const double inv2h = 1.0 / (2.0 * m.h);
    for (int cell : m.cells) {
        for (int d = 0; d < 3; ++d) {
            int prev, next;
            axis_neighbors(m, cell, d, prev, next);
            double val;
            if (prev >= 0 && next >= 0) {
                val = (f[next] - f[prev]) * inv2h;
            } else if (next >= 0) {
                const int next2 = axis_offset_cell(m, cell, d, 2);
                val = next2 >= 0
                          ? (-3.0 * f[cell] + 4.0 * f[next] - f[next2]) * inv2h
                          : (f[next] - f[cell]) / m.h;
            } else if (prev >= 0) {
                const int prev2 = axis_offset_cell(m, cell, d, -2);
                val = prev2 >= 0
                          ? (3.0 * f[cell] - 4.0 * f[prev] + f[prev2]) * inv2h
                          : (f[cell] - f[prev]) / m.h;
            } else {
                val = 0.0;
            }
            g.c[std::size_t(d)][std::size_t(cell)] = val;
        }
    }
    return g;
}

VectorField gradient_neumann(const ScalarField& f) {
    const GridMask& m = *f.mask;
    VectorField g(m);
    const double inv2h = 1.0 / (2.0 * m.h);
    for (int cell : m.cells) {
        for (int d = 0; d < 3; ++d) {
            int prev, next;
            axis_neighbors(m, cell, d, prev, next);
            const double fp = prev >= 0 ? f[prev] : f[cell];
            const double fn = next >= 0 ? f[next] : f[cell];
            g.c[std::size_t(d)][std::size_t(cell)] = (fn - fp) * inv2h;
        }
    }
    return g;
}

namespace {

struct TrilinearStencil {
    int cell[8];
    double weight[8];
};

TrilinearStencil trilinear(const GridMask& m, const Vec3& p) {
    const Vec3 g = (p - m.origin) / m.h - Vec3{0.5, 0.5, 0.5};
    int base[3];
    double frac[3];
    for (int d = 0; d < 3; ++d) {
        base[d] = int(std::floor(g[d]));
        frac[d] = g[d] - base[d];
    }
    TrilinearStencil st;
    int idx = 0;
    for (int dz = 0; dz <= 1; ++dz)
        for (int dy = 0; dy <= 1; ++dy)
            for (int dx = 0; dx <= 1; ++dx) {
                const int i = std::clamp(base[0] + dx, 0, m.nx - 1);
                const int j = std::clamp(base[1] + dy, 0, m.ny - 1);
                const int k = std::clamp(base[2] + dz, 0, m.nz - 1);
                st.cell[idx] = m.flat(i, j, k);
                st.weight[idx] = (dx ? frac[0] : 1.0 - frac[0]) *
                                 (dy ? frac[1] : 1.0 - frac[1]) *
                                 (dz ? frac[2] : 1.0 - frac[2]);
                ++idx;
            }
    return st;
}

} // namespace

double interpolate(const ScalarField& f, const Vec3& p) {
    const TrilinearStencil st = trilinear(*f.mask, p);
    double out = 0.0;
    for (int q = 0; q < 8; ++q)
        out += st.weight[q] * f[st.cell[q]];
    return out;
}

Vec3 interpolate(const VectorField& f, const Vec3& p) {
    const TrilinearStencil st = trilinear(*f.mask, p);
    Vec3 out;
    for (int q = 0; q < 8; ++q)
        out += st.weight[q] * f.get(st.cell[q]);
    return out;
}

ScalarField divergence_mirror(const VectorField& f) {
    const GridMask& m = *f.mask;
    ScalarField div(m);
    const double inv2h = 1.0 / (2.0 * m.h);
    for (int cell : m.cells) {
        double sum = 0.0;
        for (int d = 0; d < 3; ++d) {
            int prev, next;
            axis_neighbors(m, cell, d, prev, next);
            const double self = f.c[std::size_t(d)][std::size_t(cell)];
            const double fp = prev >= 0 ? f.c[std::size_t(d)][std::size_t(prev)] : -self;
            const double fn = next >= 0 ? f.c[std::size_t(d)][std::size_t(next)] : -self;
            sum += (fn - fp) * inv2h;
        }
        div[cell] = sum;
    }
    return div;
}

} // namespace eulign
