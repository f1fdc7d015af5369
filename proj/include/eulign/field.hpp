#pragma once

#include <array>
#include <vector>

#include "eulign/geometry.hpp"

namespace eulign {

/// Cell-centered scalar field on a GridMask. Stored on the full boxed
/// grid in x-fastest order; values on outside cells are kept at zero.
struct ScalarField {
    const GridMask* mask{nullptr};
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridMask& m) : mask(&m), v(m.grid_size(), 0.0) {}

    double operator[](int f) const { return v[std::size_t(f)]; }
    double& operator[](int f) { return v[std::size_t(f)]; }

    void zero_outside() {
        for (std::size_t f = 0; f < v.size(); ++f)
            if (!mask->is_inside(int(f)))
                v[f] = 0.0;
    }
};

/// Cell-centered vector field, one contiguous array per component.
struct VectorField {
    const GridMask* mask{nullptr};
    std::array<std::vector<double>, 3> c;

    VectorField() = default;
    explicit VectorField(const GridMask& m) : mask(&m) {
        for (auto& a : c)
            a.assign(m.grid_size(), 0.0);
    }

    Vec3 get(int f) const {
        return {c[0][std::size_t(f)], c[1][std::size_t(f)], c[2][std::size_t(f)]};
    }
    void set(int f, const Vec3& val) {
        c[0][std::size_t(f)] = val.x;
        c[1][std::size_t(f)] = val.y;
        c[2][std::size_t(f)] = val.z;
    }
    void add(int f, const Vec3& val) {
        c[0][std::size_t(f)] += val.x;
        c[1][std::size_t(f)] += val.y;
        c[2][std::size_t(f)] += val.z;
    }
    void zero_outside() {
        for (auto& a : c)
            for (std::size_t f = 0; f < a.size(); ++f)
                if (!mask->is_inside(int(f)))
                    a[f] = 0.0;
    }
};

/// Sum over inside cells of f * h^3, in the fixed mask.cells order.
double integrate(const ScalarField& f);
Vec3 integrate(const VectorField& f);

double max_abs(const ScalarField& f);
double l1_distance(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& f);

/// Gradient by second-order central differences, falling back to
/// second-order one-sided stencils where a neighbor leaves the mask
/// (first-order at cells with only one interior neighbor on an axis).
/// No boundary condition is assumed.
VectorField gradient_onesided(const ScalarField& f);

/// Gradient by central differences under the homogeneous Neumann ghost
/// rule: the missing neighbor mirrors the cell value.
VectorField gradient_neumann(const ScalarField& f);

/// Divergence by central differences under the non-penetration mirror
/// rule: a missing neighbor along axis d carries the negated d-component.
ScalarField divergence_mirror(const VectorField& f);

/// Trilinear interpolation between cell centers (clamped at the grid
/// edge). Outside cells contribute their stored value, i.e. zero.
double interpolate(const ScalarField& f, const Vec3& p);
Vec3 interpolate(const VectorField& f, const Vec3& p);

} // namespace eulign
