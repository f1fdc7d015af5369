#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "eulign/errors.hpp"
#include "eulign/vec3.hpp"

namespace eulign {

/// Spherical exclusion carved out of the bounding box.
struct Ball {
    Vec3 center;
    double radius{0.0};
};

/// Bounded computational domain: an axis-aligned box minus spherical
/// obstacles, with optional rounding of the box corners so the boundary
/// is C^1. The signed distance is negative strictly inside, zero on the
/// boundary and positive outside.
struct DomainSpec {
    Vec3 box_min;
    Vec3 box_max{1.0, 1.0, 1.0};
    std::vector<Ball> obstacles;
    double smoothing{0.0}; // corner rounding radius

    Vec3 extent() const { return box_max - box_min; }
    double diagonal() const { return norm(extent()); }
    Vec3 center() const { return (box_min + box_max) * 0.5; }
};

/// Checks the static invariants of a domain (box nondegenerate, obstacles
/// strictly inside with clearance >= 2 * smoothing, radii positive).
/// Returns a list of human-readable violations; empty means valid.
std::vector<std::string> validate_domain(const DomainSpec& domain);

double signed_distance(const DomainSpec& domain, const Vec3& p);

/// Unit outward normal at a boundary point, from the normalized central
/// difference gradient of the signed distance. `step` defaults to
/// 1e-5 * diagonal; rasterize passes h/4.
/// Throws PreconditionError if p is not on the boundary
/// (|signed_distance| > 1e-9 * diagonal).
Vec3 outward_normal(const DomainSpec& domain, const Vec3& p, double step = 0.0);

struct BoundaryHit {
    double t;    // earliest crossing time in (0, dt_max]
    Vec3 point;  // x + t v
    Vec3 normal; // outward unit normal at the crossing
};

/// Earliest boundary crossing of the ray x + t v over t in (0, dt_max],
/// located by sign-change bracketing on the signed distance followed by
/// bisection to 1e-12 * diagonal. Returns nullopt when the segment stays
/// inside. Throws PreconditionError if x is outside cl D.
std::optional<BoundaryHit> first_boundary_hit(const DomainSpec& domain, const Vec3& x,
                                              const Vec3& v, double dt_max);

/// Specular reflection (I - 2 nu nu^T) v; preserves |v| and the
/// tangential component. Throws PreconditionError when |nu| deviates
/// from 1 by more than 1e-12.
Vec3 reflect(const Vec3& v, const Vec3& nu);

/// Rasterized carrier for grid fields on the domain. Cells are cubes of
/// size h; a cell is "inside" when its center has negative signed
/// distance. Fields live on the full (nx, ny, nz) box and are zero on
/// outside cells.
struct GridMask {
    int nx{0}, ny{0}, nz{0};
    double h{0.0};
    Vec3 origin; // box_min of the generating domain
    std::vector<std::uint8_t> inside_flag;  // size nx*ny*nz, x-fastest
    std::vector<std::int32_t> cells;        // flat indices of inside cells, ascending
    struct BoundaryCell {
        std::int32_t cell;
        Vec3 normal; // outward normal estimate at the cell center
    };
    std::vector<BoundaryCell> boundary;
    std::vector<std::int32_t> nearest_inside; // per flat cell: closest inside cell

    std::size_t grid_size() const { return std::size_t(nx) * ny * nz; }
    std::size_t inside_count() const { return cells.size(); }

    int flat(int i, int j, int k) const { return (k * ny + j) * nx + i; }
    void unflat(int f, int& i, int& j, int& k) const {
        i = f % nx;
        j = (f / nx) % ny;
        k = f / (nx * ny);
    }
    bool in_grid(int i, int j, int k) const {
        return i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < nz;
    }
    bool is_inside(int f) const { return inside_flag[std::size_t(f)] != 0; }
    bool is_inside(int i, int j, int k) const {
        return in_grid(i, j, k) && is_inside(flat(i, j, k));
    }
    Vec3 cell_center(int f) const {
        int i, j, k;
        unflat(f, i, j, k);
        return origin + Vec3{(i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h};
    }
    double cell_volume() const { return h * h * h; }
    double volume() const { return double(cells.size()) * cell_volume(); }

    bool compatible(const GridMask& other) const {
        return nx == other.nx && ny == other.ny && nz == other.nz && h == other.h;
    }
};

/// Rasterizes the domain with n cells along x (h = extent.x / n; the
/// other extents must be integer multiples of h). Verifies the interior
/// is nonempty and 6-connected. Throws PreconditionError for n < 8 and
/// DomainError for empty or disconnected interiors.
GridMask rasterize(const DomainSpec& domain, int n);

} // namespace eulign
