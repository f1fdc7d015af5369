#include "eulign/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace eulign {

std::vector<std::string> validate_domain(const DomainSpec& domain) {
    std::vector<std::string> errs;
    const Vec3 ext = domain.extent();
    if (ext.x <= 0.0 || ext.y <= 0.0 || ext.z <= 0.0)
        errs.push_back("domain.box: max must exceed min on every axis");
    if (domain.smoothing < 0.0)
        errs.push_back("domain.smoothing must be >= 0");
    if (domain.smoothing > 0.45 * std::min({ext.x, ext.y, ext.z}))
        errs.push_back("domain.smoothing too large for the box");
    for (std::size_t b = 0; b < domain.obstacles.size(); ++b) {
        const Ball& ball = domain.obstacles[b];
        std::ostringstream key;
        key << "domain.obstacle." << (b + 1);
        if (ball.radius <= 0.0) {
            errs.push_back(key.str() + ": radius must be positive");
            continue;
        }
        const double clearance = 2.0 * domain.smoothing;
        for (int d = 0; d < 3; ++d) {
            if (ball.center[d] - ball.radius - clearance < domain.box_min[d] ||
                ball.center[d] + ball.radius + clearance > domain.box_max[d]) {
                errs.push_back(key.str() +
                               ": ball must lie strictly inside the box with clearance >= 2 "
                               "smoothing radii");
                break;
            }
        }
    }
    return errs;
}

// Rounded-box distance is exact on faces; corners are rounded with the
// smoothing radius, which keeps the boundary C^1.
double signed_distance(const DomainSpec& domain, const Vec3& p) {
    const double r = std::max(domain.smoothing, 0.0);
    const Vec3 c = domain.center();
    const Vec3 half = domain.extent() * 0.5 - Vec3{r, r, r};
    const Vec3 q{std::fabs(p.x - c.x) - half.x, std::fabs(p.y - c.y) - half.y,
                 std::fabs(p.z - c.z) - half.z};
    const Vec3 qp = cwise_max(q, Vec3{});
    double d = norm(qp) + std::min(std::max({q.x, q.y, q.z}), 0.0) - r;
    // Obstacles: D excludes the ball closures, so the distance to a ball
    // surface enters with reversed sign.
    for (const Ball& b : domain.obstacles)
        d = std::max(d, b.radius - norm(p - b.center));
    return d;
}

Vec3 outward_normal(const DomainSpec& domain, const Vec3& p, double step) {
    const double diag = domain.diagonal();
    const double sd = signed_distance(domain, p);
    if (std::fabs(sd) > 1e-9 * diag) {
        std::ostringstream msg;
        msg << "outward_normal: point not on boundary (signed distance " << sd << ")";
        throw PreconditionError(msg.str());
    }
    const double s = step > 0.0 ? step : 1e-5 * diag;
    Vec3 g;
    for (int d = 0; d < 3; ++d) {
        Vec3 lo = p, hi = p;
        lo[d] -= s;
        hi[d] += s;
        g[d] = (signed_distance(domain, hi) - signed_distance(domain, lo)) / (2.0 * s);
    }
    const double n = norm(g);
    if (n == 0.0)
        throw PreconditionError("outward_normal: degenerate gradient");
    return g / n;
}

std::optional<BoundaryHit> first_boundary_hit(const DomainSpec& domain, const Vec3& x,
                                              const Vec3& v, double dt_max) {
    const double diag = domain.diagonal();
    double f0 = signed_distance(domain, x);
    if (f0 > 1e-9 * diag)
        throw PreconditionError("first_boundary_hit: start point outside cl D");
    f0 = std::min(f0, 0.0);

    const double speed = norm(v);
    if (speed == 0.0 || dt_max <= 0.0)
        return std::nullopt;

    // March with a spatial step small enough to resolve the thinnest
    // feature (obstacle radius or box extent), then bisect the bracket.
    double feature = std::min({domain.extent().x, domain.extent().y, domain.extent().z});
    for (const Ball& b : domain.obstacles)
        feature = std::min(feature, 2.0 * b.radius);
    const double ds = std::max(feature / 8.0, 1e-12 * diag);
    const double seg_len = speed * dt_max;
    const long nsteps = std::clamp(long(std::ceil(seg_len / ds)), long(8), long(2000000));
    const double dt_sample = dt_max / double(nsteps);

    double t_lo = 0.0, f_lo = f0;
    double t_hit = -1.0;
    for (long s = 1; s <= nsteps; ++s) {
        const double t = (s == nsteps) ? dt_max : s * dt_sample;
        const double f = signed_distance(domain, x + v * t);
        if (f_lo <= 0.0 && f > 0.0) {
            // bisect [t_lo, t] down to the positional tolerance
            double a = t_lo, b = t;
            const double tol_t = 1e-12 * diag / speed;
            while (b - a > tol_t) {
                const double m = 0.5 * (a + b);
                if (signed_distance(domain, x + v * m) > 0.0)
                    b = m;
                else
                    a = m;
            }
            t_hit = 0.5 * (a + b);
            break;
        }
        t_lo = t;
        f_lo = f;
    }
    if (t_hit <= 0.0)
        return std::nullopt;
    const Vec3 hit_point = x + v * t_hit;
    return BoundaryHit{t_hit, hit_point, outward_normal(domain, hit_point)};
}

Vec3 reflect(const Vec3& v, const Vec3& nu) {
    if (std::fabs(norm(nu) - 1.0) > 1e-12)
        throw PreconditionError("reflect: normal must be a unit vector");
    return v - 2.0 * dot(v, nu) * nu;
}

GridMask rasterize(const DomainSpec& domain, int n) {
    if (n < 8)
        throw PreconditionError("rasterize: need at least 8 cells per axis");
    const Vec3 ext = domain.extent();
    const double h = ext.x / n;
    GridMask mask;
    mask.h = h;
    mask.origin = domain.box_min;
    mask.nx = n;
    mask.ny = int(std::lround(ext.y / h));
    mask.nz = int(std::lround(ext.z / h));
    if (std::fabs(mask.ny * h - ext.y) > 1e-9 * ext.y ||
        std::fabs(mask.nz * h - ext.z) > 1e-9 * ext.z)
        throw DomainError("rasterize: box extents must be integer multiples of h");

    mask.inside_flag.assign(mask.grid_size(), 0);
    for (int k = 0; k < mask.nz; ++k)
        for (int j = 0; j < mask.ny; ++j)
            for (int i = 0; i < mask.nx; ++i) {
                const int f = mask.flat(i, j, k);
                if (signed_distance(domain, mask.cell_center(f)) < 0.0) {
                    mask.inside_flag[std::size_t(f)] = 1;
                    mask.cells.push_back(f);
                }
            }
    if (mask.cells.empty())
        throw DomainError("rasterize: interior empty at this resolution");

    // 6-connected flood fill from the first inside cell.
    std::vector<std::uint8_t> seen(mask.grid_size(), 0);
    std::deque<int> queue{mask.cells.front()};
    seen[std::size_t(mask.cells.front())] = 1;
    std::size_t reached = 0;
    const int di[6] = {1, -1, 0, 0, 0, 0};
    const int dj[6] = {0, 0, 1, -1, 0, 0};
    const int dk[6] = {0, 0, 0, 0, 1, -1};
    while (!queue.empty()) {
        const int f = queue.front();
        queue.pop_front();
        ++reached;
        int i, j, k;
        mask.unflat(f, i, j, k);
        for (int d = 0; d < 6; ++d) {
            const int ii = i + di[d], jj = j + dj[d], kk = k + dk[d];
            if (!mask.is_inside(ii, jj, kk))
                continue;
            const int g = mask.flat(ii, jj, kk);
            if (!seen[std::size_t(g)]) {
                seen[std::size_t(g)] = 1;
                queue.push_back(g);
            }
        }
    }
    if (reached != mask.cells.size())
        throw DomainError("rasterize: interior disconnected at this resolution");

    for (int f : mask.cells) {
        int i, j, k;
        mask.unflat(f, i, j, k);
        bool at_boundary = false;
        for (int d = 0; d < 6 && !at_boundary; ++d)
            at_boundary = !mask.is_inside(i + di[d], j + dj[d], k + dk[d]);
        if (at_boundary) {
            const Vec3 c = mask.cell_center(f);
            Vec3 g;
            const double s = h / 4.0;
            for (int d = 0; d < 3; ++d) {
                Vec3 lo = c, hi = c;
                lo[d] -= s;
                hi[d] += s;
                g[d] = (signed_distance(domain, hi) - signed_distance(domain, lo)) / (2.0 * s);
            }
            mask.boundary.push_back({f, normalized(g)});
        }
    }

    // Multi-source BFS assigning every cell its nearest inside cell
    // (used to fold deposition weights that spill over the boundary).
    mask.nearest_inside.assign(mask.grid_size(), -1);
    std::deque<int> bfs;
    for (int f : mask.cells) {
        mask.nearest_inside[std::size_t(f)] = f;
        bfs.push_back(f);
    }
    while (!bfs.empty()) {
        const int f = bfs.front();
        bfs.pop_front();
        int i, j, k;
        mask.unflat(f, i, j, k);
        for (int d = 0; d < 6; ++d) {
            const int ii = i + di[d], jj = j + dj[d], kk = k + dk[d];
            if (!mask.in_grid(ii, jj, kk))
                continue;
            const int g = mask.flat(ii, jj, kk);
            if (mask.nearest_inside[std::size_t(g)] < 0) {
                mask.nearest_inside[std::size_t(g)] = mask.nearest_inside[std::size_t(f)];
                bfs.push_back(g);
            }
        }
    }
    return mask;
}

} // namespace eulign
