#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eulign/geometry.hpp"
#include "eulign/rng.hpp"

using namespace eulign;

namespace {

DomainSpec unit_box() { return DomainSpec{}; }

DomainSpec box_minus_ball(double radius = 0.25) {
    DomainSpec dom;
    dom.obstacles.push_back({{0.5, 0.5, 0.5}, radius});
    return dom;
}

} // namespace

TEST_CASE("signed_distance on the unit box") {
    const DomainSpec dom = unit_box();
    CHECK(signed_distance(dom, {0.5, 0.5, 0.5}) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(signed_distance(dom, {1.0, 0.5, 0.5}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(signed_distance(dom, {2.0, 0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-14));
    // obstacle surfaces carry zero distance as well
    const DomainSpec dom2 = box_minus_ball();
    CHECK(signed_distance(dom2, {0.75, 0.5, 0.5}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(signed_distance(dom2, {0.6, 0.5, 0.5}) > 0.0); // inside the ball = outside D
}

TEST_CASE("signed_distance with corner smoothing keeps faces exact") {
    DomainSpec dom = unit_box();
    dom.smoothing = 0.1;
    CHECK(signed_distance(dom, {0.5, 0.5, 0.5}) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(signed_distance(dom, {0.0, 0.5, 0.5}) == doctest::Approx(0.0).epsilon(1e-14));
    // the corner is shaved: the sharp corner point lies outside the rounded domain
    CHECK(signed_distance(dom, {0.0, 0.0, 0.0}) > 0.0);
}

TEST_CASE("outward_normal examples") {
    const DomainSpec dom = unit_box();
    const Vec3 n1 = outward_normal(dom, {1.0, 0.5, 0.5});
    CHECK(norm(n1 - Vec3{1, 0, 0}) < 1e-9);
    const Vec3 n2 = outward_normal(dom, {0.0, 0.5, 0.5});
    CHECK(norm(n2 - Vec3{-1, 0, 0}) < 1e-9);

    const DomainSpec dom2 = box_minus_ball();
    const Vec3 n3 = outward_normal(dom2, {0.75, 0.5, 0.5});
    CHECK(norm(n3 - Vec3{-1, 0, 0}) < 1e-7); // outward of D points into the ball

    CHECK_THROWS_AS((void)outward_normal(dom, {0.5, 0.5, 0.5}), PreconditionError);
}

TEST_CASE("reflect examples and properties") {
    CHECK(norm(reflect({1, 2, 3}, {1, 0, 0}) - Vec3{-1, 2, 3}) == 0.0);
    CHECK(norm(reflect({0, 0, -5}, {0, 0, 1}) - Vec3{0, 0, 5}) == 0.0);
    // tangential invariance
    CHECK(norm(reflect({0, 2, 3}, {1, 0, 0}) - Vec3{0, 2, 3}) == 0.0);
    CHECK_THROWS_AS((void)reflect({1, 0, 0}, {1, 1, 0}), PreconditionError);

    const CounterRng rng(42, 0);
    double worst_iso = 0.0, worst_inv = 0.0;
    for (int s = 0; s < 10000; ++s) {
        const Vec3 v{rng.normal(6 * s), rng.normal(6 * s + 1), rng.normal(6 * s + 2)};
        Vec3 nu{rng.normal(6 * s + 3), rng.normal(6 * s + 4), rng.normal(6 * s + 5)};
        nu = normalized(nu);
        const Vec3 r = reflect(v, nu);
        worst_iso = std::max(worst_iso, std::fabs(norm(r) - norm(v)) / norm(v));
        worst_inv = std::max(worst_inv, norm(reflect(r, nu) - v) / norm(v));
    }
    CHECK(worst_iso <= 1e-14);
    CHECK(worst_inv <= 1e-14);
}

TEST_CASE("first_boundary_hit examples") {
    const DomainSpec dom = unit_box();
    const auto hit = first_boundary_hit(dom, {0.5, 0.5, 0.5}, {1, 0, 0}, 1.0);
    REQUIRE(hit.has_value());
    CHECK(hit->t == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(norm(hit->point - Vec3{1.0, 0.5, 0.5}) < 1e-9);
    CHECK(norm(hit->normal - Vec3{1, 0, 0}) < 1e-7);

    CHECK_FALSE(first_boundary_hit(dom, {0.5, 0.5, 0.5}, {0, 0, 0}, 1.0).has_value());
    CHECK_FALSE(first_boundary_hit(dom, {0.5, 0.5, 0.5}, {1, 0, 0}, 0.1).has_value());
    CHECK_THROWS_AS((void)first_boundary_hit(dom, {2.0, 0.5, 0.5}, {1, 0, 0}, 1.0),
                    PreconditionError);
}

TEST_CASE("first_boundary_hit lands on the boundary for random rays") {
    const DomainSpec dom = box_minus_ball();
    const double diag = dom.diagonal();
    const CounterRng rng(7, 1);
    int hits = 0;
    for (int s = 0; s < 300; ++s) {
        Vec3 x{0.5 + 0.3 * (rng.uniform(9 * s) - 0.5), 0.5 + 0.3 * (rng.uniform(9 * s + 1) - 0.5),
               0.05 + 0.1 * rng.uniform(9 * s + 2)};
        if (signed_distance(dom, x) >= 0.0)
            continue;
        const Vec3 v{rng.normal(9 * s + 3), rng.normal(9 * s + 4), rng.normal(9 * s + 5)};
        const auto hit = first_boundary_hit(dom, x, v, 2.0);
        if (!hit)
            continue;
        ++hits;
        CHECK(std::fabs(signed_distance(dom, hit->point)) <= 1e-10 * diag);
    }
    CHECK(hits > 50);
}

TEST_CASE("rasterize the full box") {
    const GridMask mask = rasterize(unit_box(), 16);
    CHECK(mask.nx == 16);
    CHECK(mask.ny == 16);
    CHECK(mask.nz == 16);
    CHECK(mask.inside_count() == 16 * 16 * 16);
    CHECK(mask.volume() == doctest::Approx(1.0).epsilon(1e-12));
    // a full box still has boundary-adjacent cells along the walls
    CHECK(mask.boundary.size() == 16 * 16 * 16 - 14 * 14 * 14);
}

TEST_CASE("rasterize box minus ball against the analytic volume") {
    const DomainSpec dom = box_minus_ball(0.25);
    const double exact = 1.0 - 4.0 / 3.0 * M_PI * 0.25 * 0.25 * 0.25;
    double prev_err = 1e300;
    for (int n : {16, 32, 64}) {
        const GridMask mask = rasterize(dom, n);
        const double err = std::fabs(mask.volume() - exact);
        CHECK(err < prev_err); // monotone improvement under refinement
        prev_err = err;
        if (n == 64)
            CHECK(err / exact < 0.02);
    }
}

TEST_CASE("rasterize error paths") {
    CHECK_THROWS_AS((void)rasterize(unit_box(), 4), PreconditionError);
    // ball covering the whole box: empty interior
    CHECK_THROWS_AS((void)rasterize(box_minus_ball(0.9), 16), DomainError);
    // ball blocking faces and edges but not corners: 8 disconnected pockets
    CHECK_THROWS_AS((void)rasterize(box_minus_ball(0.72), 16), DomainError);
}

TEST_CASE("rasterize boundary normals point outward") {
    const GridMask mask = rasterize(box_minus_ball(0.25), 32);
    const DomainSpec dom = box_minus_ball(0.25);
    for (const auto& bc : mask.boundary) {
        const Vec3 c = mask.cell_center(bc.cell);
        CHECK(norm(bc.normal) == doctest::Approx(1.0).epsilon(1e-9));
        // walking along the normal increases the signed distance
        const double step = mask.h / 2.0;
        CHECK(signed_distance(dom, c + bc.normal * step) >
              signed_distance(dom, c - bc.normal * step));
    }
}

TEST_CASE("validate_domain catches bad setups") {
    DomainSpec dom = unit_box();
    CHECK(validate_domain(dom).empty());
    dom.obstacles.push_back({{0.9, 0.5, 0.5}, 0.2}); // sticks out
    CHECK_FALSE(validate_domain(dom).empty());

    DomainSpec dom2 = unit_box();
    dom2.smoothing = 0.05;
    dom2.obstacles.push_back({{0.5, 0.5, 0.5}, 0.42}); // clearance < 2 smoothing
    CHECK_FALSE(validate_domain(dom2).empty());

    DomainSpec dom3 = unit_box();
    dom3.box_max = {0.0, 1.0, 1.0};
    CHECK_FALSE(validate_domain(dom3).empty());
}
