#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjreach/collision.hpp"
#include "hjreach/levelset.hpp"

using namespace hjreach;

namespace {

constexpr double kPi = std::numbers::pi;

double eval4(const LevelSetExpr& e, double x, double y, double psi = 0.0, double v = 0.0,
             double t = 0.0) {
    const std::array<double, 4> z{x, y, psi, v};
    return e(z, t);
}

}  // namespace

TEST_CASE("combine_max / combine_min algebra") {
    const LevelSetExpr g1 = constant_levelset(-1.0);
    const LevelSetExpr g2 = constant_levelset(1.0);
    CHECK(eval4(combine_max(g1, g2), 0, 0) == 1.0);   // infeasible wins in intersections
    CHECK(eval4(combine_min(g1, g2), 0, 0) == -1.0);  // feasible wins in unions

    const LevelSetExpr band = straight_road(-3.5, 3.5);
    CHECK(eval4(combine_max(band, band), 0, 1.0) == eval4(band, 0, 1.0));  // idempotence
    CHECK(eval4(combine_min(band, band), 0, 1.0) == eval4(band, 0, 1.0));
}

TEST_CASE("max/min feasible sets are intersection/union on sampled points") {
    const LevelSetExpr a = straight_road(-2.0, 2.0);
    const LevelSetExpr b = box_region({-1.0, -kInf, -kInf, -kInf}, {1.0, kInf, kInf, kInf});
    const LevelSetExpr both = combine_max(a, b);
    const LevelSetExpr either = combine_min(a, b);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng), y = u(rng);
        const bool in_a = eval4(a, x, y) <= 0.0, in_b = eval4(b, x, y) <= 0.0;
        CHECK((eval4(both, x, y) <= 0.0) == (in_a && in_b));
        CHECK((eval4(either, x, y) <= 0.0) == (in_a || in_b));
    }
}

TEST_CASE("straight road band") {
    const LevelSetExpr g = straight_road(-3.5, 3.5);
    CHECK(eval4(g, 100.0, 0.0) == doctest::Approx(-3.5));
    CHECK(eval4(g, -5.0, 3.5) == doctest::Approx(0.0));
    CHECK(eval4(g, 0.0, 5.0) == doctest::Approx(1.5));
}

TEST_CASE("varying width road") {
    const LevelSetExpr g = varying_width_road(3.5, -3.5, -7.0, -15.0);
    CHECK(eval4(g, -20.0, -5.0) == doctest::Approx(1.5));  // narrow section, below the road
    CHECK(eval4(g, 0.0, -5.0) == doctest::Approx(-2.0));   // widened section
    CHECK(eval4(g, 0.0, 0.0) == doctest::Approx(-3.5));
}

TEST_CASE("curved road annulus sector") {
    const LevelSetExpr g = curved_road({0, 0}, 46.5, 53.5, 0.0, kPi);
    // Mid-road: max(50-53.5, 46.5-50, pi/2-pi, -(pi/2)) = -pi/2 (the angular
    // terms dominate the radial clearance here).
    CHECK(eval4(g, 0.0, 50.0) == doctest::Approx(-kPi / 2));
    CHECK(eval4(g, 0.0, 55.0) == doctest::Approx(1.5));
    // Slightly below theta_min: radially fine, angularly infeasible.
    CHECK(eval4(g, 50.0 * std::cos(-0.1), 50.0 * std::sin(-0.1)) > 0.0);
    // Degenerate center point: infeasible by the radius terms.
    CHECK(eval4(g, 0.0, 0.0) > 0.0);

    CHECK_THROWS_AS(curved_road({0, 0}, 5.0, 4.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(curved_road({0, 0}, 1.0, 2.0, 0.0, 7.0), std::invalid_argument);
}

TEST_CASE("crossing road") {
    // Horizontal street y in [-4, 2], vertical street x in [-20, -15].
    const std::array<double, 4> xs{-15.0, -20.0, -20.0, -15.0};
    const std::array<double, 4> ys{2.0, 2.0, -4.0, -4.0};
    const LevelSetExpr g = crossing_road(xs, ys);
    CHECK(eval4(g, -30.0, -1.0) < 0.0);  // deep inside the horizontal street
    CHECK(eval4(g, -17.5, 6.0) < 0.0);   // inside the vertical street
    CHECK(eval4(g, xs[0], ys[0]) == doctest::Approx(0.0));  // corner point
    CHECK(eval4(g, -30.0, 5.0) > 0.0);   // forbidden quadrant interior
    CHECK(eval4(g, -10.0, -6.0) > 0.0);
}

TEST_CASE("target box") {
    const LevelSetExpr phi = target_box(0.0, -3.5, 3.5, 0.0, 0.1);
    CHECK(eval4(phi, 1.0, 0.0, 0.0) < 0.0);
    CHECK(eval4(phi, -1.0, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(eval4(phi, 1.0, 0.0, 0.2) == doctest::Approx(0.1));
}

TEST_CASE("disk avoidance") {
    ObstacleSpec near{DiskShape{1.0}, MotionFixed{{3.0, 0.0}, 0.0}};
    const LevelSetExpr g1 = disk_avoidance({near}, 2.0);
    CHECK(eval4(g1, 0.0, 0.0) == doctest::Approx(0.0));  // tangency: 3 = 1 + 2
    CHECK(eval4(g1, -10.0, 0.0) < 0.0);

    // Two obstacles, overlapping only the second: max aggregation flags it.
    ObstacleSpec far{DiskShape{1.0}, MotionFixed{{100.0, 0.0}, 0.0}};
    ObstacleSpec hit{DiskShape{1.0}, MotionFixed{{1.0, 0.0}, 0.0}};
    const LevelSetExpr g2 = disk_avoidance({far, hit}, 2.0);
    CHECK(eval4(g2, 0.0, 0.0) > 0.0);
}

TEST_CASE("rect_corners") {
    const auto c1 = rect_corners({0, 0}, 0.0, {1.0, 1.0});
    for (const Vec2& c : c1) {
        CHECK(std::abs(c.x) == doctest::Approx(1.0));
        CHECK(std::abs(c.y) == doctest::Approx(1.0));
    }
    const auto c2 = rect_corners({0, 0}, kPi / 2, {2.0, 1.0});
    bool found = false;
    for (const Vec2& c : c2)
        if (std::abs(c.x + 1.0) < 1e-12 && std::abs(c.y - 2.0) < 1e-12) found = true;
    CHECK(found);
    // Translation equivariance.
    const auto c3 = rect_corners({5, -7}, 0.3, {2.0, 1.0});
    const auto c0 = rect_corners({0, 0}, 0.3, {2.0, 1.0});
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(c3[j].x == doctest::Approx(c0[j].x + 5.0));
        CHECK(c3[j].y == doctest::Approx(c0[j].y - 7.0));
    }
}

TEST_CASE("box_inclusion corner function") {
    CHECK(box_inclusion({0, 0}, {1, 1}) == doctest::Approx(1.0));
    CHECK(box_inclusion({0.5, 2.0}, {1, 1}) == doctest::Approx(-1.0));
    CHECK(box_inclusion({1.0, 0.0}, {1, 1}) == doctest::Approx(0.0));
    // Sign characterization: negative exactly outside the box.
    CHECK(box_inclusion({2.0, 0.0}, {1, 1}) < 0.0);  // the published max form fails here
}

TEST_CASE("rect avoidance sign") {
    ObstacleSpec far{RectShape{1.0, 1.0}, MotionFixed{{10.0, 0.0}, 0.0}};
    const LevelSetExpr g1 = rect_avoidance({1.0, 1.0}, {far});
    CHECK(eval4(g1, 0.0, 0.0, 0.0) < 0.0);

    // Coincident identical rectangles sit exactly on the corner-function zero
    // level; a strictly smaller obstacle inside the vehicle is positive.
    ObstacleSpec coincident{RectShape{1.0, 1.0}, MotionFixed{{0.0, 0.0}, 0.0}};
    const LevelSetExpr g2 = rect_avoidance({1.0, 1.0}, {coincident});
    CHECK(eval4(g2, 0.0, 0.0, 0.0) >= 0.0);
    ObstacleSpec inside{RectShape{0.5, 0.5}, MotionFixed{{0.0, 0.0}, 0.0}};
    const LevelSetExpr g3 = rect_avoidance({1.0, 1.0}, {inside});
    CHECK(eval4(g3, 0.0, 0.0, 0.0) > 0.0);

    CHECK_THROWS_AS(rect_avoidance({0.0, 1.0}, {far}), std::invalid_argument);
}

TEST_CASE("crossed plus-sign configuration: corner test passes despite overlap") {
    // Long thin vehicle crossed with a long thin obstacle: no corner of either
    // rectangle lies inside the other, yet they overlap. The corner-function
    // level set must reproduce this known insufficiency, not mask it.
    ObstacleSpec crossed{RectShape{0.5, 3.0}, MotionFixed{{0.0, 0.0}, 0.0}};
    const LevelSetExpr g = rect_avoidance({3.0, 0.5}, {crossed});
    CHECK(eval4(g, 0.0, 0.0, 0.0) < 0.0);
    CHECK(exact_rect_intersect({{0, 0}, 0.0, {3.0, 0.5}}, {{0, 0}, 0.0, {0.5, 3.0}}));
}

TEST_CASE("rect avoidance sign agrees with direct corner-inclusion tests") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10000; ++k) {
        const Vec2 vh{0.2 + std::abs(u(rng)), 0.2 + std::abs(u(rng))};
        const Vec2 oh{0.2 + std::abs(u(rng)), 0.2 + std::abs(u(rng))};
        const Vec2 oc{3.0 * u(rng), 3.0 * u(rng)};
        const double vyaw = kPi * u(rng), oyaw = kPi * u(rng);
        ObstacleSpec obs{RectShape{oh.x, oh.y}, MotionFixed{oc, oyaw}};
        const LevelSetExpr g = rect_avoidance(vh, {obs});
        const std::array<double, 4> z{0.0, 0.0, vyaw, 0.0};

        bool corner_inside = false;
        for (const Vec2& c : rect_corners(oc, oyaw, oh))
            if (box_inclusion(rotate(-vyaw, c), vh) >= 0.0) corner_inside = true;
        for (const Vec2& c : rect_corners({0, 0}, vyaw, vh))
            if (box_inclusion(rotate(-oyaw, c - oc), oh) >= 0.0) corner_inside = true;
        CHECK((g(z, 0.0) >= 0.0) == corner_inside);
    }
}

TEST_CASE("motion laws") {
    ObstacleSpec lin{RectShape{1, 1}, MotionLinear{{1.0, 2.0}, {10.0, 0.0}}};
    const Pose2 p1 = motion_pose(lin, 2.0);
    CHECK(p1.pos.x == doctest::Approx(21.0));
    CHECK(p1.pos.y == doctest::Approx(2.0));
    CHECK(p1.yaw == doctest::Approx(0.0));

    // Decelerating from 5 m/s at 5 m/s^2: stops after 1 s having gone 2.5 m.
    ObstacleSpec dec{RectShape{1, 1}, MotionDecelerating{{0.0, 0.0}, 0.0, 5.0, 5.0}};
    CHECK(motion_pose(dec, 1.0).pos.x == doctest::Approx(2.5));
    CHECK(motion_pose(dec, 2.0).pos.x == doctest::Approx(2.5));
    CHECK(motion_pose(dec, 0.5).pos.x == doctest::Approx(5.0 * 0.5 - 0.5 * 5.0 * 0.25));

    ObstacleSpec frozen{RectShape{1, 1}, MotionCircular{{0.0, 0.0}, 50.0, 1.2, 0.0}};
    const Pose2 p0 = motion_pose(frozen, 0.0);
    const Pose2 p9 = motion_pose(frozen, 9.0);
    CHECK(p0.pos.x == doctest::Approx(p9.pos.x));
    CHECK(p0.pos.y == doctest::Approx(p9.pos.y));
    CHECK(p0.yaw == doctest::Approx(p9.yaw));

    ObstacleSpec circ{RectShape{1, 1}, MotionCircular{{1.0, -1.0}, 2.0, 0.0, kPi / 2}};
    const Pose2 pc = motion_pose(circ, 1.0);
    CHECK(pc.pos.x == doctest::Approx(1.0));
    CHECK(pc.pos.y == doctest::Approx(1.0));
    CHECK(pc.yaw == doctest::Approx(0.0));  // theta - pi/2
}

TEST_CASE("fixed-motion expressions are time independent") {
    ObstacleSpec obs{RectShape{1, 1}, MotionFixed{{2.0, 1.0}, 0.3}};
    const LevelSetExpr g = rect_avoidance({1.0, 0.5}, {obs});
    CHECK_FALSE(g.time_dependent());
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng), y = u(rng), psi = 0.3 * u(rng);
        CHECK(eval4(g, x, y, psi, 0.0, 0.0) == eval4(g, x, y, psi, 0.0, u(rng)));
    }

    ObstacleSpec moving{RectShape{1, 1}, MotionLinear{{0, 0}, {1, 0}}};
    CHECK(rect_avoidance({1.0, 0.5}, {moving}).time_dependent());
}

TEST_CASE("empirical Lipschitz bound on constructed expressions") {
    const LevelSetExpr road = curved_road({0, 0}, 46.5, 53.5, 1.25, 2.4);
    ObstacleSpec obs{RectShape{0.5, 0.25}, MotionFixed{{-25.0, 45.0}, 0.4}};
    const LevelSetExpr g = combine_max(road, rect_avoidance({0.5, 0.5}, {obs}));
    const double lip = g.lipschitz();
    CHECK(lip >= 1.0);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> ux(-42.0, 20.0), uy(28.0, 56.0), up(-0.6, 1.2);
    for (int k = 0; k < 2000; ++k) {
        const std::array<double, 4> z1{ux(rng), uy(rng), up(rng), 0.0};
        const std::array<double, 4> z2{ux(rng), uy(rng), up(rng), 0.0};
        const double dist = std::sqrt((z1[0] - z2[0]) * (z1[0] - z2[0]) +
                                      (z1[1] - z2[1]) * (z1[1] - z2[1]) +
                                      (z1[2] - z2[2]) * (z1[2] - z2[2]));
        CHECK(std::abs(g(z1, 0.0) - g(z2, 0.0)) <= lip * dist + 1e-9);
    }
}
