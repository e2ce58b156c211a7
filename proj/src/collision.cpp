#include "hjreach/collision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hjreach {

namespace {

std::array<Vec2, 4> corners(const RectPose& r) { return rect_corners(r.center, r.yaw, r.half); }

/// Projection interval of a rectangle onto a unit axis.
std::pair<double, double> project(const RectPose& r, Vec2 axis) {
    double lo = kInf, hi = -kInf;
    for (const Vec2& c : corners(r)) {
        const double t = c.x * axis.x + c.y * axis.y;
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    return {lo, hi};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

}  // namespace

bool exact_rect_intersect(const RectPose& a, const RectPose& b) {
    for (double yaw : {a.yaw, b.yaw}) {
        for (Vec2 axis : {Vec2{std::cos(yaw), std::sin(yaw)},
                          Vec2{-std::sin(yaw), std::cos(yaw)}}) {
            const auto [alo, ahi] = project(a, axis);
            const auto [blo, bhi] = project(b, axis);
            if (ahi < blo || bhi < alo) return false;  // separating axis found
        }
    }
    return true;
}

double rect_distance(const RectPose& a, const RectPose& b) {
    if (exact_rect_intersect(a, b)) return 0.0;
    const auto ca = corners(a), cb = corners(b);
    double d = kInf;
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
            d = std::min(d, point_segment_distance(ca[static_cast<std::size_t>(j)],
                                                   cb[static_cast<std::size_t>(k)],
                                                   cb[static_cast<std::size_t>((k + 1) % 4)]));
            d = std::min(d, point_segment_distance(cb[static_cast<std::size_t>(j)],
                                                   ca[static_cast<std::size_t>(k)],
                                                   ca[static_cast<std::size_t>((k + 1) % 4)]));
        }
    }
    return d;
}

bool corner_condition(const RectPose& vehicle, std::span<const ObstacleSpec> obstacles,
                      double s) {
    for (const ObstacleSpec& o : obstacles) {
        if (!o.is_rect()) throw std::invalid_argument("corner_condition: rectangle obstacles only");
        const RectShape& r = std::get<RectShape>(o.shape);
        const Pose2 pose = motion_pose(o, s);
        for (const Vec2& c : rect_corners(pose.pos, pose.yaw, {r.lx, r.ly}))
            if (box_inclusion(rotate(-vehicle.yaw, c - vehicle.center), vehicle.half) >= 0.0)
                return false;
        for (const Vec2& c : corners(vehicle))
            if (box_inclusion(rotate(-pose.yaw, c - pose.pos), Vec2{r.lx, r.ly}) >= 0.0)
                return false;
    }
    return true;
}

SafetyBound compute_safety_bound(Vec2 vehicle_half, const ControlBounds& bounds,
                                 std::span<const ObstacleSpec> obstacles, double v_domain_max) {
    if (!(vehicle_half.x > 0.0 && vehicle_half.y > 0.0))
        throw std::invalid_argument("compute_safety_bound: vehicle half-lengths must be positive");
    SafetyBound sb;
    sb.d_under = std::min(vehicle_half.x, vehicle_half.y);
    double obstacle_speed = 0.0;
    for (const ObstacleSpec& o : obstacles) {
        const double min_extent = std::visit(
            [](const auto& sh) -> double {
                using S = std::decay_t<decltype(sh)>;
                if constexpr (std::is_same_v<S, RectShape>)
                    return std::min(sh.lx, sh.ly);
                else
                    return sh.radius;
            },
            o.shape);
        if (!(min_extent > 0.0))
            throw std::invalid_argument("compute_safety_bound: obstacle extents must be positive");
        sb.d_under = std::min(sb.d_under, min_extent);
        obstacle_speed = std::max(obstacle_speed, motion_corner_speed(o));
    }
    // Vehicle corner speed <= |X'| + w_max * ||l||; relative speed adds the
    // fastest obstacle corner.
    sb.v_bar = v_domain_max + bounds.w_max * norm(vehicle_half) + obstacle_speed;
    sb.dt_max = sb.v_bar > 0.0 ? sb.d_under / sb.v_bar : kInf;
    return sb;
}

const char* to_string(StepCertificate c) {
    switch (c) {
        case StepCertificate::Certified: return "certified";
        case StepCertificate::NotDisjointAtStart: return "not-disjoint-at-start";
        case StepCertificate::CornerConditionFailed: return "corner-condition-failed";
        case StepCertificate::TimeStepTooLarge: return "time-step-too-large";
    }
    return "unknown";
}

StepCertificate certify_step(bool disjoint_at_tn, bool corner_condition_at_tn1, double dt,
                             const SafetyBound& bound) {
    if (!disjoint_at_tn) return StepCertificate::NotDisjointAtStart;
    if (!corner_condition_at_tn1) return StepCertificate::CornerConditionFailed;
    if (!(dt < bound.dt_max)) return StepCertificate::TimeStepTooLarge;
    return StepCertificate::Certified;
}

double interstep_distance_bound(double d_tn, double d_tn1, double v_bar, double dt) {
    return std::min(d_tn, d_tn1) - 0.5 * v_bar * dt;
}

bool secure_margin_check(double g_tn, double g_tn1, double eps, double v_bar, double dt) {
    if (!(eps > 0.0)) throw std::invalid_argument("secure_margin_check: eps must be positive");
    if (std::max(g_tn, g_tn1) > -eps) return false;
    if (v_bar == 0.0) return true;
    return 0.5 * dt <= eps / v_bar;
}

}  // namespace hjreach
