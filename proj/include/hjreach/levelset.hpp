#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "hjreach/dynamics.hpp"

namespace hjreach {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Pose2 {
    Vec2 pos;
    double yaw = 0.0;
};

inline Vec2 rotate(double angle, Vec2 p) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// ---------------------------------------------------------------------------
// Obstacle shapes and motion laws

struct RectShape {
    double lx = 0.0;  // half-lengths, m
    double ly = 0.0;
};

struct DiskShape {
    double radius = 0.0;
};

struct MotionFixed {
    Vec2 pos;
    double yaw = 0.0;
};

struct MotionLinear {
    Vec2 pos0;
    Vec2 vel;
};

/// Straight-line motion that brakes at constant rate and freezes once stopped.
struct MotionDecelerating {
    Vec2 pos0;
    double heading = 0.0;
    double speed = 0.0;  // initial speed, m/s
    double decel = 0.0;  // >= 0, m/s^2

    double stop_time() const { return decel > 0.0 ? speed / decel : kInf; }
};

struct MotionCircular {
    Vec2 center;
    double radius = 0.0;
    double theta0 = 0.0;
    double omega = 0.0;  // rad/s
};

using Motion = std::variant<MotionFixed, MotionLinear, MotionDecelerating, MotionCircular>;

struct ObstacleSpec {
    std::variant<RectShape, DiskShape> shape;
    Motion motion;

    bool is_rect() const { return std::holds_alternative<RectShape>(shape); }
    bool is_moving() const { return !std::holds_alternative<MotionFixed>(motion); }
};

Pose2 motion_pose(const ObstacleSpec& obstacle, double s);

/// Conservative bound on the speed of any point of the obstacle over [0, horizon].
double motion_corner_speed(const ObstacleSpec& obstacle);

// ---------------------------------------------------------------------------
// Rectangle geometry

/// The four corners X + R_yaw * (+-lx, +-ly).
std::array<Vec2, 4> rect_corners(Vec2 center, double yaw, Vec2 half_lengths);

/// Box inclusion value for the axis-aligned box [-lx,lx]x[-ly,ly]:
/// min(lx-|x|, ly-|y|), negative outside, zero on the boundary.
inline double box_inclusion(Vec2 p, Vec2 half_lengths) {
    return std::min(half_lengths.x - std::abs(p.x), half_lengths.y - std::abs(p.y));
}

// ---------------------------------------------------------------------------
// Level set expressions. Convention: g(z, s) <= 0  <=>  constraint satisfied.

class LevelSetExpr {
public:
    using Fn = std::function<double(std::span<const double>, double)>;

    LevelSetExpr() = default;
    LevelSetExpr(Fn fn, bool time_dependent, double lipschitz)
        : fn_(std::move(fn)), time_dependent_(time_dependent), lipschitz_(lipschitz) {}

    double operator()(std::span<const double> z, double s) const { return fn_(z, s); }
    double operator()(const State4& z, double s) const {
        const std::array<double, 4> a{z.x, z.y, z.psi, z.v};
        return fn_(a, s);
    }

    bool time_dependent() const { return time_dependent_; }
    double lipschitz() const { return lipschitz_; }
    bool valid() const { return static_cast<bool>(fn_); }

private:
    Fn fn_;
    bool time_dependent_ = false;
    double lipschitz_ = 1.0;
};

/// Intersection of feasible sets.
LevelSetExpr combine_max(LevelSetExpr a, LevelSetExpr b);
/// Union of feasible sets.
LevelSetExpr combine_min(LevelSetExpr a, LevelSetExpr b);

LevelSetExpr constant_levelset(double value);

/// Straight road band y_down <= y <= y_up.
LevelSetExpr straight_road(double y_down, double y_up);

/// Road widening from y_down1 to y_down2 (< y_down1) for x > x_bar.
LevelSetExpr varying_width_road(double y_up, double y_down1, double y_down2, double x_bar);

/// Annulus sector: r_down <= rho <= r_up, theta_min <= Theta <= theta_max,
/// with the angle branch chosen continuously on the sector.
LevelSetExpr curved_road(Vec2 center, double r_down, double r_up, double theta_min,
                         double theta_max);

/// Crossing of a horizontal and a vertical street with corner points
/// (x0,y0) upper-right, (x1,y1) upper-left, (x2,y2) lower-left, (x3,y3) lower-right.
LevelSetExpr crossing_road(std::array<double, 4> xs, std::array<double, 4> ys);

/// Axis-aligned box in state space; +-inf bounds disable a face.
LevelSetExpr box_region(std::array<double, 4> lo, std::array<double, 4> hi);

/// Target {x >= x_target, y_lo <= y <= y_hi, |psi - psi_anchor| <= psi_tol}.
LevelSetExpr target_box(double x_target, double y_lo, double y_hi, double psi_anchor,
                        double psi_tol);

/// Disk-vehicle vs disk-obstacle avoidance; aggregation over obstacles uses max
/// so that g < 0 means clear of every obstacle.
LevelSetExpr disk_avoidance(std::vector<ObstacleSpec> obstacles, double vehicle_radius);

/// Rectangle-vehicle vs rectangle-obstacle corner-function avoidance. Negative iff
/// every obstacle corner lies outside the vehicle and vice versa (necessary but not
/// sufficient for disjointness; see the collision module for the time-step bound).
LevelSetExpr rect_avoidance(Vec2 vehicle_half_lengths, std::vector<ObstacleSpec> obstacles);

}  // namespace hjreach
