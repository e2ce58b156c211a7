#include "hjreach/levelset.hpp"

#include <numbers>
#include <stdexcept>

namespace hjreach {

Pose2 motion_pose(const ObstacleSpec& obstacle, double s) {
    return std::visit(
        [s](const auto& m) -> Pose2 {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, MotionFixed>) {
                return {m.pos, m.yaw};
            } else if constexpr (std::is_same_v<M, MotionLinear>) {
                return {m.pos0 + s * m.vel, std::atan2(m.vel.y, m.vel.x)};
            } else if constexpr (std::is_same_v<M, MotionDecelerating>) {
                const double t = std::min(s, m.stop_time());
                const double arc = m.speed * t - 0.5 * m.decel * t * t;
                return {m.pos0 + arc * Vec2{std::cos(m.heading), std::sin(m.heading)}, m.heading};
            } else {
                static_assert(std::is_same_v<M, MotionCircular>);
                const double th = m.theta0 + m.omega * s;
                return {m.center + m.radius * Vec2{std::cos(th), std::sin(th)},
                        th - std::numbers::pi / 2.0};
            }
        },
        obstacle.motion);
}

double motion_corner_speed(const ObstacleSpec& obstacle) {
    const double reach = std::visit(
        [](const auto& sh) -> double {
            using S = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<S, RectShape>)
                return std::hypot(sh.lx, sh.ly);
            else
                return sh.radius;
        },
        obstacle.shape);
    return std::visit(
        [reach](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, MotionFixed>)
                return 0.0;
            else if constexpr (std::is_same_v<M, MotionLinear>)
                return norm(m.vel);
            else if constexpr (std::is_same_v<M, MotionDecelerating>)
                return m.speed;
            else
                return std::abs(m.omega) * (m.radius + reach);
        },
        obstacle.motion);
}

std::array<Vec2, 4> rect_corners(Vec2 center, double yaw, Vec2 half_lengths) {
    std::array<Vec2, 4> out;
    int j = 0;
    for (double sy : {1.0, -1.0})
        for (double sx : {1.0, -1.0})
            out[static_cast<std::size_t>(j++)] =
                center + rotate(yaw, Vec2{sx * half_lengths.x, sy * half_lengths.y});
    return out;
}

LevelSetExpr combine_max(LevelSetExpr a, LevelSetExpr b) {
    const bool td = a.time_dependent() || b.time_dependent();
    const double lip = std::max(a.lipschitz(), b.lipschitz());
    return {[a = std::move(a), b = std::move(b)](std::span<const double> z, double s) {
                return std::max(a(z, s), b(z, s));
            },
            td, lip};
}

LevelSetExpr combine_min(LevelSetExpr a, LevelSetExpr b) {
    const bool td = a.time_dependent() || b.time_dependent();
    const double lip = std::max(a.lipschitz(), b.lipschitz());
    return {[a = std::move(a), b = std::move(b)](std::span<const double> z, double s) {
                return std::min(a(z, s), b(z, s));
            },
            td, lip};
}

LevelSetExpr constant_levelset(double value) {
    return {[value](std::span<const double>, double) { return value; }, false, 0.0};
}

LevelSetExpr straight_road(double y_down, double y_up) {
    return {[y_down, y_up](std::span<const double> z, double) {
                return std::max(-(z[1] - y_down), -(y_up - z[1]));
            },
            false, 1.0};
}

LevelSetExpr varying_width_road(double y_up, double y_down1, double y_down2, double x_bar) {
    return {[=](std::span<const double> z, double) {
                const double x = z[0], y = z[1];
                return std::max({std::min(-(y - y_down1), -(x - x_bar)), -(y - y_down2),
                                 y - y_up});
            },
            false, 1.0};
}

LevelSetExpr curved_road(Vec2 center, double r_down, double r_up, double theta_min,
                         double theta_max) {
    if (!(0.0 < r_down && r_down < r_up))
        throw std::invalid_argument("curved_road: need 0 < r_down < r_up");
    if (!(theta_min < theta_max && theta_max <= theta_min + 2.0 * std::numbers::pi))
        throw std::invalid_argument("curved_road: need theta_min < theta_max <= theta_min + 2*pi");
    const double mid = 0.5 * (theta_min + theta_max);
    const double lip = std::max(1.0, 1.0 / r_down);
    return {[=](std::span<const double> z, double) {
                const double dx = z[0] - center.x, dy = z[1] - center.y;
                const double rho = std::hypot(dx, dy);
                if (rho == 0.0) {
                    // Angle undefined at the center; the radial terms alone already
                    // exclude the point (rho = 0 < r_down).
                    return std::max(rho - r_up, -(rho - r_down));
                }
                double theta = std::atan2(dy, dx);
                // Continuous branch on the sector: wrap into [mid - pi, mid + pi).
                const double two_pi = 2.0 * std::numbers::pi;
                theta -= two_pi * std::floor((theta - mid + std::numbers::pi) / two_pi);
                return std::max({rho - r_up, -(rho - r_down), theta - theta_max,
                                 -(theta - theta_min)});
            },
            false, lip};
}

LevelSetExpr crossing_road(std::array<double, 4> xs, std::array<double, 4> ys) {
    return {[xs, ys](std::span<const double> z, double) {
                const double x = z[0], y = z[1];
                return std::max({std::min(x - xs[0], y - ys[0]),
                                 std::min(y - ys[1], -(x - xs[1])),
                                 std::min(-(x - xs[2]), -(y - ys[2])),
                                 std::min(-(y - ys[3]), x - xs[3])});
            },
            false, 1.0};
}

LevelSetExpr box_region(std::array<double, 4> lo, std::array<double, 4> hi) {
    return {[lo, hi](std::span<const double> z, double) {
                double g = -kInf;
                for (std::size_t c = 0; c < 4 && c < z.size(); ++c) {
                    if (lo[c] != -kInf) g = std::max(g, lo[c] - z[c]);
                    if (hi[c] != kInf) g = std::max(g, z[c] - hi[c]);
                }
                return g;
            },
            false, 1.0};
}

LevelSetExpr target_box(double x_target, double y_lo, double y_hi, double psi_anchor,
                        double psi_tol) {
    return box_region({x_target, y_lo, psi_anchor - psi_tol, -kInf},
                      {kInf, y_hi, psi_anchor + psi_tol, kInf});
}

LevelSetExpr disk_avoidance(std::vector<ObstacleSpec> obstacles, double vehicle_radius) {
    bool td = false;
    for (const ObstacleSpec& o : obstacles) {
        if (!std::holds_alternative<DiskShape>(o.shape))
            throw std::invalid_argument("disk_avoidance: all obstacles must be disks");
        td = td || o.is_moving();
    }
    return {[obstacles = std::move(obstacles), vehicle_radius](std::span<const double> z,
                                                               double s) {
                const Vec2 X{z[0], z[1]};
                double g = -kInf;
                for (const ObstacleSpec& o : obstacles) {
                    const Pose2 pose = motion_pose(o, s);
                    const double ri = std::get<DiskShape>(o.shape).radius;
                    g = std::max(g, -(norm(X - pose.pos) - vehicle_radius - ri));
                }
                return g;
            },
            td, 1.0};
}

namespace {

/// Corner-function value for one rectangle pair (corner-condition building block).
double rect_pair_value(Vec2 veh_center, double veh_yaw, Vec2 veh_half, Vec2 obs_center,
                       double obs_yaw, Vec2 obs_half) {
    double g = -kInf;
    for (const Vec2& c : rect_corners(obs_center, obs_yaw, obs_half))
        g = std::max(g, box_inclusion(rotate(-veh_yaw, c - veh_center), veh_half));
    for (const Vec2& c : rect_corners(veh_center, veh_yaw, veh_half))
        g = std::max(g, box_inclusion(rotate(-obs_yaw, c - obs_center), obs_half));
    return g;
}

}  // namespace

LevelSetExpr rect_avoidance(Vec2 vehicle_half_lengths, std::vector<ObstacleSpec> obstacles) {
    if (!(vehicle_half_lengths.x > 0.0 && vehicle_half_lengths.y > 0.0))
        throw std::invalid_argument("rect_avoidance: half-lengths must be positive");
    bool td = false;
    double max_obs_reach = 0.0;
    for (const ObstacleSpec& o : obstacles) {
        if (!o.is_rect())
            throw std::invalid_argument("rect_avoidance: all obstacles must be rectangles");
        const RectShape& r = std::get<RectShape>(o.shape);
        if (!(r.lx > 0.0 && r.ly > 0.0))
            throw std::invalid_argument("rect_avoidance: half-lengths must be positive");
        max_obs_reach = std::max(max_obs_reach, std::hypot(r.lx, r.ly));
        td = td || o.is_moving();
    }
    // Corner positions move at <= ||l||_2 per radian of yaw, which bounds the
    // psi-sensitivity of the corner functions.
    const double lip =
        std::max(1.0, norm(vehicle_half_lengths) + max_obs_reach);
    return {[vehicle_half_lengths, obstacles = std::move(obstacles)](std::span<const double> z,
                                                                     double s) {
                const Vec2 X{z[0], z[1]};
                const double psi = z.size() > 2 ? z[2] : 0.0;
                double g = -kInf;
                for (const ObstacleSpec& o : obstacles) {
                    const Pose2 pose = motion_pose(o, s);
                    const RectShape& r = std::get<RectShape>(o.shape);
                    g = std::max(g, rect_pair_value(X, psi, vehicle_half_lengths, pose.pos,
                                                    pose.yaw, Vec2{r.lx, r.ly}));
                }
                return g;
            },
            td, lip};
}

}  // namespace hjreach
