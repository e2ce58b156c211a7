#pragma once

#include <span>
#include <string>
#include <vector>

#include "hjreach/levelset.hpp"

namespace hjreach {

struct RectPose {
    Vec2 center;
    double yaw = 0.0;
    Vec2 half;
};

/// Exact rotated-rectangle overlap via separating axes over the four edge
/// normals. Closed-set convention: touching rectangles intersect.
bool exact_rect_intersect(const RectPose& a, const RectPose& b);

/// Signed distance between two rectangles as used by the inter-step bound:
/// positive clearance when disjoint, else <= 0. Computed by dense corner/edge
/// projection (exact for disjoint convex polygons).
double rect_distance(const RectPose& a, const RectPose& b);

/// Corner condition: every obstacle corner is outside the vehicle and
/// every vehicle corner outside every obstacle.
bool corner_condition(const RectPose& vehicle, std::span<const ObstacleSpec> obstacles,
                      double s);

/// Time-step safety data: dt_max = d_under / v_bar.
struct SafetyBound {
    double d_under = 0.0;  // minimal half-length over vehicle and obstacles
    double v_bar = 0.0;    // conservative bound on relative corner speeds
    double dt_max = kInf;
};

SafetyBound compute_safety_bound(Vec2 vehicle_half, const ControlBounds& bounds,
                                 std::span<const ObstacleSpec> obstacles, double v_domain_max);

enum class StepCertificate {
    Certified,              // disjoint at t_{n+1}
    NotDisjointAtStart,     // hypothesis (i) failed
    CornerConditionFailed,  // hypothesis (ii) failed
    TimeStepTooLarge,       // hypothesis (iii) failed
};

const char* to_string(StepCertificate c);

/// Given disjointness at t_n, the corner condition at t_{n+1} and
/// dt < dt_max, the configurations stay disjoint at t_{n+1}.
StepCertificate certify_step(bool disjoint_at_tn, bool corner_condition_at_tn1, double dt,
                             const SafetyBound& bound);

/// Lower bound on the minimal distance over [t_n, t_{n+1}].
double interstep_distance_bound(double d_tn, double d_tn1, double v_bar, double dt);

/// Eps-margin certificate: collision-free over the whole interval.
bool secure_margin_check(double g_tn, double g_tn1, double eps, double v_bar, double dt);

}  // namespace hjreach
