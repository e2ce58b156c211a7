#pragma once

#include <optional>
#include <vector>

#include "hjreach/collision.hpp"
#include "hjreach/hjb.hpp"

namespace hjreach {

/// First time at which the value function becomes non-positive per node;
/// kInf where the target is never reached within the horizon.
struct MinimalTimeField {
    GridSpec grid;
    std::vector<double> times;
};

/// Nodewise first-crossing scan over the stored snapshots (increasing time).
MinimalTimeField accumulate_min_time(const ValueEvolution& evolution);

/// Streaming variant fed from the solver's per-step observer, so the
/// minimal-time field sees every CFL step rather than only stored snapshots.
class MinTimeAccumulator {
public:
    explicit MinTimeAccumulator(const GridSpec& grid);
    void observe(double t, const ScalarField& v);
    const MinimalTimeField& field() const { return field_; }
    MinimalTimeField take() { return std::move(field_); }

private:
    MinimalTimeField field_;
};

/// Multilinear interpolation with conservative sentinels: any sentinel corner
/// or out-of-box query yields kInf.
double interp_min_time(const MinimalTimeField& field, std::span<const double> z);
double interp_min_time(const MinimalTimeField& field, const State4& z);

/// One Heun (RK2) step with piecewise constant control.
State4 heun_step(const State4& z, const Control& u, double h);

struct ReconstructionParams {
    double h = 0.02;       // reconstruction step, s
    double eta = 0.05;     // target threshold on the minimal time
    int max_steps = 2000;  // N
    int n_accel = 21;      // control grid points per axis
    int n_yaw = 21;
    int substeps = 1;  // Heun sub-steps within [t_n, t_n + h]
    ControlBounds bounds;
};

enum class TerminationReason { TargetReached, Infeasible, MaxIterations };

const char* to_string(TerminationReason r);

struct TrajectoryStep {
    double t = 0.0;
    State4 z;
    Control u;  // control applied on [t, t+h] (zero on the final record)
    double min_time = 0.0;
    double g = 0.0;  // constraint value at (z, t)
    StepCertificate certificate = StepCertificate::Certified;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    TerminationReason termination = TerminationReason::MaxIterations;
};

/// Optional per-step collision certification inputs for reconstruct().
struct CertificationContext {
    Vec2 vehicle_half;
    std::vector<ObstacleSpec> obstacles;  // rectangles only
    SafetyBound bound;
};

/// Greedy descent of the minimal-time field over the control grid (argmin of
/// the interpolated value after one Heun step; ties break to the lowest
/// control index).
Trajectory reconstruct(const MinimalTimeField& field, const State4& z0,
                       const ReconstructionParams& params,
                       const LevelSetExpr* constraint = nullptr,
                       const CertificationContext* certification = nullptr);

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& os);

void write_min_time_csv(const MinimalTimeField& field, std::ostream& os);

}  // namespace hjreach
