#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hjreach/hjb.hpp"
#include "hjreach/mintime.hpp"

namespace hjreach {

/// Raised for malformed or inconsistent scenario configurations (CLI exit 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RoadConfig {
    enum class Kind { None, Straight, VaryingWidth, Curved, Crossing };
    Kind kind = Kind::None;
    // straight / varying width
    double y_down = 0.0, y_up = 0.0, y_down2 = 0.0, x_bar = 0.0;
    // curved
    Vec2 center;
    double r_down = 0.0, r_up = 0.0, theta_min = 0.0, theta_max = 0.0;
    // crossing
    std::array<double, 4> xs{}, ys{};
};

struct TargetBoxConfig {
    // +-inf bounds disable a face.
    double x_min = -kInf, x_max = kInf;
    double y_min = -kInf, y_max = kInf;
    double psi_anchor = 0.0;
    double psi_tol = kInf;  // infinite tolerance = no yaw constraint
};

struct VehicleConfig {
    Vec2 half_lengths{1.0, 1.0};
    State4 initial_state;
    ControlBounds bounds;
};

struct OutputConfig {
    std::vector<double> snapshot_times;
    double slice_psi = 0.0;  // physical values; snapped to the nearest node
    double slice_v = 0.0;
};

struct ReconstructionConfig {
    double h = 0.02;
    std::optional<double> eta;  // absent: 1.5 * max_j dx_j / v0
    int max_steps = 2000;
    int n_accel = 21;
    int n_yaw = 21;
    int substeps = 1;
};

struct ScenarioConfig {
    std::string name;
    RoadConfig road;
    VehicleConfig vehicle;
    std::vector<ObstacleSpec> obstacles;
    std::vector<TargetBoxConfig> targets;  // union (min) of boxes
    double horizon = 2.0;
    HJBMode mode = HJBMode::CaptureBasin;
    double cfl = 0.5;
    GridSpec grid;
    ReconstructionConfig reconstruction;
    OutputConfig output;

    double eta() const;  // resolved threshold
};

// -- catalog ----------------------------------------------------------------

std::vector<std::string> scenario_names();
ScenarioConfig builtin_scenario(const std::string& name);

// -- serialization (JSON) ---------------------------------------------------

std::string serialize_config(const ScenarioConfig& config);
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

// -- assembly ---------------------------------------------------------------

LevelSetExpr make_road(const RoadConfig& road);
LevelSetExpr make_target(const ScenarioConfig& config);
LevelSetExpr make_constraint(const ScenarioConfig& config);  // road ^ obstacle avoidance
HJBProblem make_problem(const ScenarioConfig& config);

/// Throws ConfigError on invalid data; verifies the initial pose is inside the
/// grid box and disjoint from every obstacle (exact oracle at t = 0).
void validate(const ScenarioConfig& config);

// -- runners ----------------------------------------------------------------

struct SolveArtifacts {
    ValueEvolution evolution;
    MinimalTimeField min_time;
    double solve_seconds = 0.0;
    std::vector<double> dt_schedule;
};

SolveArtifacts run_solve(const ScenarioConfig& config, const std::string& output_dir,
                         int workers = 0);

Trajectory run_reconstruct(const ScenarioConfig& config, const MinimalTimeField& min_time,
                           const std::optional<State4>& start_override,
                           const std::string& output_dir);

struct ConvergenceRow {
    int m = 0;
    int nx = 0, ny = 0;
    double dt = 0.0;
    ErrorNorms errors;
    double order_linf = 0.0, order_l1 = 0.0, order_l2 = 0.0;  // 0 on the first row
    double cpu_seconds = 0.0;
};

/// Scenario-1 style refinement study: N_x = 35*2^m, N_y = 4*2^m against a
/// reference solution at reference_m (resampled where nodes do not coincide).
std::vector<ConvergenceRow> run_convergence(const ScenarioConfig& config,
                                            const std::vector<int>& m_list, int reference_m,
                                            int workers = 0);

void write_convergence_table(const std::vector<ConvergenceRow>& rows, std::ostream& os);

/// Rasterize one of the scenario's expressions ("road", "obstacle", "target",
/// "constraint") on the (x, y) plane at the output slice (psi, v) and time t.
void rasterize_levelset(const ScenarioConfig& config, const std::string& selector, double time,
                        std::ostream& os);

}  // namespace hjreach
