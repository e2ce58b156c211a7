#include "hjreach/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hjreach {

using nlohmann::json;

double ScenarioConfig::eta() const {
    if (reconstruction.eta) return *reconstruction.eta;
    double max_dx = 0.0;
    for (int a = 0; a < grid.dim(); ++a) max_dx = std::max(max_dx, grid.axis(a).step());
    const double v_char = std::max(1.0, std::abs(vehicle.initial_state.v));
    return 1.5 * max_dx / v_char;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

GridSpec vehicle_grid(double x0, double x1, int nx, double y0, double y1, int ny, double p0,
                      double p1, int npsi, double v0, double v1, int nv) {
    return GridSpec({{"x", x0, x1, nx},
                     {"y", y0, y1, ny},
                     {"psi", p0, p1, npsi},
                     {"v", v0, v1, nv}});
}

ObstacleSpec fixed_rect(double lx, double ly, Vec2 pos, double yaw = 0.0) {
    return {RectShape{lx, ly}, MotionFixed{pos, yaw}};
}

}  // namespace

std::vector<std::string> scenario_names() {
    return {"scenario1", "scenario2a", "scenario2b", "scenario3a", "scenario3b", "scenario4"};
}

ScenarioConfig builtin_scenario(const std::string& name) {
    ScenarioConfig c;
    c.name = name;
    if (name == "scenario1") {
        c.road.kind = RoadConfig::Kind::Straight;
        c.road.y_down = -3.5;
        c.road.y_up = 3.5;
        c.vehicle = {{1.0, 1.0}, {-40.0, -1.5, 0.0, 35.0}, {}};
        c.obstacles = {fixed_rect(1.0, 1.0, {-10.0, -1.5})};
        c.targets = {{.x_min = 0.0, .y_min = -3.5, .y_max = 3.5, .psi_anchor = 0.0, .psi_tol = kInf}};
        c.horizon = 2.0;
        c.grid = vehicle_grid(-50, 10, 70, -4, 4, 8, -1, 1, 20, 5, 65, 6);
        c.output = {{0.5, 1.0, 1.5, 2.0}, 0.0, 35.0};
        return c;
    }
    if (name == "scenario2a" || name == "scenario2b") {
        c.road.kind = RoadConfig::Kind::VaryingWidth;
        c.road.y_up = 3.5;
        c.road.y_down = -3.5;  // upstream lower edge
        c.road.y_down2 = -7.0;
        c.road.x_bar = -15.0;
        c.vehicle = {{1.0, 1.0}, {-40.0, -1.5, 0.0, 35.0}, {}};
        const Vec2 second_start = name == "scenario2a" ? Vec2{-40.0, 1.5} : Vec2{-10.0, 1.5};
        c.obstacles = {{RectShape{1.0, 1.0}, MotionLinear{{-10.0, -1.5}, {10.0, 0.0}}},
                       {RectShape{1.0, 1.0}, MotionLinear{second_start, {20.0, 0.0}}}};
        c.targets = {{.x_min = 0.0, .y_min = -3.5, .y_max = 3.5, .psi_anchor = 0.0, .psi_tol = kInf}};
        c.horizon = 2.0;
        c.grid = vehicle_grid(-50, 10, 70, -8, 4, 12, -1, 1, 20, 5, 65, 6);
        c.output = {{1.0, 2.0}, 0.0, 35.0};
        return c;
    }
    if (name == "scenario3a" || name == "scenario3b") {
        c.road.kind = RoadConfig::Kind::Curved;
        c.road.center = {0.0, 0.0};
        c.road.r_down = 46.5;
        c.road.r_up = 53.5;
        c.road.theta_min = 1.25;
        c.road.theta_max = 2.4;
        const double theta0 = 2.3;
        c.vehicle = {{0.5, 0.5},
                     {50.0 * std::cos(theta0), 50.0 * std::sin(theta0),
                      theta0 - std::numbers::pi / 2.0, 30.0},
                     {}};
        if (name == "scenario3a") {
            const double th1 = std::atan2(48.25, -5.0), th2 = std::atan2(45.0, -25.0);
            c.obstacles = {fixed_rect(0.25, 0.25, {-5.0, 48.25}, th1 - std::numbers::pi / 2.0),
                           fixed_rect(0.5, 0.25, {-25.0, 45.0}, th2 - std::numbers::pi / 2.0)};
        } else {
            // Obstacle circulating along the road centerline at 5 m/s (clockwise,
            // the vehicle's direction of travel); initial angle is figure-matched.
            c.obstacles = {{RectShape{0.5, 0.25},
                            MotionCircular{{0.0, 0.0}, 50.0, 1.8, -5.0 / 50.0}}};
        }
        c.targets = {{.x_min = 0.0, .psi_anchor = 0.0, .psi_tol = 0.15}};
        c.horizon = 5.0;
        c.grid = vehicle_grid(-42, 20, 63, 28, 56, 29, -0.6, 1.2, 19, 0, 35, 8);
        c.output = {{2.5, 5.0}, c.vehicle.initial_state.psi, 30.0};
        return c;
    }
    if (name == "scenario4") {
        // Corner points derived from the street layout: vertical street
        // x in [-20,-15], horizontal street y in [-4, 2].
        c.road.kind = RoadConfig::Kind::Crossing;
        c.road.xs = {-15.0, -20.0, -20.0, -15.0};
        c.road.ys = {2.0, 2.0, -4.0, -4.0};
        c.vehicle = {{0.5, 0.5}, {-30.0, -2.0, 0.0, 20.0}, {}};
        c.obstacles = {{RectShape{0.5, 0.5}, MotionDecelerating{{-10.0, -2.0}, 0.0, 5.0, 5.0}},
                       {RectShape{1.0, 0.5},
                        MotionDecelerating{{-18.0, 4.0}, -std::numbers::pi / 2.0, 5.0, 5.0}}};
        c.targets = {
            {.x_min = 5.0, .y_min = -4.0, .y_max = 2.0, .psi_anchor = 0.0, .psi_tol = 0.2},
            {.x_min = -20.0, .x_max = -15.0, .y_min = 5.0, .psi_anchor = std::numbers::pi / 2.0,
             .psi_tol = 0.2},
            {.x_min = -20.0, .x_max = -15.0, .y_max = -7.0, .psi_anchor = -std::numbers::pi / 2.0,
             .psi_tol = 0.2}};
        c.horizon = 2.5;
        c.grid = vehicle_grid(-35, 10, 61, -10, 8, 37, -2, 2, 21, 0, 25, 6);
        c.output = {{1.25, 2.5}, 0.0, 20.0};
        return c;
    }
    std::string msg = "unknown scenario '" + name + "'; available:";
    for (const std::string& n : scenario_names()) msg += " " + n;
    throw ConfigError(msg);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json vec2_json(Vec2 v) { return json::array({v.x, v.y}); }
Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json motion_json(const Motion& m) {
    return std::visit(
        [](const auto& v) -> json {
            using M = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<M, MotionFixed>)
                return {{"kind", "fixed"}, {"pos", vec2_json(v.pos)}, {"yaw", v.yaw}};
            else if constexpr (std::is_same_v<M, MotionLinear>)
                return {{"kind", "linear"}, {"pos0", vec2_json(v.pos0)}, {"vel", vec2_json(v.vel)}};
            else if constexpr (std::is_same_v<M, MotionDecelerating>)
                return {{"kind", "decelerating"},
                        {"pos0", vec2_json(v.pos0)},
                        {"heading", v.heading},
                        {"speed", v.speed},
                        {"decel", v.decel}};
            else
                return {{"kind", "circular"},
                        {"center", vec2_json(v.center)},
                        {"radius", v.radius},
                        {"theta0", v.theta0},
                        {"omega", v.omega}};
        },
        m);
}

Motion motion_from(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "fixed") return MotionFixed{vec2_from(j.at("pos")), j.value("yaw", 0.0)};
    if (kind == "linear") return MotionLinear{vec2_from(j.at("pos0")), vec2_from(j.at("vel"))};
    if (kind == "decelerating")
        return MotionDecelerating{vec2_from(j.at("pos0")), j.at("heading").get<double>(),
                                  j.at("speed").get<double>(), j.at("decel").get<double>()};
    if (kind == "circular")
        return MotionCircular{vec2_from(j.at("center")), j.at("radius").get<double>(),
                              j.at("theta0").get<double>(), j.at("omega").get<double>()};
    throw ConfigError("unknown motion kind '" + kind + "'");
}

json obstacle_json(const ObstacleSpec& o) {
    json shape;
    if (o.is_rect()) {
        const RectShape& r = std::get<RectShape>(o.shape);
        shape = {{"kind", "rect"}, {"lx", r.lx}, {"ly", r.ly}};
    } else {
        shape = {{"kind", "disk"}, {"radius", std::get<DiskShape>(o.shape).radius}};
    }
    return {{"shape", shape}, {"motion", motion_json(o.motion)}};
}

ObstacleSpec obstacle_from(const json& j) {
    ObstacleSpec o;
    const json& shape = j.at("shape");
    const std::string kind = shape.at("kind").get<std::string>();
    if (kind == "rect")
        o.shape = RectShape{shape.at("lx").get<double>(), shape.at("ly").get<double>()};
    else if (kind == "disk")
        o.shape = DiskShape{shape.at("radius").get<double>()};
    else
        throw ConfigError("unknown shape kind '" + kind + "'");
    o.motion = motion_from(j.at("motion"));
    return o;
}

json road_json(const RoadConfig& r) {
    switch (r.kind) {
        case RoadConfig::Kind::None: return {{"kind", "none"}};
        case RoadConfig::Kind::Straight:
            return {{"kind", "straight"}, {"y_down", r.y_down}, {"y_up", r.y_up}};
        case RoadConfig::Kind::VaryingWidth:
            return {{"kind", "varying_width"},
                    {"y_up", r.y_up},
                    {"y_down1", r.y_down},
                    {"y_down2", r.y_down2},
                    {"x_bar", r.x_bar}};
        case RoadConfig::Kind::Curved:
            return {{"kind", "curved"},     {"center", vec2_json(r.center)},
                    {"r_down", r.r_down},   {"r_up", r.r_up},
                    {"theta_min", r.theta_min}, {"theta_max", r.theta_max}};
        case RoadConfig::Kind::Crossing:
            return {{"kind", "crossing"}, {"xs", r.xs}, {"ys", r.ys}};
    }
    throw ConfigError("invalid road kind");
}

RoadConfig road_from(const json& j) {
    RoadConfig r;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") {
        r.kind = RoadConfig::Kind::None;
    } else if (kind == "straight") {
        r.kind = RoadConfig::Kind::Straight;
        r.y_down = j.at("y_down").get<double>();
        r.y_up = j.at("y_up").get<double>();
    } else if (kind == "varying_width") {
        r.kind = RoadConfig::Kind::VaryingWidth;
        r.y_up = j.at("y_up").get<double>();
        r.y_down = j.at("y_down1").get<double>();
        r.y_down2 = j.at("y_down2").get<double>();
        r.x_bar = j.at("x_bar").get<double>();
    } else if (kind == "curved") {
        r.kind = RoadConfig::Kind::Curved;
        r.center = vec2_from(j.at("center"));
        r.r_down = j.at("r_down").get<double>();
        r.r_up = j.at("r_up").get<double>();
        r.theta_min = j.at("theta_min").get<double>();
        r.theta_max = j.at("theta_max").get<double>();
    } else if (kind == "crossing") {
        r.kind = RoadConfig::Kind::Crossing;
        r.xs = j.at("xs").get<std::array<double, 4>>();
        r.ys = j.at("ys").get<std::array<double, 4>>();
    } else {
        throw ConfigError("unknown road kind '" + kind + "'");
    }
    return r;
}

json target_json(const TargetBoxConfig& t) {
    json j = json::object();
    if (t.psi_tol != kInf) {
        j["psi_anchor"] = t.psi_anchor;
        j["psi_tol"] = t.psi_tol;
    }
    if (t.x_min != -kInf) j["x_min"] = t.x_min;
    if (t.x_max != kInf) j["x_max"] = t.x_max;
    if (t.y_min != -kInf) j["y_min"] = t.y_min;
    if (t.y_max != kInf) j["y_max"] = t.y_max;
    return j;
}

TargetBoxConfig target_from(const json& j) {
    TargetBoxConfig t;
    t.x_min = j.value("x_min", -kInf);
    t.x_max = j.value("x_max", kInf);
    t.y_min = j.value("y_min", -kInf);
    t.y_max = j.value("y_max", kInf);
    t.psi_anchor = j.value("psi_anchor", 0.0);
    t.psi_tol = j.value("psi_tol", kInf);
    return t;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    j["road"] = road_json(c.road);
    j["vehicle"] = {{"half_lengths", vec2_json(c.vehicle.half_lengths)},
                    {"initial_state",
                     {c.vehicle.initial_state.x, c.vehicle.initial_state.y,
                      c.vehicle.initial_state.psi, c.vehicle.initial_state.v}},
                    {"control_bounds",
                     {{"a_min", c.vehicle.bounds.a_min},
                      {"a_max", c.vehicle.bounds.a_max},
                      {"w_max", c.vehicle.bounds.w_max}}}};
    j["obstacles"] = json::array();
    for (const ObstacleSpec& o : c.obstacles) j["obstacles"].push_back(obstacle_json(o));
    j["targets"] = json::array();
    for (const TargetBoxConfig& t : c.targets) j["targets"].push_back(target_json(t));
    j["horizon"] = c.horizon;
    j["mode"] = c.mode == HJBMode::CaptureBasin ? "capture" : "exact-time";
    j["cfl"] = c.cfl;
    j["grid"] = json::array();
    for (const Axis& ax : c.grid.axes())
        j["grid"].push_back({{"name", ax.name}, {"lo", ax.lo}, {"hi", ax.hi}, {"n", ax.n}});
    json rec = {{"h", c.reconstruction.h},
                {"max_steps", c.reconstruction.max_steps},
                {"n_accel", c.reconstruction.n_accel},
                {"n_yaw", c.reconstruction.n_yaw},
                {"substeps", c.reconstruction.substeps}};
    if (c.reconstruction.eta) rec["eta"] = *c.reconstruction.eta;
    j["reconstruction"] = rec;
    j["output"] = {{"snapshot_times", c.output.snapshot_times},
                   {"slice_psi", c.output.slice_psi},
                   {"slice_v", c.output.slice_v}};
    return j.dump(2) + "\n";
}

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        ScenarioConfig c;
        c.name = j.value("name", "unnamed");
        c.road = road_from(j.at("road"));
        const json& v = j.at("vehicle");
        c.vehicle.half_lengths = vec2_from(v.at("half_lengths"));
        const json& z0 = v.at("initial_state");
        c.vehicle.initial_state = {z0.at(0).get<double>(), z0.at(1).get<double>(),
                                   z0.at(2).get<double>(), z0.at(3).get<double>()};
        const json& cb = v.at("control_bounds");
        c.vehicle.bounds = {cb.at("a_min").get<double>(), cb.at("a_max").get<double>(),
                            cb.at("w_max").get<double>()};
        for (const json& o : j.at("obstacles")) c.obstacles.push_back(obstacle_from(o));
        for (const json& t : j.at("targets")) c.targets.push_back(target_from(t));
        c.horizon = j.at("horizon").get<double>();
        const std::string mode = j.value("mode", "capture");
        if (mode == "capture")
            c.mode = HJBMode::CaptureBasin;
        else if (mode == "exact-time")
            c.mode = HJBMode::ExactTime;
        else
            throw ConfigError("unknown mode '" + mode + "'");
        c.cfl = j.value("cfl", 0.5);
        std::vector<Axis> axes;
        for (const json& ax : j.at("grid"))
            axes.push_back({ax.at("name").get<std::string>(), ax.at("lo").get<double>(),
                            ax.at("hi").get<double>(), ax.at("n").get<int>()});
        c.grid = GridSpec(std::move(axes));
        if (j.contains("reconstruction")) {
            const json& r = j.at("reconstruction");
            c.reconstruction.h = r.value("h", 0.02);
            if (r.contains("eta")) c.reconstruction.eta = r.at("eta").get<double>();
            c.reconstruction.max_steps = r.value("max_steps", 2000);
            c.reconstruction.n_accel = r.value("n_accel", 21);
            c.reconstruction.n_yaw = r.value("n_yaw", 21);
            c.reconstruction.substeps = r.value("substeps", 1);
        }
        if (j.contains("output")) {
            const json& o = j.at("output");
            c.output.snapshot_times = o.value("snapshot_times", std::vector<double>{});
            c.output.slice_psi = o.value("slice_psi", 0.0);
            c.output.slice_v = o.value("slice_v", 0.0);
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return serialize_config(a) == serialize_config(b);
}

// ---------------------------------------------------------------------------
// Assembly

LevelSetExpr make_road(const RoadConfig& road) {
    switch (road.kind) {
        case RoadConfig::Kind::None: return constant_levelset(-1e9);
        case RoadConfig::Kind::Straight: return straight_road(road.y_down, road.y_up);
        case RoadConfig::Kind::VaryingWidth:
            return varying_width_road(road.y_up, road.y_down, road.y_down2, road.x_bar);
        case RoadConfig::Kind::Curved:
            return curved_road(road.center, road.r_down, road.r_up, road.theta_min,
                               road.theta_max);
        case RoadConfig::Kind::Crossing: return crossing_road(road.xs, road.ys);
    }
    throw ConfigError("invalid road kind");
}

LevelSetExpr make_target(const ScenarioConfig& config) {
    if (config.targets.empty()) throw ConfigError("scenario needs at least one target box");
    LevelSetExpr expr;
    for (const TargetBoxConfig& t : config.targets) {
        LevelSetExpr box = box_region({t.x_min, t.y_min, t.psi_anchor - t.psi_tol, -kInf},
                                      {t.x_max, t.y_max, t.psi_anchor + t.psi_tol, kInf});
        expr = expr.valid() ? combine_min(std::move(expr), std::move(box)) : std::move(box);
    }
    return expr;
}

LevelSetExpr make_constraint(const ScenarioConfig& config) {
    LevelSetExpr expr = make_road(config.road);
    std::vector<ObstacleSpec> rects, disks;
    for (const ObstacleSpec& o : config.obstacles) (o.is_rect() ? rects : disks).push_back(o);
    if (!rects.empty())
        expr = combine_max(std::move(expr),
                           rect_avoidance(config.vehicle.half_lengths, std::move(rects)));
    if (!disks.empty())
        expr = combine_max(std::move(expr),
                           disk_avoidance(std::move(disks), norm(config.vehicle.half_lengths)));
    return expr;
}

HJBProblem make_problem(const ScenarioConfig& config) {
    validate(config);
    HJBProblem p;
    p.grid = config.grid;
    p.model = std::make_shared<VehicleHamiltonian>(config.vehicle.bounds);
    p.target = make_target(config);
    p.constraint = make_constraint(config);
    p.horizon = config.horizon;
    p.mode = config.mode;
    p.cfl = config.cfl;
    return p;
}

void validate(const ScenarioConfig& config) {
    if (config.grid.dim() != 4) throw ConfigError("scenario grid must have axes (x,y,psi,v)");
    if (!(config.horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(config.vehicle.half_lengths.x > 0.0 && config.vehicle.half_lengths.y > 0.0))
        throw ConfigError("vehicle half-lengths must be positive");
    if (config.vehicle.bounds.a_min > config.vehicle.bounds.a_max ||
        config.vehicle.bounds.w_max < 0.0)
        throw ConfigError("invalid control bounds");
    const State4& z0 = config.vehicle.initial_state;
    const std::array<double, 4> z{z0.x, z0.y, z0.psi, z0.v};
    for (int a = 0; a < 4; ++a)
        if (z[static_cast<std::size_t>(a)] < config.grid.axis(a).lo ||
            z[static_cast<std::size_t>(a)] > config.grid.axis(a).hi)
            throw ConfigError("initial state outside the grid box on axis " +
                              config.grid.axis(a).name);
    // The step-certification chain assumes exact disjointness at t = 0.
    const RectPose vehicle{{z0.x, z0.y}, z0.psi, config.vehicle.half_lengths};
    for (const ObstacleSpec& o : config.obstacles) {
        const Pose2 pose = motion_pose(o, 0.0);
        if (o.is_rect()) {
            const RectShape& r = std::get<RectShape>(o.shape);
            if (!(r.lx > 0.0 && r.ly > 0.0)) throw ConfigError("obstacle half-lengths must be positive");
            if (exact_rect_intersect(vehicle, {pose.pos, pose.yaw, {r.lx, r.ly}}))
                throw ConfigError("initial vehicle pose intersects an obstacle at t=0");
        } else {
            const double r = std::get<DiskShape>(o.shape).radius;
            if (!(r > 0.0)) throw ConfigError("obstacle radius must be positive");
            if (norm(Vec2{z0.x, z0.y} - pose.pos) <= r + norm(config.vehicle.half_lengths))
                throw ConfigError("initial vehicle pose intersects an obstacle at t=0");
        }
    }
}

// ---------------------------------------------------------------------------
// Runners

namespace {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

SolveArtifacts run_solve(const ScenarioConfig& config, const std::string& output_dir,
                         int workers) {
    const HJBProblem problem = make_problem(config);
    HJBSolver solver(problem);

    MinTimeAccumulator accumulator(config.grid);
    SolveOptions opts;
    opts.snapshot_times = config.output.snapshot_times;
    opts.workers = workers;
    opts.observer = [&accumulator](double t, const ScalarField& v) { accumulator.observe(t, v); };

    const auto t0 = std::chrono::steady_clock::now();
    ValueEvolution evo = solver.solve(opts);
    const auto t1 = std::chrono::steady_clock::now();

    SolveArtifacts art;
    art.dt_schedule = evo.dt_schedule;
    art.evolution = std::move(evo);
    art.min_time = accumulator.take();
    art.solve_seconds = std::chrono::duration<double>(t1 - t0).count();

    if (!output_dir.empty()) {
        const fs::path dir(output_dir);
        fs::create_directories(dir);

        json manifest;
        manifest["scenario"] = config.name;
        manifest["mode"] = config.mode == HJBMode::CaptureBasin ? "capture" : "exact-time";
        manifest["grid"] = json::array();
        for (const Axis& ax : config.grid.axes())
            manifest["grid"].push_back({{"name", ax.name}, {"lo", ax.lo}, {"hi", ax.hi}, {"n", ax.n}});
        manifest["steps"] = art.dt_schedule.size();
        manifest["dt"] = art.dt_schedule.empty() ? 0.0 : art.dt_schedule.front();
        manifest["solve_seconds"] = art.solve_seconds;
        manifest["seconds_per_step"] =
            art.dt_schedule.empty() ? 0.0 : art.solve_seconds / static_cast<double>(art.dt_schedule.size());
        write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

        const int psi_idx = config.grid.nearest_index(2, config.output.slice_psi);
        const int v_idx = config.grid.nearest_index(3, config.output.slice_v);
        for (const ScalarField& snap : art.evolution.snapshots) {
            std::ostringstream tag;
            tag << std::fixed << std::setprecision(3) << snap.time_stamp;
            const auto mask = reachable_set(snap);
            const auto slice = mask_slice_xy(config.grid, mask, psi_idx, v_idx);
            std::ofstream out(dir / ("mask_t" + tag.str() + ".csv"));
            out << "ix,iy,x,y,in_set\n";
            for (int ix = 0; ix < config.grid.axis(0).n; ++ix)
                for (int iy = 0; iy < config.grid.axis(1).n; ++iy)
                    out << ix << "," << iy << "," << config.grid.coord(0, ix) << ","
                        << config.grid.coord(1, iy) << ","
                        << int(slice[static_cast<std::size_t>(ix) *
                                         static_cast<std::size_t>(config.grid.axis(1).n) +
                                     static_cast<std::size_t>(iy)])
                        << "\n";
        }
        if (!art.evolution.snapshots.empty()) {
            std::ofstream bin(dir / "value_final.bin", std::ios::binary);
            write_binary(art.evolution.snapshots.back(), bin);
            std::ofstream csv(dir / "value_final.csv");
            write_csv(art.evolution.snapshots.back(), csv);
        }
        {
            std::ofstream csv(dir / "min_time.csv");
            write_min_time_csv(art.min_time, csv);
        }
    }
    return art;
}

Trajectory run_reconstruct(const ScenarioConfig& config, const MinimalTimeField& min_time,
                           const std::optional<State4>& start_override,
                           const std::string& output_dir) {
    ReconstructionParams params;
    params.h = config.reconstruction.h;
    params.eta = config.eta();
    params.max_steps = config.reconstruction.max_steps;
    params.n_accel = config.reconstruction.n_accel;
    params.n_yaw = config.reconstruction.n_yaw;
    params.substeps = config.reconstruction.substeps;
    params.bounds = config.vehicle.bounds;

    const LevelSetExpr constraint = make_constraint(config);

    std::optional<CertificationContext> cert;
    std::vector<ObstacleSpec> rects;
    for (const ObstacleSpec& o : config.obstacles)
        if (o.is_rect()) rects.push_back(o);
    if (!rects.empty()) {
        cert.emplace();
        cert->vehicle_half = config.vehicle.half_lengths;
        cert->obstacles = rects;
        const double v_max = std::max(std::abs(config.grid.axis(3).lo), std::abs(config.grid.axis(3).hi));
        cert->bound = compute_safety_bound(config.vehicle.half_lengths, config.vehicle.bounds,
                                           cert->obstacles, v_max);
        // Pick the certification granularity from the safety bound: the Heun
        // sub-step must stay strictly below dt_max for the chain to close.
        if (cert->bound.dt_max > 0.0 && cert->bound.dt_max < kInf) {
            const int needed = static_cast<int>(std::ceil(params.h / (0.9 * cert->bound.dt_max)));
            params.substeps = std::max(params.substeps, needed);
        }
    }

    const State4 z0 = start_override.value_or(config.vehicle.initial_state);
    Trajectory traj = reconstruct(min_time, z0, params, &constraint, cert ? &*cert : nullptr);

    if (!output_dir.empty()) {
        fs::create_directories(output_dir);
        std::ofstream out(fs::path(output_dir) / "trajectory.csv");
        write_trajectory_csv(traj, out);
    }
    return traj;
}

std::vector<ConvergenceRow> run_convergence(const ScenarioConfig& config,
                                            const std::vector<int>& m_list, int reference_m,
                                            int workers) {
    auto grid_at = [&config](int m) {
        std::vector<Axis> axes = config.grid.axes();
        axes[0].n = 35 * (1 << m);
        axes[1].n = 4 * (1 << m);
        return GridSpec(std::move(axes));
    };
    auto solve_at = [&](int m, double& dt, double& seconds) {
        ScenarioConfig c = config;
        c.grid = grid_at(m);
        c.output.snapshot_times.clear();  // final snapshot only
        const auto art = run_solve(c, "", workers);
        dt = art.dt_schedule.empty() ? 0.0 : art.dt_schedule.front();
        seconds = art.solve_seconds;
        return art.evolution.snapshots.back();
    };

    double ref_dt = 0.0, ref_seconds = 0.0;
    const ScalarField reference = solve_at(reference_m, ref_dt, ref_seconds);

    std::vector<ConvergenceRow> rows;
    for (int m : m_list) {
        ConvergenceRow row;
        row.m = m;
        ScalarField coarse = solve_at(m, row.dt, row.cpu_seconds);
        row.nx = coarse.grid.axis(0).n;
        row.ny = coarse.grid.axis(1).n;
        const ScalarField ref_on_coarse =
            coarse.grid == reference.grid ? reference : resample(reference, coarse.grid);
        row.errors = error_norms(coarse, ref_on_coarse);
        if (!rows.empty()) {
            const ErrorNorms& prev = rows.back().errors;
            if (prev.linf > 0.0 && row.errors.linf > 0.0)
                row.order_linf = convergence_order(prev.linf, row.errors.linf);
            if (prev.l1 > 0.0 && row.errors.l1 > 0.0)
                row.order_l1 = convergence_order(prev.l1, row.errors.l1);
            if (prev.l2 > 0.0 && row.errors.l2 > 0.0)
                row.order_l2 = convergence_order(prev.l2, row.errors.l2);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_convergence_table(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
    os << "N_x,N_y,dt,e_Linf,order_Linf,e_L1,order_L1,e_L2,order_L2,cpu_seconds\n";
    os.precision(6);
    bool first = true;
    for (const ConvergenceRow& r : rows) {
        auto order = [&first](double o) { return first ? std::string("--") : std::to_string(o); };
        os << r.nx << "," << r.ny << "," << r.dt << "," << r.errors.linf << "," << order(r.order_linf)
           << "," << r.errors.l1 << "," << order(r.order_l1) << "," << r.errors.l2 << ","
           << order(r.order_l2) << "," << r.cpu_seconds << "\n";
        first = false;
    }
}

void rasterize_levelset(const ScenarioConfig& config, const std::string& selector, double time,
                        std::ostream& os) {
    LevelSetExpr expr;
    if (selector == "road")
        expr = make_road(config.road);
    else if (selector == "target")
        expr = make_target(config);
    else if (selector == "constraint")
        expr = make_constraint(config);
    else if (selector == "obstacle") {
        ScenarioConfig tmp = config;
        tmp.road.kind = RoadConfig::Kind::None;
        expr = make_constraint(tmp);
    } else {
        throw ConfigError("unknown raster selector '" + selector +
                          "' (expected road|obstacle|target|constraint)");
    }
    os << "x,y,value\n";
    os.precision(12);
    const Axis& ax = config.grid.axis(0);
    const Axis& ay = config.grid.axis(1);
    for (int ix = 0; ix < ax.n; ++ix) {
        for (int iy = 0; iy < ay.n; ++iy) {
            const std::array<double, 4> z{config.grid.coord(0, ix), config.grid.coord(1, iy),
                                          config.output.slice_psi, config.output.slice_v};
            os << z[0] << "," << z[1] << "," << expr(z, time) << "\n";
        }
    }
}

}  // namespace hjreach
