#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hjreach/scenario.hpp"

using namespace hjreach;

TEST_CASE("builtin catalog lists every scenario and rejects unknown names") {
    const std::vector<std::string> names = scenario_names();
    CHECK(names.size() == 6);
    for (const std::string& n :
         {"scenario1", "scenario2a", "scenario2b", "scenario3a", "scenario3b", "scenario4"}) {
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
        CHECK_NOTHROW(builtin_scenario(n));
    }
    CHECK_THROWS_AS(builtin_scenario("scenario9"), ConfigError);
    try {
        builtin_scenario("scenario9");
    } catch (const ConfigError& e) {
        // The message should tell the user what names exist.
        CHECK(std::string(e.what()).find("scenario1") != std::string::npos);
    }
}

TEST_CASE("scenario1 geometry matches its published setup") {
    const ScenarioConfig c = builtin_scenario("scenario1");
    CHECK(c.grid.dim() == 4);
    CHECK(c.horizon == doctest::Approx(2.0));
    CHECK(c.mode == HJBMode::CaptureBasin);
    validate(c);

    const LevelSetExpr target = make_target(c);
    const LevelSetExpr constraint = make_constraint(c);

    // The initial state is feasible but not yet in the target.
    const State4 z0 = c.vehicle.initial_state;
    CHECK(constraint(z0, 0.0) <= 0.0);
    CHECK(target(z0, 0.0) > 0.0);

    // A state deep inside the target box at the anchor yaw is in the target.
    State4 zt = z0;
    zt.x = 0.5 * (c.targets.front().x_min + std::min(c.targets.front().x_max, 10.0));
    if (!std::isfinite(zt.x)) zt.x = c.targets.front().x_min + 1.0;
    zt.psi = c.targets.front().psi_anchor;
    CHECK(target(zt, 0.0) <= 0.0);
}

TEST_CASE("scenario2b places an obstacle that splits the road") {
    const ScenarioConfig c = builtin_scenario("scenario2b");
    validate(c);
    const LevelSetExpr constraint = make_constraint(c);
    // The parked obstacles block nearby states. At the exact centre two
    // equal rectangles are corner-coincident (boundary, g = 0); a small
    // offset puts a vehicle corner strictly inside and must give g > 0.
    bool found_violation = false;
    for (const ObstacleSpec& o : c.obstacles) {
        const Pose2 pose = motion_pose(o, 0.0);
        State4 centred{pose.pos.x, pose.pos.y, 0.0, 0.0};
        CHECK(constraint(centred, 0.0) >= 0.0);
        State4 z{pose.pos.x + 0.2, pose.pos.y + 0.2, 0.0, 0.0};
        if (constraint(z, 0.0) > 0.0) found_violation = true;
    }
    CHECK(found_violation);
    // Mid-lane far from the obstacle stays feasible.
    State4 clear{-40.0, -1.5, 0.0, 10.0};
    CHECK(constraint(clear, 0.0) <= 0.0);
}

TEST_CASE("config round-trips through JSON exactly") {
    for (const std::string& n : scenario_names()) {
        const ScenarioConfig c = builtin_scenario(n);
        const ScenarioConfig back = parse_config(serialize_config(c));
        CHECK(back == c);
        // Second generation is stable too (serialization is canonical).
        CHECK(serialize_config(back) == serialize_config(c));
    }
}

TEST_CASE("config file loading and error reporting") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hjreach_scenario_test";
    fs::create_directories(dir);

    const fs::path good = dir / "good.json";
    {
        std::ofstream os(good);
        os << serialize_config(builtin_scenario("scenario1"));
    }
    CHECK(load_config_file(good.string()) == builtin_scenario("scenario1"));

    CHECK_THROWS_AS(load_config_file((dir / "missing.json").string()), ConfigError);

    const fs::path bad = dir / "bad.json";
    {
        std::ofstream os(bad);
        os << "{ not json";
    }
    CHECK_THROWS_AS(load_config_file(bad.string()), ConfigError);

    CHECK_THROWS_AS(parse_config("{}"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("validate rejects inconsistent configurations") {
    ScenarioConfig c = builtin_scenario("scenario1");
    CHECK_NOTHROW(validate(c));

    ScenarioConfig outside = c;
    outside.vehicle.initial_state.x = 1e6;  // off the grid box
    CHECK_THROWS_AS(validate(outside), ConfigError);

    ScenarioConfig overlapping = builtin_scenario("scenario2b");
    // Park the vehicle on top of the first obstacle.
    const Pose2 pose = motion_pose(overlapping.obstacles.front(), 0.0);
    overlapping.vehicle.initial_state.x = pose.pos.x;
    overlapping.vehicle.initial_state.y = pose.pos.y;
    CHECK_THROWS_AS(validate(overlapping), ConfigError);

    ScenarioConfig bad_horizon = c;
    bad_horizon.horizon = -1.0;
    CHECK_THROWS_AS(validate(bad_horizon), ConfigError);

    ScenarioConfig bad_grid = c;
    bad_grid.grid = GridSpec({{"x", -50.0, 10.0, 31}});  // not 4 axes
    CHECK_THROWS_AS(validate(bad_grid), ConfigError);
}

TEST_CASE("eta defaults to 1.5 * max spacing / max(1, |v0|)") {
    ScenarioConfig c = builtin_scenario("scenario1");
    c.reconstruction.eta.reset();
    double dx_max = 0.0;
    for (int a = 0; a < c.grid.dim(); ++a) dx_max = std::max(dx_max, c.grid.axis(a).step());
    const double v0 = std::abs(c.vehicle.initial_state.v);
    CHECK(c.eta() == doctest::Approx(1.5 * dx_max / std::max(1.0, v0)));

    c.reconstruction.eta = 0.123;
    CHECK(c.eta() == 0.123);
}

TEST_CASE("convergence harness: reference level reproduces itself exactly") {
    ScenarioConfig c = builtin_scenario("scenario1");
    c.horizon = 0.05;  // a few steps suffice to exercise the plumbing
    const std::vector<ConvergenceRow> rows = run_convergence(c, {1}, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].nx == 70);
    CHECK(rows[0].ny == 8);
    CHECK(rows[0].errors.linf == 0.0);
    CHECK(rows[0].errors.l1 == 0.0);
    CHECK(rows[0].errors.l2 == 0.0);

    std::ostringstream os;
    write_convergence_table(rows, os);
    const std::string text = os.str();
    CHECK(text.rfind("N_x,N_y,dt,e_Linf,order_Linf,e_L1,order_L1,e_L2,order_L2,cpu_seconds\n",
                     0) == 0);
    CHECK(text.find(",--,") != std::string::npos);  // no order on the first row
}

TEST_CASE("rasterizer emits x,y grids for each selector and rejects others") {
    const ScenarioConfig c = builtin_scenario("scenario1");
    for (const std::string& sel : {"road", "target", "constraint", "obstacle"}) {
        std::ostringstream os;
        rasterize_levelset(c, sel, 0.0, os);
        const std::string text = os.str();
        CHECK(text.rfind("x,y,value\n", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') ==
              1 + static_cast<long>(c.grid.axis(0).n) * c.grid.axis(1).n);
    }
    std::ostringstream os;
    CHECK_THROWS_AS(rasterize_levelset(c, "speed", 0.0, os), ConfigError);
}

TEST_CASE("solver artifacts land on disk with the expected names") {
    namespace fs = std::filesystem;
    ScenarioConfig c = builtin_scenario("scenario1");
    c.horizon = 0.05;  // keep the test quick
    c.output.snapshot_times = {0.05};
    const fs::path dir = fs::temp_directory_path() / "hjreach_solve_test";
    fs::remove_all(dir);
    const SolveArtifacts art = run_solve(c, dir.string());
    CHECK(art.min_time.times.size() == c.grid.size());
    CHECK(!art.dt_schedule.empty());
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "value_final.bin"));
    CHECK(fs::exists(dir / "value_final.csv"));
    CHECK(fs::exists(dir / "min_time.csv"));

    // The binary dump round-trips bit for bit.
    const ScalarField& final_field = art.evolution.snapshots.back();
    std::ifstream is(dir / "value_final.bin", std::ios::binary);
    const ScalarField loaded = read_binary(is);
    REQUIRE(loaded.values.size() == final_field.values.size());
    for (std::size_t i = 0; i < loaded.values.size(); ++i)
        CHECK(loaded.values[i] == final_field.values[i]);
    fs::remove_all(dir);
}
