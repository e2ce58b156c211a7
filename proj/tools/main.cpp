// Command line front end: solve reachability problems, reconstruct
// minimal-time trajectories, run refinement studies and rasterize level sets.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 infeasible reconstruction.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjreach/scenario.hpp"

namespace {

using namespace hjreach;

ScenarioConfig resolve_config(const std::string& ref) {
    if (std::filesystem::exists(ref)) return load_config_file(ref);
    return builtin_scenario(ref);
}

std::vector<int> parse_levels(const std::string& text) {
    std::vector<int> levels;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (lo > hi) throw ConfigError("--levels range is empty: " + text);
        for (int m = lo; m <= hi; ++m) levels.push_back(m);
        return levels;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) levels.push_back(std::stoi(item));
    if (levels.empty()) throw ConfigError("--levels is empty");
    return levels;
}

State4 parse_start(const std::string& text) {
    std::stringstream ss(text);
    std::string item;
    std::vector<double> vals;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (vals.size() != 4) throw ConfigError("--start expects x,y,psi,v");
    return {vals[0], vals[1], vals[2], vals[3]};
}

void apply_overrides(ScenarioConfig& config, double cfl, const std::string& snapshots) {
    if (cfl > 0.0) config.cfl = cfl;
    if (!snapshots.empty()) {
        config.output.snapshot_times.clear();
        std::stringstream ss(snapshots);
        std::string item;
        while (std::getline(ss, item, ',')) config.output.snapshot_times.push_back(std::stod(item));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-set reachability solver for a planar point-mass vehicle"};
    app.require_subcommand(1);

    std::string config_ref, out_dir = "out", snapshots, start_text, expr = "constraint";
    std::string levels_text = "1..3", show_name, raster_out;
    int workers = 0, reference_m = 4;
    double cfl = 0.0, raster_time = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_ref, "Config file path or builtin scenario name")
            ->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--workers", workers, "Worker threads (0 = all)");
        sub->add_option("--cfl", cfl, "Override the CFL number");
        sub->add_option("--snapshots", snapshots, "Comma-separated snapshot times");
    };

    CLI::App* solve = app.add_subcommand("solve", "Solve the reachability problem");
    add_common(solve);

    CLI::App* reconstruct =
        app.add_subcommand("reconstruct", "Solve, then descend the minimal-time field");
    add_common(reconstruct);
    reconstruct->add_option("--start", start_text, "Start state x,y,psi,v (default: config)");

    CLI::App* convergence = app.add_subcommand("convergence", "Grid refinement study");
    add_common(convergence);
    convergence->add_option("--levels", levels_text, "Refinement levels, e.g. 1..4 or 1,2,3");
    convergence->add_option("--reference", reference_m, "Reference refinement level");

    CLI::App* raster = app.add_subcommand("raster", "Rasterize a level set on the (x,y) plane");
    raster->add_option("config", config_ref, "Config file path or builtin scenario name")
        ->required();
    raster->add_option("--expr", expr, "road | obstacle | target | constraint");
    raster->add_option("--time", raster_time, "Evaluation time");
    raster->add_option("--out", raster_out, "Output CSV path (default: stdout)");

    CLI::App* scenario = app.add_subcommand("scenario", "Builtin scenario catalog");
    CLI::App* scenario_list = scenario->add_subcommand("list", "List builtin scenarios");
    CLI::App* scenario_show = scenario->add_subcommand("show", "Print a scenario config as JSON");
    scenario_show->add_option("name", show_name, "Scenario name")->required();
    scenario->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (scenario_list->parsed()) {
            for (const std::string& name : scenario_names()) std::cout << name << "\n";
            return 0;
        }
        if (scenario_show->parsed()) {
            std::cout << serialize_config(builtin_scenario(show_name));
            return 0;
        }
        if (raster->parsed()) {
            const ScenarioConfig config = resolve_config(config_ref);
            if (raster_out.empty()) {
                rasterize_levelset(config, expr, raster_time, std::cout);
            } else {
                std::ofstream os(raster_out);
                if (!os) throw ConfigError("cannot open '" + raster_out + "' for writing");
                rasterize_levelset(config, expr, raster_time, os);
            }
            return 0;
        }

        ScenarioConfig config = resolve_config(config_ref);
        apply_overrides(config, cfl, snapshots);

        if (solve->parsed()) {
            const SolveArtifacts art = run_solve(config, out_dir, workers);
            std::cout << "solved " << config.name << ": " << art.dt_schedule.size()
                      << " steps, dt=" << (art.dt_schedule.empty() ? 0.0 : art.dt_schedule.front())
                      << ", " << art.solve_seconds << " s\n";
            return 0;
        }
        if (reconstruct->parsed()) {
            const SolveArtifacts art = run_solve(config, out_dir, workers);
            std::optional<State4> start;
            if (!start_text.empty()) start = parse_start(start_text);
            const Trajectory traj = run_reconstruct(config, art.min_time, start, out_dir);
            std::cout << "reconstruction: " << to_string(traj.termination) << ", "
                      << traj.steps.size() << " records\n";
            return traj.termination == TerminationReason::TargetReached ? 0 : 3;
        }
        if (convergence->parsed()) {
            const std::vector<int> levels = parse_levels(levels_text);
            const auto rows = run_convergence(config, levels, reference_m, workers);
            std::filesystem::create_directories(out_dir);
            std::ofstream os(std::filesystem::path(out_dir) / "convergence.csv");
            write_convergence_table(rows, os);
            write_convergence_table(rows, std::cout);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
