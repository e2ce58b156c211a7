#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <sstream>

#include "hjreach/scenario.hpp"

namespace py = pybind11;
using namespace hjreach;

PYBIND11_MODULE(_hjreach, m) {
    m.doc() = "Level-set reachability solver for a 4-state point-mass vehicle";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.attr("INF") = kInf;

    // -- grid -----------------------------------------------------------------
    py::class_<Axis>(m, "Axis")
        .def(py::init([](std::string name, double lo, double hi, int n) {
                 return Axis{std::move(name), lo, hi, n};
             }),
             py::arg("name"), py::arg("lo"), py::arg("hi"), py::arg("n"))
        .def_readonly("name", &Axis::name)
        .def_readonly("lo", &Axis::lo)
        .def_readonly("hi", &Axis::hi)
        .def_readonly("n", &Axis::n)
        .def("step", &Axis::step);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<std::vector<Axis>>())
        .def_property_readonly("dim", &GridSpec::dim)
        .def_property_readonly("size", &GridSpec::size)
        .def("axis", &GridSpec::axis, py::return_value_policy::reference_internal)
        .def("coord", &GridSpec::coord)
        .def("nearest_index", &GridSpec::nearest_index)
        .def("__eq__", [](const GridSpec& a, const GridSpec& b) { return a == b; });

    py::class_<ScalarField>(m, "ScalarField")
        .def_readonly("grid", &ScalarField::grid)
        .def_readonly("values", &ScalarField::values)
        .def_readonly("time_stamp", &ScalarField::time_stamp);

    m.def("interp_field", [](const ScalarField& f, const std::vector<double>& z) {
        return interp_field(f, z);
    });

    // -- dynamics ---------------------------------------------------------------
    py::class_<State4>(m, "State4")
        .def(py::init([](double x, double y, double psi, double v) {
                 return State4{x, y, psi, v};
             }),
             py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("psi") = 0.0, py::arg("v") = 0.0)
        .def_readwrite("x", &State4::x)
        .def_readwrite("y", &State4::y)
        .def_readwrite("psi", &State4::psi)
        .def_readwrite("v", &State4::v)
        .def("__repr__", [](const State4& z) {
            std::ostringstream os;
            os << "State4(x=" << z.x << ", y=" << z.y << ", psi=" << z.psi << ", v=" << z.v
               << ")";
            return os.str();
        });

    py::class_<Control>(m, "Control")
        .def(py::init([](double a, double w) { return Control{a, w}; }), py::arg("a") = 0.0,
             py::arg("w") = 0.0)
        .def_readonly("a", &Control::a)
        .def_readonly("w", &Control::w);

    py::class_<ControlBounds>(m, "ControlBounds")
        .def(py::init([](double a_min, double a_max, double w_max) {
                 return ControlBounds{a_min, a_max, w_max};
             }),
             py::arg("a_min") = -10.0, py::arg("a_max") = 10.0, py::arg("w_max") = 1.0)
        .def_readonly("a_min", &ControlBounds::a_min)
        .def_readonly("a_max", &ControlBounds::a_max)
        .def_readonly("w_max", &ControlBounds::w_max);

    m.def(
        "hamiltonian",
        [](const State4& z, const std::array<double, 4>& p, const ControlBounds& b) {
            return hamiltonian(z, p, b);
        },
        py::arg("z"), py::arg("p"), py::arg("bounds") = ControlBounds{});
    m.def(
        "capture_hamiltonian",
        [](const State4& z, const std::array<double, 4>& p, const ControlBounds& b) {
            return capture_hamiltonian(z, p, b);
        },
        py::arg("z"), py::arg("p"), py::arg("bounds") = ControlBounds{});

    // -- level sets --------------------------------------------------------------
    py::class_<LevelSetExpr>(m, "LevelSetExpr")
        .def("__call__",
             [](const LevelSetExpr& e, const std::vector<double>& z, double t) { return e(z, t); },
             py::arg("z"), py::arg("t") = 0.0)
        .def_property_readonly("time_dependent", &LevelSetExpr::time_dependent)
        .def_property_readonly("lipschitz", &LevelSetExpr::lipschitz);

    // -- scenario configuration ----------------------------------------------------
    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def_readonly("name", &ScenarioConfig::name)
        .def_readonly("horizon", &ScenarioConfig::horizon)
        .def_readonly("grid", &ScenarioConfig::grid)
        .def_property_readonly("initial_state",
                               [](const ScenarioConfig& c) { return c.vehicle.initial_state; })
        .def("eta", &ScenarioConfig::eta)
        .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; });

    m.def("scenario_names", &scenario_names);
    m.def("builtin_scenario", &builtin_scenario);
    m.def("serialize_config", &serialize_config);
    m.def("parse_config", &parse_config);
    m.def("load_config_file", &load_config_file);
    m.def("validate", &validate);
    m.def("make_road", [](const ScenarioConfig& c) { return make_road(c.road); });
    m.def("make_target", &make_target);
    m.def("make_constraint", &make_constraint);

    // -- solver artifacts -----------------------------------------------------------
    py::class_<MinimalTimeField>(m, "MinimalTimeField")
        .def_readonly("grid", &MinimalTimeField::grid)
        .def_readonly("times", &MinimalTimeField::times);

    m.def("interp_min_time", [](const MinimalTimeField& f, const State4& z) {
        return interp_min_time(f, z);
    });

    py::class_<SolveArtifacts>(m, "SolveArtifacts")
        .def_readonly("min_time", &SolveArtifacts::min_time)
        .def_readonly("solve_seconds", &SolveArtifacts::solve_seconds)
        .def_property_readonly("snapshots",
                               [](const SolveArtifacts& a) { return a.evolution.snapshots; })
        .def_property_readonly("steps",
                               [](const SolveArtifacts& a) { return a.evolution.dt_schedule.size(); });

    m.def("run_solve", &run_solve, py::arg("config"), py::arg("output_dir"),
          py::arg("workers") = 0, py::call_guard<py::gil_scoped_release>());

    // -- trajectories -----------------------------------------------------------------
    py::class_<TrajectoryStep>(m, "TrajectoryStep")
        .def_readonly("t", &TrajectoryStep::t)
        .def_readonly("z", &TrajectoryStep::z)
        .def_readonly("u", &TrajectoryStep::u)
        .def_readonly("min_time", &TrajectoryStep::min_time)
        .def_readonly("g", &TrajectoryStep::g)
        .def_property_readonly("certified", [](const TrajectoryStep& s) {
            return s.certificate == StepCertificate::Certified;
        });

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("steps", &Trajectory::steps)
        .def_property_readonly("termination", [](const Trajectory& t) {
            return std::string(to_string(t.termination));
        });

    m.def("run_reconstruct", &run_reconstruct, py::arg("config"), py::arg("min_time"),
          py::arg("start") = std::nullopt, py::arg("output_dir") = std::string("."),
          py::call_guard<py::gil_scoped_release>());

    // -- collision oracle ----------------------------------------------------------
    m.def(
        "rect_intersect",
        [](std::array<double, 2> ca, double yaw_a, std::array<double, 2> ha,
           std::array<double, 2> cb, double yaw_b, std::array<double, 2> hb) {
            return exact_rect_intersect({{ca[0], ca[1]}, yaw_a, {ha[0], ha[1]}},
                                        {{cb[0], cb[1]}, yaw_b, {hb[0], hb[1]}});
        },
        py::arg("center_a"), py::arg("yaw_a"), py::arg("half_a"), py::arg("center_b"),
        py::arg("yaw_b"), py::arg("half_b"));
}
