"""Level-set reachability solver for a 4-state point-mass vehicle."""

from ._hjreach import (  # noqa: F401
    INF,
    Axis,
    ConfigError,
    Control,
    ControlBounds,
    GridSpec,
    LevelSetExpr,
    MinimalTimeField,
    NumericalError,
    ScalarField,
    ScenarioConfig,
    SolveArtifacts,
    State4,
    Trajectory,
    TrajectoryStep,
    builtin_scenario,
    capture_hamiltonian,
    hamiltonian,
    interp_field,
    interp_min_time,
    load_config_file,
    make_constraint,
    make_road,
    make_target,
    parse_config,
    rect_intersect,
    run_reconstruct,
    run_solve,
    scenario_names,
    serialize_config,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
