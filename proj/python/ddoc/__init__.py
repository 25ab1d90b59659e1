"""Data-driven online convex optimization control of unknown LTI systems."""

from ._core import (
    Controller,
    ControllerConfig,
    DdocError,
    LtiSystem,
    SteadyMaps,
    build_hankel,
    compute_steady_maps,
    controllability_index,
    equilibrium_residual,
    is_persistently_exciting,
    model_steady_state,
    nearest_steady_input,
    numerical_rank,
    pseudoinverse,
    run_experiment,
    steady_output_for_input,
    trajectory_residual,
    weighted_min_norm_solve,
)

__all__ = [
    "Controller",
    "ControllerConfig",
    "DdocError",
    "LtiSystem",
    "SteadyMaps",
    "build_hankel",
    "compute_steady_maps",
    "controllability_index",
    "equilibrium_residual",
    "is_persistently_exciting",
    "model_steady_state",
    "nearest_steady_input",
    "numerical_rank",
    "pseudoinverse",
    "run_experiment",
    "steady_output_for_input",
    "trajectory_residual",
    "weighted_min_norm_solve",
]
