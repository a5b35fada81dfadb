"""Python access to the supobs estimator core."""

from ._core import (
    Error,
    ExperimentConfig,
    Nearest,
    RunSummary,
    distance_to_set,
    grid_sample,
    load_config,
    parse_config,
    run,
    sigmoid,
    solve_lyapunov,
    trace_columns,
    verify_certificates,
    windowed_energy,
)

__all__ = [
    "Error",
    "ExperimentConfig",
    "Nearest",
    "RunSummary",
    "distance_to_set",
    "grid_sample",
    "load_config",
    "parse_config",
    "run",
    "sigmoid",
    "solve_lyapunov",
    "trace_columns",
    "verify_certificates",
    "windowed_energy",
]
