from .errors import GridConfigurationError, OutOfRangeError
from .grid import (
    Grid,
    GridSet,
    ScalarField,
    SolveStats,
    field_from_csv,
    field_to_csv,
    interpolate,
)
from .sweeping import (
    Backtrack,
    SolverOptions,
    attainable_set,
    backtrack_trajectory,
    bellman_residual,
    dilated_target,
    local_lipschitz,
    restrict_continuity_region,
    solve_min_time,
    sublevel_set,
)

__all__ = [
    "Backtrack",
    "Grid",
    "GridConfigurationError",
    "GridSet",
    "OutOfRangeError",
    "ScalarField",
    "SolveStats",
    "SolverOptions",
    "attainable_set",
    "backtrack_trajectory",
    "bellman_residual",
    "dilated_target",
    "field_from_csv",
    "field_to_csv",
    "interpolate",
    "local_lipschitz",
    "restrict_continuity_region",
    "solve_min_time",
    "sublevel_set",
]
