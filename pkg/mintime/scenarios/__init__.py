from .catalog import (
    SCENARIOS,
    Scenario,
    ball_origin_scenario,
    constant_model,
    eikonal_scenario,
    example1_scenario,
    get_scenario,
)
from .example1 import (
    example1_boundary_x1,
    example1_gamma,
    example1_h,
    example1_hamiltonian_cases,
    example1_model,
    example1_petrov_margin,
    example1_T,
    example1_target,
)

__all__ = [
    "SCENARIOS",
    "Scenario",
    "ball_origin_scenario",
    "constant_model",
    "eikonal_scenario",
    "example1_T",
    "example1_boundary_x1",
    "example1_gamma",
    "example1_h",
    "example1_hamiltonian_cases",
    "example1_model",
    "example1_petrov_margin",
    "example1_scenario",
    "example1_target",
    "get_scenario",
]
