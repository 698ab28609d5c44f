from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from mintime.model.inclusion import Constants, ball_model  # noqa: E402
from mintime.scenarios import eikonal_scenario  # noqa: E402
from mintime.solver.grid import Grid  # noqa: E402
from mintime.solver.sweeping import SolverOptions, solve_min_time  # noqa: E402


@pytest.fixture()
def unit_ball():
    return ball_model(
        2,
        constants=Constants.provided(K=0.0, K1=0.0, K2=1.0, c0=0.0, R=1.0),
        name="unit-ball",
    )


@pytest.fixture(scope="session")
def eikonal_field():
    """Eikonal T on [-1, 1]^2 at h = 0.02."""

    scenario = eikonal_scenario()
    grid = Grid.from_spacing(scenario.lower, scenario.upper, 0.02)
    return solve_min_time(scenario.model, scenario.target, grid, SolverOptions(velocity_samples=64))
