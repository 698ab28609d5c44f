from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from mintime.core.errors import ConfigError
from mintime.core.formatting import to_jsonable
from mintime.model.hypotheses import estimate_constants
from mintime.model.inclusion import (
    Constants,
    InclusionModel,
    TargetSet,
    ball_complement_target,
    halfspace_target,
    point_target,
)
from mintime.scenarios import Scenario, constant_model, get_scenario
from mintime.solver.grid import Grid, ScalarField, field_from_csv
from mintime.solver.sweeping import SolverOptions, solve_min_time

from .schemas import RunConfig, TargetSection

logger = logging.getLogger(__name__)

ESTIMATE_SAMPLES = 1000
FALLBACK_CELLS = 100
FIELD_FILE = "T.csv"
META_FILE = "meta.json"


@dataclass(frozen=True)
class RunContext:
    """Everything a subcommand needs, resolved once from the config."""

    config: RunConfig
    name: str
    model: InclusionModel
    target: TargetSet
    grid: Grid
    constants: Constants
    scenario: Scenario | None
    out_dir: Path

    @property
    def solver_options(self) -> SolverOptions:
        s = self.config.solver
        return SolverOptions(
            cap=s.cap,
            tol=s.tol,
            max_sweeps=s.max_sweeps,
            velocity_samples=s.velocity_samples,
        )

    @property
    def rho0(self) -> float:
        rho0 = self.config.verify.rho0 or self.target.rho0
        if rho0 is None:
            raise ConfigError("missing key: verify.rho0", param="verify.rho0")
        return rho0

    @property
    def R(self) -> float:
        R = self.config.verify.R or self.constants.R
        if R is None:
            raise ConfigError("missing key: verify.R", param="verify.R")
        return R

    def solve(self) -> ScalarField:
        return solve_min_time(self.model, self.target, self.grid, self.solver_options)

    def field_signature(self) -> dict[str, Any]:
        """What a stored T.csv was solved for; reuse needs an exact match."""

        config = self.config
        solver = config.solver
        return to_jsonable(
            {
                "scenario": self.name,
                "model": None if config.model is None else config.model.model_dump(),
                "target": None if config.target is None else config.target.model_dump(),
                "grid": self.grid.to_record(),
                "solver": {
                    "cap": solver.cap,
                    "tol": solver.tol,
                    "velocity_samples": solver.velocity_samples,
                },
            }
        )

    def _stored_signature(self) -> dict[str, Any] | None:
        path = self.out_dir / META_FILE
        try:
            meta = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return None
        return meta.get("field") if isinstance(meta, dict) else None

    def field(self) -> ScalarField:
        """T from a prior ``solve`` of the same problem, or a fresh solve."""

        path = self.out_dir / FIELD_FILE
        if not path.exists():
            return self.solve()
        if self._stored_signature() != self.field_signature():
            logger.warning("%s was solved for another problem or grid; solving again", path)
            return self.solve()
        logger.info("Reusing %s", path)
        return field_from_csv(path, cap=self.config.solver.cap)


def _inline_target(section: TargetSection, dim: int) -> TargetSet:
    if section.form == "ball-complement":
        return ball_complement_target(section.radius, dim)
    if section.form == "point":
        center = np.zeros(dim) if section.center is None else np.asarray(section.center)
        return point_target(center, section.radius, dim)
    if section.direction is None:
        raise ConfigError("missing key: target.direction", param="target.direction")
    return halfspace_target(section.direction, section.offset, section.rho0 or 1.0)


def _corner(
    value: list[float] | None,
    fallback: tuple[float, ...] | None,
    key: str,
) -> list[float]:
    if value is not None:
        return value
    if fallback is None:
        raise ConfigError(f"missing key: {key}", param=key)
    return list(fallback)


def build_context(config: RunConfig, require_spacing: bool = True) -> RunContext:
    """Resolve scenario or inline model, grid, target and constants.

    Without ``require_spacing`` a missing grid.h falls back to
    FALLBACK_CELLS cells along the shortest side of the box.
    """

    scenario: Scenario | None = None
    if config.scenario is not None:
        if config.model is not None or config.target is not None:
            raise ConfigError(
                "scenario excludes inline model and target keys",
                param="scenario",
            )
        scenario = get_scenario(config.scenario)
    elif config.model is None:
        raise ConfigError("missing key: scenario", param="scenario")
    elif config.target is None:
        raise ConfigError("missing key: target.form", param="target.form")

    lower = _corner(config.grid.lower, scenario.lower if scenario else None, "grid.lower")
    upper = _corner(config.grid.upper, scenario.upper if scenario else None, "grid.upper")
    if len(lower) != len(upper):
        raise ConfigError("grid.lower and grid.upper differ in dimension", param="grid.upper")
    h = config.grid.h
    if h is None:
        if require_spacing:
            raise ConfigError("missing key: grid.h", param="grid.h")
        h = min(hi - lo for lo, hi in zip(lower, upper)) / FALLBACK_CELLS
    grid = Grid.from_spacing(lower, upper, h)

    if scenario is not None:
        model = scenario.model
        target = scenario.target_on(grid)
        name = scenario.name
    else:
        assert config.model is not None and config.target is not None
        m = config.model
        model = constant_model(m.form, grid.dim, m.center, m.radius, m.vertices, m.generators)
        target = _inline_target(config.target, grid.dim)
        name = f"{model.name}/{target.name}"

    constants = estimate_constants(
        model,
        (grid.lower_array, grid.upper_array),
        samples=ESTIMATE_SAMPLES,
        seed=config.seed,
    )
    if config.verify.R is not None:
        constants = replace(
            constants,
            R=config.verify.R,
            sources={**constants.sources, "R": "provided"},
        )

    return RunContext(
        config=config,
        name=name,
        model=model.with_constants(constants),
        target=target,
        grid=grid,
        constants=constants,
        scenario=scenario,
        out_dir=Path(config.output.dir),
    )
