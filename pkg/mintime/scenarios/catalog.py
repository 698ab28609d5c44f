from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from mintime.core.errors import ConfigError
from mintime.core.types import Vector, as_vector
from mintime.model.inclusion import (
    Constants,
    InclusionModel,
    TargetSet,
    ball_complement_target,
    ball_model,
    box_model,
    point_target,
    polytope_model,
)
from mintime.solver.grid import Grid

from .example1 import example1_model, example1_T, example1_target

Oracle = Callable[[Vector], "float | None"]
ModelForm = Literal["ball", "box", "polytope"]


@dataclass(frozen=True)
class Scenario:
    """A named model/target pair with its default box and optional exact T.

    Scenarios with a ``source`` point have no fixed target: the target is the
    half-cell ball around the source on whatever grid the run uses.
    """

    name: str
    model: InclusionModel
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    target: TargetSet | None = None
    source: tuple[float, ...] | None = None
    oracle: Oracle | None = None
    notes: str = ""

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def rho0(self) -> float | None:
        return self.target.rho0 if self.target is not None else None

    def target_on(self, grid: Grid) -> TargetSet:
        if self.target is not None:
            return self.target
        if self.source is None:
            raise ConfigError(f"scenario {self.name} has neither target nor source.", param="scenario")
        radius = 0.5 * float(np.linalg.norm(grid.spacing)) * (1.0 + 1e-9)
        return point_target(np.asarray(self.source), radius)

    def oracle_at(self, x: Vector) -> float | None:
        return None if self.oracle is None else self.oracle(np.asarray(x, dtype=float))


def eikonal_scenario(radius: float = 1.0) -> Scenario:
    """F(x) = closed unit ball, S = {|x| >= radius}, T(x) = radius - |x| inside."""

    if not (math.isfinite(radius) and radius > 0.0):
        raise ConfigError(f"eikonal radius must be positive, got {radius}.", param="radius")

    def oracle(x: Vector) -> float | None:
        if not np.all(np.isfinite(x)):
            return None
        return max(radius - float(np.linalg.norm(x)), 0.0)

    return Scenario(
        name="eikonal",
        model=ball_model(
            2,
            constants=Constants.provided(K=0.0, K1=0.0, K2=1.0, c0=0.0, R=1.0),
            name="unit-ball",
        ),
        target=ball_complement_target(radius),
        lower=(-radius, -radius),
        upper=(radius, radius),
        oracle=oracle,
        notes="Concave field; sphere certificates pass everywhere off the center.",
    )


def ball_origin_scenario() -> Scenario:
    """Unit-ball dynamics from a point source at 0; T(x) = |x|, A(T) = closed ball of radius T."""

    def oracle(x: Vector) -> float | None:
        if not np.all(np.isfinite(x)):
            return None
        return float(np.linalg.norm(x))

    return Scenario(
        name="ball-origin",
        model=ball_model(
            2,
            constants=Constants.provided(K=0.0, K1=0.0, K2=1.0, c0=0.0, R=1.0),
            name="unit-ball",
        ),
        source=(0.0, 0.0),
        lower=(-1.0, -1.0),
        upper=(1.0, 1.0),
        oracle=oracle,
        notes="Attainable sets are exact balls.",
    )


def example1_scenario() -> Scenario:
    def oracle(x: Vector) -> float | None:
        return example1_T(float(x[0]), float(x[1]))

    return Scenario(
        name="example1",
        model=example1_model(),
        target=example1_target(),
        lower=(-1.0, -1.0),
        upper=(1.2, 1.8),
        oracle=oracle,
        notes="T is continuous, not Lipschitz along {x2 = 0, x1 < 1}; Petrov fails near (1, 0).",
    )


SCENARIOS: dict[str, Callable[[], Scenario]] = {
    "eikonal": eikonal_scenario,
    "ball-origin": ball_origin_scenario,
    "example1": example1_scenario,
}


def get_scenario(name: str) -> Scenario:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIOS))
        raise ConfigError(f"unknown scenario: {name} (known: {known})", param="scenario") from None
    return factory()


def constant_model(
    form: ModelForm,
    dim: int,
    center: Vector | None = None,
    radius: float = 1.0,
    vertices: Vector | None = None,
    generators: Vector | None = None,
    constants: Constants | None = None,
) -> InclusionModel:
    """State-independent F from config parameters: a ball, a box or a vertex polytope.

    F does not depend on x, so K = K1 = c0 = 0 and K2 = max |v| hold exactly.
    """

    if form == "ball":
        c = np.zeros(dim) if center is None else as_vector(center, dim, name="model.center")
        if not (math.isfinite(radius) and radius > 0.0):
            raise ConfigError(f"model.radius must be positive, got {radius}.", param="model.radius")
        speed = float(np.linalg.norm(c)) + radius
        constants = constants or Constants.provided(K=0.0, K1=0.0, K2=speed, c0=0.0)
        return ball_model(dim, center=c, radius=radius, constants=constants, name="ball")

    if form == "polytope":
        if vertices is None:
            raise ConfigError("missing key: model.vertices", param="model.vertices")
        flat = as_vector(vertices, name="model.vertices")
        if flat.size == 0 or flat.size % dim:
            raise ConfigError(
                f"model.vertices needs a multiple of {dim} numbers, got {flat.size}.",
                param="model.vertices",
            )
        verts = flat.reshape(-1, dim)
        speed = float(np.max(np.linalg.norm(verts, axis=1)))
        constants = constants or Constants.provided(K=0.0, K1=0.0, K2=speed, c0=0.0)
        return polytope_model(dim, verts, constants=constants, name="polytope")

    if form == "box":
        if generators is None:
            raise ConfigError("missing key: model.generators", param="model.generators")
        flat = as_vector(generators, name="model.generators")
        if flat.size == 0 or flat.size % dim:
            raise ConfigError(
                f"model.generators needs a multiple of {dim} numbers, got {flat.size}.",
                param="model.generators",
            )
        gens = flat.reshape(-1, dim)
        corners = np.asarray(list(itertools.product((0.0, 1.0), repeat=len(gens)))) @ gens
        speed = float(np.max(np.linalg.norm(corners, axis=1)))
        constants = constants or Constants.provided(K=0.0, K1=0.0, K2=speed, c0=0.0)
        return box_model(dim, gens, constants=constants, name="box")

    raise ConfigError(f"unknown model form: {form}", param="model.form")
