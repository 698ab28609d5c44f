from __future__ import annotations

from typing import Annotated, Any, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PositiveFloat, PositiveInt


def _as_list(value: Any) -> Any:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [value]
    return value


FloatList = Annotated[list[float], BeforeValidator(_as_list)]


class GridSection(BaseModel):
    h: PositiveFloat | None = None
    lower: FloatList | None = None
    upper: FloatList | None = None

    model_config = ConfigDict(extra="forbid")


class SolverSection(BaseModel):
    cap: PositiveFloat = 10.0
    tol: PositiveFloat = 1e-9
    max_sweeps: PositiveInt = 10_000
    velocity_samples: PositiveInt = 32

    model_config = ConfigDict(extra="forbid")


class VerifySection(BaseModel):
    slack_kappa: PositiveFloat = 10.0
    samples: PositiveInt = 500
    threshold: float = Field(default=0.95, ge=0.0, le=1.0)
    horizon: PositiveFloat | None = None
    rho0: PositiveFloat | None = None
    R: PositiveFloat | None = None
    dt: PositiveFloat = 5e-3
    theta_samples: PositiveInt = 100
    constructive_points: int = Field(default=10, ge=0)
    radius_scale: PositiveFloat = 1.0
    petrov_margin: float = 0.1

    model_config = ConfigDict(extra="forbid")


class ModelSection(BaseModel):
    form: Literal["ball", "box", "polytope"]
    center: FloatList | None = None
    radius: PositiveFloat = 1.0
    vertices: FloatList | None = None
    generators: FloatList | None = None

    model_config = ConfigDict(extra="forbid")


class TargetSection(BaseModel):
    form: Literal["ball-complement", "point", "halfspace"]
    radius: PositiveFloat = 1.0
    center: FloatList | None = None
    direction: FloatList | None = None
    offset: float = 0.0
    rho0: PositiveFloat | None = None

    model_config = ConfigDict(extra="forbid")


class ShootSection(BaseModel):
    terminal: FloatList | None = None
    normal: FloatList | None = None
    r: float | None = Field(default=None, ge=0.0)
    dt: PositiveFloat = 1e-3

    model_config = ConfigDict(extra="forbid")


class OutputSection(BaseModel):
    dir: str = "out"

    model_config = ConfigDict(extra="forbid")


class RunConfig(BaseModel):
    scenario: str | None = None
    seed: int = Field(default=0, ge=0)
    grid: GridSection = Field(default_factory=GridSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    model: ModelSection | None = None
    target: TargetSection | None = None
    shoot: ShootSection = Field(default_factory=ShootSection)
    output: OutputSection = Field(default_factory=OutputSection)

    model_config = ConfigDict(extra="forbid")
