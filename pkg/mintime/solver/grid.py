from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from mintime.core.errors import InputError
from mintime.core.formatting import read_csv, write_csv
from mintime.core.types import Vector, as_vector
from mintime.model.inclusion import TargetSet

from .errors import GridConfigurationError

logger = logging.getLogger(__name__)

MAX_DIM = 3
MIN_COUNT = 3
DEFAULT_CAP = 10.0


@dataclass(frozen=True)
class Grid:
    """Rectangular node grid; axis k of every value array runs along x_{k+1}."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        dim = len(self.counts)
        if not 1 <= dim <= MAX_DIM:
            raise GridConfigurationError(f"grid dimension must be 1..{MAX_DIM}, got {dim}.")
        if len(self.lower) != dim or len(self.upper) != dim:
            raise GridConfigurationError("grid corners and counts disagree in dimension.")
        if any(count < MIN_COUNT for count in self.counts):
            raise GridConfigurationError(
                f"grid needs at least {MIN_COUNT} nodes per axis, got {self.counts}."
            )
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            raise GridConfigurationError("grid upper corner must exceed the lower corner.")

    @classmethod
    def from_spacing(cls, lower: Vector, upper: Vector, h: float) -> Grid:
        """Nodes every ``h`` from ``lower``; the upper corner snaps to the last node."""

        lower = as_vector(lower, name="grid.lower")
        upper = as_vector(upper, lower.shape[0], name="grid.upper")
        if not h > 0.0:
            raise GridConfigurationError("grid.h must be positive.", param="grid.h")
        counts = np.rint((upper - lower) / h).astype(int) + 1
        snapped = lower + (counts - 1) * h
        if not np.allclose(snapped, upper, rtol=0.0, atol=1e-9 * (1.0 + np.abs(upper))):
            logger.debug("Upper grid corner snapped from %s to %s", upper.tolist(), snapped.tolist())
        return cls(
            lower=tuple(float(v) for v in lower),
            upper=tuple(float(v) for v in snapped),
            counts=tuple(int(c) for c in counts),
        )

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @cached_property
    def lower_array(self) -> Vector:
        return np.asarray(self.lower, dtype=float)

    @cached_property
    def upper_array(self) -> Vector:
        return np.asarray(self.upper, dtype=float)

    @cached_property
    def spacing(self) -> Vector:
        return (self.upper_array - self.lower_array) / (np.asarray(self.counts) - 1)

    @property
    def h(self) -> float:
        return float(np.min(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(lo, hi, count)
            for lo, hi, count in zip(self.lower, self.upper, self.counts)
        ]

    @cached_property
    def _points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        points = np.stack([m.reshape(-1) for m in mesh], axis=1)
        points.setflags(write=False)
        return points

    def points(self) -> np.ndarray:
        """All nodes, shape (size, dim), in row-major order."""

        return self._points

    def node(self, index: tuple[int, ...]) -> Vector:
        return self.lower_array + np.asarray(index) * self.spacing

    def nearest_index(self, x: Vector) -> tuple[int, ...]:
        rel = np.rint((np.asarray(x, dtype=float) - self.lower_array) / self.spacing)
        clipped = np.clip(rel, 0, np.asarray(self.counts) - 1).astype(int)
        return tuple(int(i) for i in clipped)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        eps = 1e-12 * (1.0 + np.abs(self.upper_array))
        return np.all(
            (points >= self.lower_array - eps) & (points <= self.upper_array + eps),
            axis=1,
        )

    def boundary_mask(self, inside: np.ndarray) -> np.ndarray:
        """Inside nodes with at least one axis neighbour outside."""

        inside = np.asarray(inside, dtype=bool).reshape(self.shape)
        boundary = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            ahead = [slice(None)] * self.dim
            behind = [slice(None)] * self.dim
            ahead[axis] = slice(1, None)
            behind[axis] = slice(None, -1)
            flip = inside[tuple(ahead)] != inside[tuple(behind)]
            boundary[tuple(behind)] |= flip & inside[tuple(behind)]
            boundary[tuple(ahead)] |= flip & inside[tuple(ahead)]
        return boundary

    def to_record(self) -> dict:
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "counts": list(self.counts),
            "spacing": self.spacing.tolist(),
        }


def interpolate(grid: Grid, values: np.ndarray, points: np.ndarray, cap: float) -> np.ndarray:
    """Multilinear interpolation of node ``values``; queries off the box return ``cap``."""

    points = np.atleast_2d(np.asarray(points, dtype=float))
    counts = np.asarray(grid.counts)
    rel = (points - grid.lower_array) / grid.spacing
    inside = grid.contains(points)
    rel = np.clip(rel, 0.0, counts - 1)
    base = np.minimum(np.floor(rel).astype(int), counts - 2)
    frac = rel - base

    flat = values.reshape(-1)
    strides = np.asarray([int(np.prod(counts[k + 1 :])) for k in range(grid.dim)])
    result = np.zeros(len(points))
    for corner in itertools.product((0, 1), repeat=grid.dim):
        offset = np.asarray(corner)
        weight = np.prod(np.where(offset == 1, frac, 1.0 - frac), axis=1)
        result += weight * flat[(base + offset) @ strides]
    return np.where(inside, result, cap)


@dataclass(slots=True)
class SolveStats:
    sweeps: int = 0
    residual: float = float("inf")
    converged: bool = False

    def to_record(self) -> dict:
        return {
            "sweeps": self.sweeps,
            "residual": self.residual,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class ScalarField:
    """Node values of T on ``grid``; ``cap`` marks nodes not reached within cap."""

    grid: Grid
    values: np.ndarray
    cap: float = DEFAULT_CAP
    stats: SolveStats = field(default_factory=SolveStats)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    @property
    def reached(self) -> np.ndarray:
        return self.values < self.cap

    def interpolate(self, points: np.ndarray) -> np.ndarray:
        return interpolate(self.grid, self.values, points, self.cap)

    def value_at(self, x: Vector) -> float:
        return float(self.interpolate(np.asarray(x, dtype=float)[None, :])[0])

    def with_values(self, values: np.ndarray) -> ScalarField:
        return ScalarField(grid=self.grid, values=values, cap=self.cap, stats=self.stats)


@dataclass(frozen=True)
class GridSet:
    """A set known through its node mask and a continuous indicator (<= 0 inside)."""

    grid: Grid
    mask: np.ndarray
    indicator: Callable[[np.ndarray], np.ndarray]

    def contains(self, x: Vector) -> bool:
        return float(np.asarray(self.indicator(np.asarray(x, dtype=float)))) <= 0.0

    def boundary(self) -> np.ndarray:
        return self.grid.points()[self.grid.boundary_mask(self.mask).reshape(-1)]

    def as_target(self, rho0: float | None = None, name: str = "grid-set") -> TargetSet:
        return TargetSet(dim=self.grid.dim, indicator=self.indicator, rho0=rho0, name=name)


def field_header(dim: int) -> list[str]:
    return [*(f"x{i + 1}" for i in range(dim)), "T"]


def field_to_csv(scalar_field: ScalarField, path: Path) -> Path:
    rows = np.column_stack([scalar_field.grid.points(), scalar_field.flat])
    return write_csv(path, field_header(scalar_field.grid.dim), rows)


def field_from_csv(path: Path, cap: float = DEFAULT_CAP) -> ScalarField:
    """Rebuild a field from a tensor-grid CSV written by :func:`field_to_csv`."""

    header, data = read_csv(path)
    dim = len(header) - 1
    if dim < 1 or header != field_header(dim):
        raise InputError(f"unexpected field header {header}.", param="path")

    axes = [np.unique(data[:, k]) for k in range(dim)]
    counts = tuple(len(axis) for axis in axes)
    if int(np.prod(counts)) != len(data):
        raise InputError("field rows do not form a full rectangular grid.", param="path")

    grid = Grid(
        lower=tuple(float(a[0]) for a in axes),
        upper=tuple(float(a[-1]) for a in axes),
        counts=counts,
    )
    order = np.lexsort(tuple(data[:, k] for k in reversed(range(dim))))
    return ScalarField(grid=grid, values=data[order, dim], cap=cap)
