"""A planar inclusion whose minimum time function is continuous but not Lipschitz.

F(x) = {(u1, h(x2) u2) : u in [0, 1]^2} with h(x2) = max(x2 - 1, 0). The
target S lies right of the curve gamma built from the ray {x1 = 1, x2 <= 0},
the quarter circle of radius 1 around (1, 1) from (1, 0) to (0, 1), and the
ray {x1 = 0, x2 >= 1}.
"""

from __future__ import annotations

import math

import numpy as np

from mintime.core.types import Vector
from mintime.model.inclusion import Constants, InclusionModel, TargetSet, box_model

ARC_CENTER = np.array([1.0, 1.0])


def example1_h(x2: float) -> float:
    return max(x2 - 1.0, 0.0)


def _arc_offset(t):
    return np.sqrt(np.clip(2.0 * t - t * t, 0.0, None))


def example1_gamma(t: float) -> Vector:
    if t <= 0.0:
        return np.array([1.0, t])
    if t <= 1.0:
        return np.array([1.0 - math.sqrt(-t * t + 2.0 * t), t])
    return np.array([0.0, t])


def example1_boundary_x1(x2: np.ndarray) -> np.ndarray:
    """g(x2) with S = {x1 >= g(x2)}."""

    x2 = np.asarray(x2, dtype=float)
    return np.where(x2 <= 0.0, 1.0, np.where(x2 <= 1.0, 1.0 - _arc_offset(x2), 0.0))


def example1_petrov_margin(t: float) -> float:
    """min over F of <v, nu> at gamma(t), 0 <= t <= 1, nu the outward unit normal."""

    return -math.sqrt(-t * t + 2.0 * t)


def example1_hamiltonian_cases(x: Vector, p: Vector) -> float:
    """H written out case by case on the signs of p."""

    h = example1_h(float(x[1]))
    p1, p2 = float(p[0]), float(p[1])
    if p1 >= 0.0 and p2 >= 0.0:
        return p1 + h * p2
    if p1 >= 0.0:
        return p1
    if p2 >= 0.0:
        return h * p2
    return 0.0


def example1_T(x1: float, x2: float) -> float | None:
    """Closed-form minimum time; 0 on S, None only for non-finite input."""

    if not (math.isfinite(x1) and math.isfinite(x2)):
        return None
    if x2 <= 0.0 and x1 <= 1.0:
        return 1.0 - x1
    if 0.0 < x2 <= 1.0:
        edge = 1.0 - math.sqrt(-x2 * x2 + 2.0 * x2)
        if x1 <= edge:
            return edge - x1
    if x2 > 1.0 and x1 <= 0.0:
        return -x1
    return 0.0


def example1_model() -> InclusionModel:
    def generators(x: Vector) -> np.ndarray:
        return np.array([[1.0, 0.0], [0.0, example1_h(float(x[1]))]])

    return box_model(
        2,
        generators,
        constants=Constants.provided(K=1.0, K1=1.0, K2=1.0, c0=0.0),
        name="example1",
    )


def _piece_distances(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x1, x2 = x[..., 0], x[..., 1]
    lower_ray = np.hypot(x1 - 1.0, np.maximum(x2, 0.0))
    upper_ray = np.hypot(x1, np.minimum(x2 - 1.0, 0.0))

    dx, dy = x1 - ARC_CENTER[0], x2 - ARC_CENTER[1]
    radius = np.hypot(dx, dy)
    # The arc spans the third quadrant around its center.
    on_arc = (dx <= 0.0) & (dy <= 0.0)
    arc = np.where(on_arc, np.abs(radius - 1.0), np.inf)
    return lower_ray, arc, upper_ray


def example1_target() -> TargetSet:
    def indicator(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        distance = np.minimum.reduce(_piece_distances(x))
        side = np.sign(example1_boundary_x1(x[..., 1]) - x[..., 0])
        return side * distance

    def normal(x: Vector) -> Vector:
        distances = np.asarray([float(d) for d in _piece_distances(np.asarray(x, dtype=float))])
        piece = int(np.argmin(distances))
        if piece == 1:
            offset = np.asarray(x, dtype=float) - ARC_CENTER
            norm = float(np.linalg.norm(offset))
            if norm > 0.0:
                return offset / norm
        return np.array([-1.0, 0.0])

    return TargetSet(dim=2, indicator=indicator, rho0=1.0, normal=normal, name="example1")
