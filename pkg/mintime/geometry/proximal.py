from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from mintime.core.errors import InputError
from mintime.core.rng import SplitMix64
from mintime.core.types import Vector, as_vector, unit
from mintime.model.errors import EmptyBoundaryError
from mintime.model.inclusion import TargetSet
from mintime.solver.grid import Grid, ScalarField

logger = logging.getLogger(__name__)

FAN_DIRECTIONS = 64
MAX_PAIRS = 100_000

PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(slots=True)
class SphereCertificate:
    """Proximal-normal inequality <normal, y - base> <= |y - base|^2 / (2 radius)."""

    base: Vector
    normal: Vector
    radius: float
    sigma_residual: float
    slack: float
    tested_count: int
    worst_point: Vector | None = None
    note: str | None = None

    @property
    def passed(self) -> bool:
        return self.note is None and self.sigma_residual <= self.slack


@dataclass(slots=True)
class InnerBallReport:
    pass_fraction: float
    certified: int
    total: int
    worst_boundary_point: Vector | None


@dataclass(slots=True)
class SemiconcavityReport:
    max_excess: float
    worst_triple: tuple[Vector, Vector] | None
    count: int
    slack: float

    @property
    def passed(self) -> bool:
        return self.max_excess <= self.slack


@dataclass(slots=True)
class LipschitzReport:
    max_ratio: float
    worst_pair: tuple[Vector, Vector] | None
    count: int
    L: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.L


def failed_certificate(
    base: Vector,
    radius: float,
    slack: float,
    note: str,
) -> SphereCertificate:
    """Per-point failure record; it never aborts a batch."""

    dim = len(base)
    normal = np.zeros(dim)
    normal[-1] = 1.0
    return SphereCertificate(
        base=np.asarray(base, dtype=float),
        normal=normal,
        radius=radius,
        sigma_residual=math.inf,
        slack=slack,
        tested_count=0,
        note=note,
    )


def check_realized_by_ball(
    points: np.ndarray,
    base: Vector,
    normal: Vector,
    radius: float,
    slack: float = 0.0,
) -> SphereCertificate:
    """Brute-force scan of ``points`` against the ball of ``radius`` touching at ``base``."""

    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise InputError("no points to test.", param="points")
    base = as_vector(base, points.shape[1], name="base")
    normal = as_vector(normal, points.shape[1], name="normal")
    if float(np.linalg.norm(normal)) == 0.0:
        raise InputError("normal must be nonzero.", param="normal")
    if not radius > 0.0:
        raise InputError("radius must be positive.", param="radius")
    normal = unit(normal)

    offsets = points - base
    residuals = offsets @ normal - np.einsum("ij,ij->i", offsets, offsets) / (2.0 * radius)
    worst = int(np.argmax(residuals))
    return SphereCertificate(
        base=base,
        normal=normal,
        radius=float(radius),
        sigma_residual=float(residuals[worst]),
        slack=float(slack),
        tested_count=len(points),
        worst_point=points[worst],
    )


def boundary_points(grid: Grid, inside_mask: np.ndarray) -> np.ndarray:
    """Inside nodes with an axis neighbour of the other sign."""

    mask = grid.boundary_mask(inside_mask).reshape(-1)
    if not np.any(mask):
        raise EmptyBoundaryError("set has no boundary nodes on this grid.")
    return grid.points()[mask]


def proximal_normal(target: TargetSet, x: Vector) -> Vector:
    """Unit normal to S at x pointing out of S."""

    return target.normal_at(x)


def _fan(dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(FAN_DIRECTIONS) / FAN_DIRECTIONS
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    k = np.arange(FAN_DIRECTIONS) + 0.5
    polar = np.arccos(1.0 - 2.0 * k / FAN_DIRECTIONS)
    azimuth = math.pi * (1.0 + math.sqrt(5.0)) * k
    return np.stack(
        [np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar), np.cos(polar)],
        axis=1,
    )


def ball_inside(grid: Grid, inside: np.ndarray, center: Vector, radius: float) -> bool:
    """Whether every node of the open ball lies in ``inside``; the ball must fit the grid."""

    if np.any(center - radius < grid.lower_array) or np.any(center + radius > grid.upper_array):
        return False
    lo = np.ceil((center - radius - grid.lower_array) / grid.spacing).astype(int)
    hi = np.floor((center + radius - grid.lower_array) / grid.spacing).astype(int)
    lo = np.clip(lo, 0, np.asarray(grid.counts) - 1)
    hi = np.clip(hi, 0, np.asarray(grid.counts) - 1)
    window = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
    axes = [
        grid.lower_array[k] + np.arange(lo[k], hi[k] + 1) * grid.spacing[k]
        for k in range(grid.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    dist2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    return bool(np.all(inside[window][dist2 < radius**2]))


def check_inner_ball(
    set_indicator: Callable[[np.ndarray], np.ndarray],
    grid: Grid,
    rho: float,
    slack: float = 0.0,
) -> InnerBallReport:
    """Fraction of boundary nodes x admitting B(x + rho nu, rho (1 - slack)) inside the set.

    Candidates for nu are the discrete inward normal of the indicator followed
    by a fixed fan of directions.
    """

    points = grid.points()
    values = np.asarray(set_indicator(points), dtype=float).reshape(grid.shape)
    inside = values <= 0.0
    nodes = boundary_points(grid, inside)
    fan = _fan(grid.dim)
    radius = rho * (1.0 - slack)

    certified = 0
    worst: Vector | None = None
    for x in nodes:
        offsets = np.eye(grid.dim) * grid.spacing
        grad = (
            np.asarray(set_indicator(x + offsets)) - np.asarray(set_indicator(x - offsets))
        ) / (2.0 * grid.spacing)
        candidates = fan if not np.any(grad) else np.vstack([-unit(grad), fan])
        if any(ball_inside(grid, inside, x + rho * nu, radius) for nu in candidates):
            certified += 1
        elif worst is None:
            worst = x

    total = len(nodes)
    fraction = certified / total
    logger.debug("Inner ball radius %.4g: %d/%d boundary nodes certified", rho, certified, total)
    return InnerBallReport(
        pass_fraction=fraction,
        certified=certified,
        total=total,
        worst_boundary_point=worst,
    )


def test_semiconcavity(
    f: ScalarField | PointFunction,
    region: np.ndarray,
    c: float,
    step_set: Iterable[Vector],
    slack: float = 1e-9,
) -> SemiconcavityReport:
    """Largest f(x+z) + f(x-z) - 2 f(x) - 2c|z|^2 over the sampled triples.

    For a field, ``region`` is a node mask and steps are integer node offsets;
    a triple counts only when all three nodes are in the mask. For a function,
    ``region`` lists the points x and steps are real vectors.
    """

    steps = [np.asarray(z) for z in step_set]
    best = -math.inf
    worst: tuple[Vector, Vector] | None = None
    count = 0

    if isinstance(f, ScalarField):
        grid = f.grid
        mask = np.asarray(region, dtype=bool).reshape(grid.shape)
        nodes = np.argwhere(mask)
        counts = np.asarray(grid.counts)
        for z in steps:
            offset = z.astype(int)
            plus, minus = nodes + offset, nodes - offset
            ok = np.all((plus >= 0) & (plus < counts) & (minus >= 0) & (minus < counts), axis=1)
            base, plus, minus = nodes[ok], plus[ok], minus[ok]
            ok = mask[tuple(plus.T)] & mask[tuple(minus.T)]
            base, plus, minus = base[ok], plus[ok], minus[ok]
            if len(base) == 0:
                continue
            step = offset * grid.spacing
            excess = (
                f.values[tuple(plus.T)]
                + f.values[tuple(minus.T)]
                - 2.0 * f.values[tuple(base.T)]
                - 2.0 * c * float(np.dot(step, step))
            )
            count += len(base)
            j = int(np.argmax(excess))
            if excess[j] > best:
                best = float(excess[j])
                worst = (grid.node(tuple(base[j])), step)
    else:
        xs = np.atleast_2d(np.asarray(region, dtype=float))
        for z in steps:
            z = z.astype(float)
            excess = f(xs + z) + f(xs - z) - 2.0 * f(xs) - 2.0 * c * float(np.dot(z, z))
            count += len(xs)
            j = int(np.argmax(excess))
            if excess[j] > best:
                best = float(excess[j])
                worst = (xs[j], z)

    if count == 0:
        raise InputError("no admissible (x, z) triples in the region.", param="region")
    return SemiconcavityReport(max_excess=best, worst_triple=worst, count=count, slack=slack)


def test_lipschitz_sampling(
    f: ScalarField | PointFunction,
    region: np.ndarray,
    L: float,
    seed: int = 0,
) -> LipschitzReport:
    """Largest difference quotient |f(x) - f(y)| / |x - y| over sampled pairs.

    Fields use axis and diagonal node pairs inside the mask; functions use all
    pairs of the listed points, or seeded random pairs beyond ``MAX_PAIRS``.
    """

    if isinstance(f, ScalarField):
        mask = np.asarray(region, dtype=bool).reshape(f.grid.shape)
        points = f.grid.points()[mask.reshape(-1)]
        values = f.flat[mask.reshape(-1)]
        index = np.full(f.grid.size, -1)
        index[mask.reshape(-1)] = np.arange(len(points))
        nodes = np.argwhere(mask)
        counts = np.asarray(f.grid.counts)
        strides = np.asarray([int(np.prod(counts[k + 1 :])) for k in range(f.grid.dim)])
        first, second = [], []
        for offset in _neighbour_offsets(f.grid.dim):
            other = nodes + offset
            ok = np.all((other >= 0) & (other < counts), axis=1)
            partner = np.full(len(nodes), -1)
            partner[ok] = index[other[ok] @ strides]
            keep = partner >= 0
            first.append(np.flatnonzero(keep))
            second.append(partner[keep])
        i = np.concatenate(first) if first else np.zeros(0, dtype=int)
        j = np.concatenate(second) if second else np.zeros(0, dtype=int)
    else:
        points = np.atleast_2d(np.asarray(region, dtype=float))
        values = np.asarray(f(points), dtype=float)
        m = len(points)
        if m * (m - 1) // 2 <= MAX_PAIRS:
            i, j = np.triu_indices(m, k=1)
        else:
            rng = SplitMix64(seed)
            i = np.asarray([rng.below(m) for _ in range(MAX_PAIRS)])
            j = np.asarray([rng.below(m) for _ in range(MAX_PAIRS)])
            keep = i != j
            i, j = i[keep], j[keep]

    if len(i) == 0:
        return LipschitzReport(max_ratio=0.0, worst_pair=None, count=0, L=L)

    distance = np.linalg.norm(points[i] - points[j], axis=1)
    ratio = np.abs(values[i] - values[j]) / distance
    k = int(np.argmax(ratio))
    return LipschitzReport(
        max_ratio=float(ratio[k]),
        worst_pair=(points[i[k]], points[j[k]]),
        count=len(i),
        L=L,
    )


def _neighbour_offsets(dim: int) -> list[np.ndarray]:
    """Half of the 3^n - 1 neighbour offsets (one per +/- pair)."""

    offsets = []
    for code in range(1, 3**dim):
        digits = [(code // 3**k) % 3 - 1 for k in range(dim)]
        offset = np.asarray(digits[::-1])
        first_nonzero = offset[np.flatnonzero(offset)[0]]
        if first_nonzero > 0:
            offsets.append(offset)
    return offsets


# Library checks, not pytest cases.
test_semiconcavity.__test__ = False  # type: ignore[attr-defined]
test_lipschitz_sampling.__test__ = False  # type: ignore[attr-defined]
