from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from mintime.core.errors import InputError
from mintime.core.types import Vector, as_vector
from mintime.model.inclusion import InclusionModel, TargetSet, point_target

from .errors import GridConfigurationError, OutOfRangeError
from .grid import DEFAULT_CAP, Grid, GridSet, ScalarField, SolveStats

logger = logging.getLogger(__name__)

MIN_SPEED = 1e-9
DEFAULT_KAPPA = 10.0


@dataclass(frozen=True, slots=True)
class SolverOptions:
    cap: float = DEFAULT_CAP
    tol: float = 1e-9
    max_sweeps: int = 10_000
    velocity_samples: int = 32

    def __post_init__(self) -> None:
        for name in ("cap", "tol", "max_sweeps", "velocity_samples"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InputError(f"solver.{name} must be positive, got {value}.", param=f"solver.{name}")


@dataclass(frozen=True)
class Backtrack:
    """Discrete optimal path from a start node down to the target boundary."""

    points: np.ndarray
    terminal: Vector
    elapsed: float
    reached: bool


class _SemiLagrangianScheme:
    """Feet x + tau v for every node: sampled v in F(x) plus one directed velocity.

    The directed velocity is argmax(x, -grad T) for the current iterate T and is
    refreshed by :meth:`direct`. Models with vertices skip it; their argmax is a
    vertex, and vertices are always among the candidates.
    """

    def __init__(
        self,
        model: InclusionModel,
        grid: Grid,
        options: SolverOptions,
        fixed: np.ndarray,
    ) -> None:
        self.model = model
        self.grid = grid
        self.fixed = fixed
        self.cap = options.cap
        counts = np.asarray(grid.counts)
        self.strides = np.asarray([int(np.prod(counts[k + 1 :])) for k in range(grid.dim)])
        self.corners = [np.asarray(c) for c in itertools.product((0, 1), repeat=grid.dim)]
        self.directed = model.vertices is None

        samples = [self._velocities(x, options.velocity_samples) for x in grid.points()]
        if len({s.shape for s in samples}) != 1:
            raise GridConfigurationError("velocity sampler returned a varying number of points.")
        self._sampled = self._feet(np.stack(samples))

        idle = np.zeros((grid.size, 1, grid.dim))
        self._apply_directed(self._feet(idle), np.zeros(grid.size, dtype=bool))
        logger.debug(
            "Precomputed %d feet (%d velocities per node, directed: %s)",
            self.tau.size,
            self.tau.shape[1],
            self.directed,
        )

    def _velocities(self, x: Vector, count: int) -> np.ndarray:
        dim = self.grid.dim
        velocities = np.asarray(self.model.sampler(x, count), dtype=float).reshape(-1, dim)
        if self.model.vertices is not None:
            vertices = np.asarray(self.model.vertices(x), dtype=float).reshape(-1, dim)
            velocities = np.concatenate([vertices, velocities])
        return velocities

    def _feet(self, velocities: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(tau, base node, fractional offset) of x + tau v; unusable feet get tau = inf."""

        grid = self.grid
        speeds = np.linalg.norm(velocities, axis=2)
        tau = grid.h / np.maximum(speeds, MIN_SPEED)
        feet = grid.points()[:, None, :] + tau[..., None] * velocities
        flat_feet = feet.reshape(-1, grid.dim)
        usable = grid.contains(flat_feet).reshape(tau.shape) & (tau < self.cap)

        counts = np.asarray(grid.counts)
        rel = np.clip((flat_feet - grid.lower_array) / grid.spacing, 0.0, counts - 1)
        base = np.minimum(np.floor(rel).astype(np.int64), counts - 2)
        return (
            np.where(usable, tau, np.inf),
            (base @ self.strides).reshape(tau.shape),
            (rel - base).reshape(feet.shape),
        )

    def _apply_directed(
        self,
        directed: tuple[np.ndarray, np.ndarray, np.ndarray],
        active: np.ndarray,
    ) -> None:
        tau, base, frac = directed
        tau = np.where(active[:, None], tau, np.inf)
        self.tau = np.concatenate([self._sampled[0], tau], axis=1)
        self.base = np.concatenate([self._sampled[1], base], axis=1)
        self.frac = np.concatenate([self._sampled[2], frac], axis=1)

    def direct(self, values: np.ndarray) -> None:
        """Point the directed velocity of every reached node down the gradient of ``values``."""

        if not self.directed:
            return
        grid = self.grid
        grads = np.gradient(values.reshape(grid.shape), *grid.spacing)
        if grid.dim == 1:
            grads = [grads]
        p = -np.stack([g.reshape(-1) for g in grads], axis=1)
        norms = np.linalg.norm(p, axis=1)
        active = ~self.fixed & (values < self.cap) & np.isfinite(norms) & (norms > 0.0)

        velocities = np.zeros((grid.size, 1, grid.dim))
        points = grid.points()
        for k in np.flatnonzero(active):
            velocities[k, 0] = self.model.argmax(points[k], p[k])
        self._apply_directed(self._feet(velocities), active)

    def candidates(self, values: np.ndarray, idx: np.ndarray) -> np.ndarray:
        frac = self.frac[idx]
        base = self.base[idx]
        interp = np.zeros(base.shape)
        for corner in self.corners:
            weight = np.prod(np.where(corner == 1, frac, 1.0 - frac), axis=2)
            interp += weight * values[base + int(corner @ self.strides)]
        return self.tau[idx] + interp

    def update(self, values: np.ndarray, idx: np.ndarray) -> float:
        best = self.candidates(values, idx).min(axis=1)
        best = np.where(self.fixed[idx], 0.0, best)
        old = values[idx]
        new = np.minimum(old, best)
        values[idx] = new
        return float(np.max(old - new, initial=0.0))


def _sweep_orderings(grid: Grid) -> list[list[np.ndarray]]:
    """Node batches for the 2^n Gauss-Seidel sweep directions s in {+1, -1}^n.

    Nodes are visited by level sum_k s_k i_k. A level splits into dim colour
    classes sum_k k s_k i_k mod dim, and no two nodes of one class lie within a
    cell of each other. Every foot is interpolated from nodes within one cell,
    so updating a class at once gives the same values as updating its nodes
    one at a time.
    """

    dim = grid.dim
    index = np.indices(grid.shape).reshape(dim, -1)
    weights = np.arange(dim)
    orderings = []
    for signs in itertools.product((1, -1), repeat=dim):
        signed = np.asarray(signs)[:, None] * index
        level = signed.sum(axis=0)
        colour = (weights @ signed) % dim
        key = (level - level.min()) * dim + colour
        order = np.argsort(key, kind="stable")
        cuts = np.flatnonzero(np.diff(key[order])) + 1
        orderings.append(np.split(order, cuts))
    return orderings


def _fixed_nodes(target: TargetSet, grid: Grid) -> np.ndarray:
    if target.dim != grid.dim:
        raise GridConfigurationError(
            f"target dimension {target.dim} does not match grid dimension {grid.dim}."
        )
    fixed = np.asarray(target.indicator(grid.points()), dtype=float) <= 0.0
    if not np.any(fixed):
        raise GridConfigurationError("target does not contain any grid node.")
    return fixed


def solve_min_time(
    model: InclusionModel,
    target: TargetSet,
    grid: Grid,
    options: SolverOptions | None = None,
) -> ScalarField:
    """Minimum time to reach ``target`` by Gauss-Seidel semi-Lagrangian sweeping.

    One sweep visits every node in each of the 2^n sweep directions; the
    directed velocities follow the iterate at the start of every sweep.
    """

    options = options or SolverOptions()
    if model.dim != grid.dim:
        raise GridConfigurationError(
            f"model dimension {model.dim} does not match grid dimension {grid.dim}."
        )
    fixed = _fixed_nodes(target, grid)
    scheme = _SemiLagrangianScheme(model, grid, options, fixed)

    values = np.where(fixed, 0.0, options.cap)
    orderings = _sweep_orderings(grid)
    stats = SolveStats()

    for sweep in range(1, options.max_sweeps + 1):
        scheme.direct(values)
        residual = 0.0
        for batches in orderings:
            for idx in batches:
                residual = max(residual, scheme.update(values, idx))
        stats.sweeps = sweep
        stats.residual = residual
        logger.debug("Sweep %d: sup-change %.3e", sweep, residual)
        if residual < options.tol:
            stats.converged = True
            break

    if stats.converged:
        logger.info(
            "Solved %s on %s nodes in %d sweeps (residual %.3e)",
            model.name,
            "x".join(str(c) for c in grid.counts),
            stats.sweeps,
            stats.residual,
        )
    else:
        logger.warning(
            "No convergence after %d sweeps; residual %.3e above tol %.3e",
            stats.sweeps,
            stats.residual,
            options.tol,
        )
    return ScalarField(grid=grid, values=values, cap=options.cap, stats=stats)


def bellman_residual(
    model: InclusionModel,
    target: TargetSet,
    field: ScalarField,
    options: SolverOptions | None = None,
) -> np.ndarray:
    """T(x) - min_v [tau + T(x + tau v)] per node; zero on target nodes."""

    options = options or SolverOptions(cap=field.cap)
    fixed = _fixed_nodes(target, field.grid)
    scheme = _SemiLagrangianScheme(model, field.grid, options, fixed)
    values = field.flat.copy()
    scheme.direct(values)
    best = scheme.candidates(values, np.arange(field.grid.size)).min(axis=1)
    residual = np.where(fixed, 0.0, values - np.minimum(best, field.cap))
    return residual.reshape(field.grid.shape)


def sublevel_set(field: ScalarField, r: float) -> GridSet:
    """S'(r) = {T >= r}; its indicator r - T is <= 0 inside."""

    if not 0.0 <= r < field.cap:
        raise OutOfRangeError(
            f"level {r} outside [0, cap={field.cap}).",
            param="r",
        )
    return GridSet(
        grid=field.grid,
        mask=field.values >= r,
        indicator=_level_indicator(field, r, sign=-1.0),
    )


def dilated_target(field: ScalarField, t: float) -> TargetSet:
    """A(S, t) = {T <= t} as a target whose indicator is T - t."""

    if not 0.0 <= t < field.cap:
        raise OutOfRangeError(f"dilation {t} outside [0, cap={field.cap}).", param="t")
    return TargetSet(
        dim=field.grid.dim,
        indicator=_level_indicator(field, t, sign=1.0),
        name=f"dilated({t:g})",
    )


def _level_indicator(field: ScalarField, level: float, sign: float):
    dim = field.grid.dim

    def indicator(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        values = field.interpolate(x.reshape(-1, dim)).reshape(lead)
        return sign * (values - level)

    return indicator


def attainable_set(
    model: InclusionModel,
    source: TargetSet | Vector,
    horizon: float,
    grid: Grid,
    options: SolverOptions | None = None,
) -> ScalarField:
    """Arrival-time field T_rev of the reversed inclusion started on ``source``.

    Arrival of x' in -F(x) from S at y takes exactly the forward minimum time
    from y to S, so the field is the forward solve; A(S, t) = {T_rev <= t}.
    A point source becomes a ball of half a cell diagonal.
    """

    options = options or SolverOptions()
    if not 0.0 <= horizon < options.cap:
        raise OutOfRangeError(
            f"horizon {horizon} outside [0, cap={options.cap}).", param="horizon"
        )
    if not isinstance(source, TargetSet):
        point = as_vector(source, grid.dim, name="origin")
        radius = 0.5 * float(np.linalg.norm(grid.spacing)) * (1.0 + 1e-9)
        source = point_target(point, radius)

    field = solve_min_time(model, source, grid, options)
    inside = int(np.count_nonzero(field.values <= horizon))
    logger.info("A(%s, %.6g) covers %d grid nodes", source.name, horizon, inside)
    return field


def local_lipschitz(field: ScalarField) -> np.ndarray:
    """Largest one-sided axis slope at each node, ignoring neighbours at cap."""

    grid = field.grid
    values = field.values
    slope = np.zeros(grid.shape)
    for axis in range(grid.dim):
        ahead = [slice(None)] * grid.dim
        behind = [slice(None)] * grid.dim
        ahead[axis] = slice(1, None)
        behind[axis] = slice(None, -1)
        a, b = values[tuple(ahead)], values[tuple(behind)]
        diff = np.abs(a - b) / grid.spacing[axis]
        diff = np.where((a < field.cap) & (b < field.cap), diff, 0.0)
        slope[tuple(ahead)] = np.maximum(slope[tuple(ahead)], diff)
        slope[tuple(behind)] = np.maximum(slope[tuple(behind)], diff)
    return slope


def restrict_continuity_region(field: ScalarField, kappa: float = DEFAULT_KAPPA) -> np.ndarray:
    """Nodes whose 3^n-neighbourhood oscillation stays below kappa h (1 + L).

    L is the local slope clamped at h^(-1/2); nodes at cap or inside the
    target (T = 0) are excluded.
    """

    grid = field.grid
    h = grid.h
    padded = np.pad(field.values, 1, mode="edge")
    high = np.full(grid.shape, -np.inf)
    low = np.full(grid.shape, np.inf)
    for shift in itertools.product((0, 1, 2), repeat=grid.dim):
        window = padded[tuple(slice(s, s + c) for s, c in zip(shift, grid.counts))]
        high = np.maximum(high, window)
        low = np.minimum(low, window)

    slope = np.minimum(local_lipschitz(field), h ** -0.5)
    mask = (high - low) <= kappa * h * (1.0 + slope)
    mask &= (field.values > 0.0) & (field.values < field.cap)
    logger.debug("Continuity mask keeps %d of %d nodes", int(mask.sum()), grid.size)
    return mask


def backtrack_trajectory(
    field: ScalarField,
    model: InclusionModel,
    target: TargetSet,
    x: Vector,
    max_steps: int | None = None,
    velocity_samples: int = 32,
) -> Backtrack:
    """Follow the sampled velocity with the steepest discrete descent of T to S.

    Each step moves x to x + tau v with tau = h / |v|; ties go to the smallest
    sample index. The terminal point is located on the zero level of the
    target indicator by bisection along the last step.
    """

    grid = field.grid
    x = as_vector(x, grid.dim)
    max_steps = max_steps or 4 * int(sum(grid.counts))
    path = [x]
    elapsed = 0.0

    if target.value(x) <= 0.0:
        return Backtrack(np.asarray(path), x, 0.0, True)

    for _ in range(max_steps):
        velocities = np.asarray(model.sampler(x, velocity_samples), dtype=float)
        speeds = np.linalg.norm(velocities, axis=1)
        tau = grid.h / np.maximum(speeds, MIN_SPEED)
        feet = x + tau[:, None] * velocities
        cost = tau + field.interpolate(feet)
        k = int(np.argmin(cost))
        if not cost[k] < field.cap:
            break

        step_to = feet[k]
        if target.value(step_to) <= 0.0:
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if target.value(x + mid * (step_to - x)) <= 0.0:
                    hi = mid
                else:
                    lo = mid
            terminal = x + hi * (step_to - x)
            path.append(terminal)
            elapsed += hi * float(tau[k])
            return Backtrack(np.asarray(path), terminal, elapsed, True)

        x = step_to
        elapsed += float(tau[k])
        path.append(x)

    logger.warning("Backtracking from %s did not reach the target", path[0].tolist())
    return Backtrack(np.asarray(path), path[-1], elapsed, False)
