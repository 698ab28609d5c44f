from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable

import numpy as np

from mintime.core.errors import InputError
from mintime.core.rng import SplitMix64
from mintime.core.types import Vector, as_vector, unit

from .errors import (
    ConstantsValidationError,
    DegenerateCovectorError,
    EmptyBoundaryError,
    EstimationError,
)
from .inclusion import CONSTANT_NAMES, Constants, InclusionModel, TargetSet

if TYPE_CHECKING:
    from mintime.solver.grid import Grid

logger = logging.getLogger(__name__)

Box = tuple[Vector, Vector]

HOMOGENEITY_FACTORS = (0.0, 0.5, 2.0, 10.0)
ESTIMATE_MARGIN = 1.01
SAMPLER_POINTS = 16
MIN_ESTIMATE_SAMPLES = 100


@dataclass(slots=True)
class PropertyCheck:
    max_violation: float = 0.0
    worst_x: Vector | None = None
    worst_p: Vector | None = None
    samples: int = 0

    def record(self, violation: float, x: Vector, p: Vector) -> None:
        if violation > self.max_violation:
            self.max_violation = violation
            self.worst_x = x.copy()
            self.worst_p = p.copy()

    def holds(self, tol: float = 1e-9) -> bool:
        return self.max_violation <= tol


@dataclass(slots=True)
class SupportReport:
    homogeneity: PropertyCheck = field(default_factory=PropertyCheck)
    subadditivity: PropertyCheck = field(default_factory=PropertyCheck)
    consistency: PropertyCheck = field(default_factory=PropertyCheck)
    domination: PropertyCheck = field(default_factory=PropertyCheck)

    def holds(self, tol: float = 1e-9) -> bool:
        return all(
            check.holds(tol)
            for check in (
                self.homogeneity,
                self.subadditivity,
                self.consistency,
                self.domination,
            )
        )


@dataclass(slots=True)
class PetrovReport:
    mu_min: float
    worst_point: Vector
    count: int

    @property
    def holds(self) -> bool:
        return self.mu_min > 0.0


@dataclass(slots=True)
class C1Verdict:
    """``left`` selects d_x H(x, -p), ``right`` selects d_x H(x, p)."""

    applicable: bool
    holds: bool
    left: Vector
    right: Vector
    left_hull: np.ndarray
    right_hull: np.ndarray


def _fd_step(x: Vector) -> float:
    return 1e-5 * (1.0 + float(np.linalg.norm(x)))


def _check_box(box: Box, dim: int) -> Box:
    lower = as_vector(box[0], dim, name="box.lower")
    upper = as_vector(box[1], dim, name="box.upper")
    if np.any(upper <= lower):
        raise EstimationError(
            "sampling box has zero measure; no valid sample pair exists.",
            param="box",
        )
    return lower, upper


def eval_hamiltonian(model: InclusionModel, x: Vector, p: Vector) -> float:
    x = as_vector(x, model.dim, name="x")
    p = as_vector(p, model.dim, name="p")
    if not np.any(p):
        return 0.0
    return float(model.hamiltonian(x, p))


def eval_argmax(model: InclusionModel, x: Vector, p: Vector) -> Vector:
    x = as_vector(x, model.dim, name="x")
    p = as_vector(p, model.dim, name="p")
    if not np.any(p):
        raise DegenerateCovectorError("argmax is undefined for the zero covector.")
    return np.asarray(model.argmax(x, p), dtype=float)


def grad_x_hamiltonian(
    model: InclusionModel,
    x: Vector,
    p: Vector,
    step: float | None = None,
) -> Vector:
    """Central finite-difference selection of the x-subgradient of H(., p)."""

    step = step or _fd_step(x)
    grad = np.empty(model.dim)
    for i in range(model.dim):
        offset = np.zeros(model.dim)
        offset[i] = step
        grad[i] = (model.hamiltonian(x + offset, p) - model.hamiltonian(x - offset, p)) / (
            2.0 * step
        )
    return grad


def one_sided_grad_x_hamiltonian(
    model: InclusionModel,
    x: Vector,
    p: Vector,
    step: float | None = None,
) -> tuple[Vector, Vector]:
    """Forward and backward difference quotients of H(., p), per coordinate."""

    step = step or _fd_step(x)
    centre = model.hamiltonian(x, p)
    forward = np.empty(model.dim)
    backward = np.empty(model.dim)
    for i in range(model.dim):
        offset = np.zeros(model.dim)
        offset[i] = step
        forward[i] = (model.hamiltonian(x + offset, p) - centre) / step
        backward[i] = (centre - model.hamiltonian(x - offset, p)) / step
    return forward, backward


def check_support_properties(
    model: InclusionModel,
    box: Box,
    samples: int = 1000,
    seed: int = 0,
) -> SupportReport:
    lower, upper = _check_box(box, model.dim)
    rng = SplitMix64(seed)
    report = SupportReport()

    for _ in range(samples):
        x = rng.in_box(lower, upper)
        p = rng.direction(model.dim) * rng.uniform(0.1, 10.0)
        q = rng.direction(model.dim) * rng.uniform(0.1, 10.0)
        h = model.hamiltonian(x, p)
        scale = 1.0 + abs(h)

        for alpha in HOMOGENEITY_FACTORS:
            scaled = model.hamiltonian(x, alpha * p) if alpha else 0.0
            report.homogeneity.record(abs(scaled - alpha * h) / scale, x, p)

        excess = model.hamiltonian(x, p + q) - h - model.hamiltonian(x, q)
        report.subadditivity.record(max(excess, 0.0) / scale, x, p)

        v = model.argmax(x, p)
        report.consistency.record(abs(float(np.dot(v, p)) - h) / scale, x, p)

        for w in model.sampler(x, SAMPLER_POINTS):
            report.domination.record(max(float(np.dot(w, p)) - h, 0.0) / scale, x, p)

    for check in (
        report.homogeneity,
        report.subadditivity,
        report.consistency,
        report.domination,
    ):
        check.samples = samples

    return report


def estimate_constants(
    model: InclusionModel,
    box: Box,
    samples: int = 1000,
    seed: int = 0,
) -> Constants:
    """Sampled lower estimates of K, c0, K1 and K2 over ``box``.

    Draws are consumed sequentially, one fixed-size tuple per sample, so a run
    with more samples extends a run with fewer. The first sample is anchored at
    the box centre. Constants that ``model.constants`` marks as provided are
    validated against the estimate and kept.
    """

    if samples < MIN_ESTIMATE_SAMPLES:
        raise InputError(
            f"samples must be at least {MIN_ESTIMATE_SAMPLES}, got {samples}.", param="samples"
        )
    lower, upper = _check_box(box, model.dim)
    centre = 0.5 * (lower + upper)
    reach = 0.25 * float(np.min(upper - lower))
    rng = SplitMix64(seed)

    estimates = dict.fromkeys(CONSTANT_NAMES, 0.0)
    valid = 0

    for index in range(samples):
        x = rng.in_box(lower, upper)
        y = rng.in_box(lower, upper)
        p = rng.direction(model.dim)
        z = rng.direction(model.dim) * rng.uniform(0.01, 1.0) * reach
        if index == 0:
            x = centre

        distance = float(np.linalg.norm(y - x))
        if distance > 1e-12:
            valid += 1
            gap = abs(model.hamiltonian(y, p) - model.hamiltonian(x, p))
            estimates["K"] = max(estimates["K"], gap / distance)
            jump = float(np.linalg.norm(model.argmax(x, p) - model.argmax(y, p)))
            estimates["K1"] = max(estimates["K1"], jump / distance)

        second = (
            model.hamiltonian(x + z, p)
            + model.hamiltonian(x - z, p)
            - 2.0 * model.hamiltonian(x, p)
        )
        estimates["c0"] = max(estimates["c0"], -second / float(np.dot(z, z)))

        growth = 1.0 + float(np.linalg.norm(x))
        for v in model.sampler(x, SAMPLER_POINTS):
            estimates["K2"] = max(estimates["K2"], float(np.linalg.norm(v)) / growth)

    if valid == 0:
        raise EstimationError("sampling produced no valid pair of distinct points.")

    declared = model.constants
    values: dict[str, float] = {}
    sources = {}
    for name in CONSTANT_NAMES:
        estimate = estimates[name]
        if declared.source_of(name) == "provided":
            provided = getattr(declared, name)
            if estimate > ESTIMATE_MARGIN * provided + 1e-12:
                raise ConstantsValidationError(
                    f"sampled {name} = {estimate:.6g} exceeds the provided value "
                    f"{provided:.6g} by more than 1%.",
                    param=name,
                )
            values[name] = provided
            sources[name] = "provided"
        else:
            values[name] = estimate
            sources[name] = "estimated"

    if declared.R is not None:
        sources["R"] = declared.source_of("R")

    logger.info(
        "Estimated constants over %d samples: K=%.6g K1=%.6g K2=%.6g c0=%.6g",
        samples,
        estimates["K"],
        estimates["K1"],
        estimates["K2"],
        estimates["c0"],
    )
    return Constants(R=declared.R, sources=sources, **values)


def check_subgradient_inequality(
    model: InclusionModel,
    box: Box,
    c0: float,
    samples: int = 1000,
    seed: int = 0,
) -> PropertyCheck:
    """H(y,p) - H(x,p) - <xi, y-x> >= -c0 |p| |y-x|^2 with xi the FD selection."""

    lower, upper = _check_box(box, model.dim)
    rng = SplitMix64(seed)
    check = PropertyCheck(samples=samples)

    for _ in range(samples):
        x = rng.in_box(lower, upper)
        y = rng.in_box(lower, upper)
        p = rng.direction(model.dim)
        xi = grad_x_hamiltonian(model, x, p)
        d = y - x
        slack = (
            model.hamiltonian(y, p)
            - model.hamiltonian(x, p)
            - float(np.dot(xi, d))
            + c0 * float(np.dot(d, d))
        )
        check.record(max(-slack, 0.0), x, p)

    return check


def check_petrov(
    model: InclusionModel,
    target: TargetSet,
    boundary_samples: Iterable[Vector],
    normal_oracle: Callable[[Vector], Vector] | None = None,
) -> PetrovReport:
    """Smallest sampled H(x, -nu/|nu|) with nu the outward normal of S at x."""

    oracle = normal_oracle or target.normal_at
    mu_min = math.inf
    worst: Vector | None = None
    count = 0

    for point in boundary_samples:
        x = as_vector(point, model.dim)
        nu = np.asarray(oracle(x), dtype=float)
        if not np.any(nu):
            continue
        mu = float(model.hamiltonian(x, -unit(nu)))
        count += 1
        if mu < mu_min:
            mu_min = mu
            worst = x

    if worst is None:
        raise EmptyBoundaryError("no target boundary points to test.")

    if mu_min <= 0.0:
        logger.warning("Petrov condition fails on the sample: mu_min=%.6g", mu_min)
    return PetrovReport(mu_min=mu_min, worst_point=worst, count=count)


def check_c1_criterion(
    model: InclusionModel,
    x: Vector,
    p: Vector,
    fd_step: float | None = None,
) -> C1Verdict:
    x = as_vector(x, model.dim, name="x")
    p = as_vector(p, model.dim, name="p")
    step = fd_step or _fd_step(x)

    h_plus = model.hamiltonian(x, p)
    h_minus = model.hamiltonian(x, -p)
    applicable = abs(h_plus + h_minus) <= 1e-9 * (1.0 + abs(h_plus))

    left = grad_x_hamiltonian(model, x, -p, step)
    right = grad_x_hamiltonian(model, x, p, step)
    left_hull = np.sort(np.stack(one_sided_grad_x_hamiltonian(model, x, -p, step), axis=1))
    right_hull = np.sort(np.stack(one_sided_grad_x_hamiltonian(model, x, p, step), axis=1))

    if not applicable:
        return C1Verdict(False, False, left, right, left_hull, right_hull)

    tol = 1e-4 * (1.0 + float(np.max(np.abs(np.concatenate([left_hull, right_hull])))))
    mirrored = -right_hull[:, ::-1]
    holds = bool(np.all(np.abs(left_hull - mirrored) <= tol))
    return C1Verdict(True, holds, left, right, left_hull, right_hull)


def sample_target_boundary(target: TargetSet, grid: Grid) -> np.ndarray:
    """Boundary nodes of S on ``grid``, moved onto the zero level by one Newton step."""

    points = grid.points()
    values = np.asarray(target.indicator(points), dtype=float)
    mask = grid.boundary_mask((values <= 0.0).reshape(grid.shape)).reshape(-1)
    nodes = points[mask]
    if len(nodes) == 0:
        raise EmptyBoundaryError("target boundary does not cross the grid.")

    projected = []
    for node in nodes:
        step = _fd_step(node)
        offsets = np.eye(target.dim) * step
        grad = (
            np.asarray(target.indicator(node + offsets))
            - np.asarray(target.indicator(node - offsets))
        ) / (2.0 * step)
        norm2 = float(np.dot(grad, grad))
        if norm2 == 0.0 or not math.isfinite(norm2):
            projected.append(node)
            continue
        projected.append(node - target.value(node) * grad / norm2)
    return np.asarray(projected)
