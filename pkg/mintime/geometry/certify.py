from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from mintime.core.errors import InputError, MintimeError
from mintime.core.rng import SplitMix64
from mintime.core.types import Vector, unit
from mintime.extremal.arcs import ExtremalArc
from mintime.extremal.integrate import (
    rho_of_s,
    shoot_extremal,
    shoot_from_terminal,
    transport_adjoint,
)
from mintime.model.errors import EmptyBoundaryError
from mintime.model.hypotheses import eval_hamiltonian
from mintime.model.inclusion import Constants, InclusionModel, TargetSet
from mintime.solver.grid import ScalarField
from mintime.solver.sweeping import backtrack_trajectory, local_lipschitz

from .formulas import R_of_T, rho_T_of
from .proximal import SphereCertificate, check_realized_by_ball, failed_certificate

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class HypographOptions:
    samples: int = 500
    seed: int = 0
    dt: float = 5e-3
    ladder_rungs: int = 5
    ladder_cells: float = 5.0
    velocity_samples: int = 32


@dataclass(frozen=True, slots=True)
class AttainableOptions:
    samples: int = 200
    seed: int = 0
    dt: float = 5e-3
    slack_cells: float = 6.0
    constructive_points: int = 10
    theta_samples: int = 100
    key3_slack: float = 1e-6
    radius_scale: float = 1.0


@dataclass(slots=True)
class ConstructiveRecord:
    base: Vector
    theta: Vector
    key3_margin: float
    endpoint: Vector
    endpoint_value: float
    passed: bool


@dataclass(slots=True)
class AttainableReport:
    r0: float
    horizon: float
    certificates: list[SphereCertificate] = field(default_factory=list)
    constructive: list[ConstructiveRecord] = field(default_factory=list)

    @property
    def passed_count(self) -> int:
        return sum(1 for c in self.certificates if c.passed)

    @property
    def constructive_passed(self) -> int:
        return sum(1 for c in self.constructive if c.passed)


def verification_slack(h: float, slope: float) -> float:
    """eps(h) = 2h (1 + L) with L clamped at 1/h."""

    return 2.0 * h * (1.0 + min(slope, 1.0 / h))


def hypograph_points(
    field_: ScalarField,
    mask: np.ndarray,
    rungs: int = 5,
    step: float | None = None,
) -> np.ndarray:
    """(y, T(y)) for masked nodes y plus the ladder (y, T(y) - k step), k = 1..rungs."""

    step = 5.0 * field_.grid.h if step is None else step
    keep = np.asarray(mask, dtype=bool).reshape(-1)
    nodes = field_.grid.points()[keep]
    values = field_.flat[keep]
    layers = [np.column_stack([nodes, values - k * step]) for k in range(rungs + 1)]
    return np.vstack(layers)


def _sample_nodes(mask: np.ndarray, samples: int, seed: int) -> np.ndarray:
    candidates = np.flatnonzero(np.asarray(mask, dtype=bool).reshape(-1))
    if len(candidates) == 0:
        raise EmptyBoundaryError("no grid nodes to certify.")
    rng = SplitMix64(seed)
    return candidates[rng.sample_indices(len(candidates), samples)]


def certify_hypograph_exterior_sphere(
    field_: ScalarField,
    mask: np.ndarray,
    model: InclusionModel,
    target: TargetSet,
    constants: Constants,
    rho0: float,
    options: HypographOptions | None = None,
) -> list[SphereCertificate]:
    """Exterior sphere certificates of hypo(T) at sampled masked nodes.

    Per node: backtrack an optimal path to S, shoot the extremal arc from its
    end for time r = T(x), take the normal (-p(r), lam) with
    lam = H(x, -p(r)) and scan the discrete hypograph at radius rho_T.
    """

    options = options or HypographOptions()
    grid = field_.grid
    h = grid.h
    slopes = local_lipschitz(field_).reshape(-1)
    scan = hypograph_points(field_, mask, options.ladder_rungs, options.ladder_cells * h)
    certificates: list[SphereCertificate] = []

    for index in _sample_nodes(mask, options.samples, options.seed):
        x_bar = grid.points()[index]
        r = float(field_.flat[index])
        base = np.append(x_bar, r)
        slack = verification_slack(h, float(slopes[index]))
        radius = rho_T_of(x_bar, r, constants, rho0)

        path = backtrack_trajectory(
            field_,
            model,
            target,
            x_bar,
            velocity_samples=options.velocity_samples,
        )
        if not path.reached:
            certificates.append(failed_certificate(base, radius, slack, "backtrack_failed"))
            continue

        try:
            arc = shoot_extremal(
                model,
                path.terminal,
                target.normal_at(path.terminal),
                r,
                dt=options.dt,
                rho0=rho0,
                constants=constants,
            )
        except MintimeError as exc:
            certificates.append(failed_certificate(base, radius, slack, exc.code))
            continue

        p_r = arc.terminal_adjoint
        lam = eval_hamiltonian(model, x_bar, -p_r)
        normal = unit(np.append(-p_r, lam))
        certificate = check_realized_by_ball(scan, base, normal, radius, slack)
        if not certificate.passed:
            logger.warning(
                "Hypograph certificate fails at %s: residual %.3g > slack %.3g",
                x_bar.tolist(),
                certificate.sigma_residual,
                slack,
            )
        certificates.append(certificate)

    passed = sum(1 for c in certificates if c.passed)
    logger.info("Hypograph certificates: %d/%d pass", passed, len(certificates))
    return certificates


def check_sublevel_normal(
    field_: ScalarField,
    mask: np.ndarray,
    arc: ExtremalArc,
    t: float,
    constants: Constants,
    rho0: float,
    slack: float = 0.0,
) -> SphereCertificate:
    """-p(s)/|p(s)| at x(s), s = r - t, against masked nodes of S'(s) = {T >= s}."""

    s = arc.horizon - t
    if s < 0.0:
        raise InputError("t exceeds the arc horizon.", param="t")
    x = arc.state_at(s)
    p = arc.adjoint_at(s)
    keep = np.asarray(mask, dtype=bool).reshape(-1) & (field_.flat >= s)
    points = np.vstack([field_.grid.points()[keep], x[None, :]])
    return check_realized_by_ball(points, x, -p, rho_of_s(constants, rho0, s), slack)


def _outward_normal(field_: ScalarField, x: Vector) -> Vector:
    offsets = np.eye(field_.grid.dim) * field_.grid.spacing
    grad = (field_.interpolate(x + offsets) - field_.interpolate(x - offsets)) / (
        2.0 * field_.grid.spacing
    )
    return grad


def _constructive_check(
    model: InclusionModel,
    field_: ScalarField,
    arc: ExtremalArc,
    theta: Vector,
    r0: float,
    R: float,
    horizon: float,
    options: AttainableOptions,
    tolerance: float,
) -> ConstructiveRecord:
    """Follow y(s) = x(s) - r0 s z(s) and test the inner-ball inequality for -y'."""

    transport = transport_adjoint(arc, theta, dt=options.dt, r0=r0)
    margin = math.inf
    for j, s in enumerate(arc.times):
        x, p, rate = arc.states[j], arc.adjoints[j], arc.rates[j]
        z = transport.z_values[j]
        dz = -float(np.dot(rate, z)) / float(np.dot(p, p)) * p
        dx = -np.asarray(model.argmax(x, -p), dtype=float)
        y = x - r0 * s * z
        dy = dx - r0 * z - r0 * s * dz
        w = dy + np.asarray(model.argmax(y, -p), dtype=float)
        gap = float(np.dot(-unit(p), w)) - float(np.dot(w, w)) / (2.0 * R)
        margin = min(margin, gap)

    endpoint = arc.states[-1] - r0 * horizon * transport.z_values[-1]
    value = field_.value_at(endpoint)
    passed = margin >= -options.key3_slack and value <= horizon + tolerance
    return ConstructiveRecord(
        base=arc.states[-1],
        theta=theta,
        key3_margin=margin,
        endpoint=endpoint,
        endpoint_value=value,
        passed=passed,
    )


def certify_attainable_inner_ball(
    model: InclusionModel,
    field_rev: ScalarField,
    T: float,
    constants: Constants,
    R: float,
    options: AttainableOptions | None = None,
) -> AttainableReport:
    """Inner balls of A(T) = {T_rev <= T} at sampled boundary nodes.

    The ball B(x - r0 T p/|p|, r0 T (1 - slack)) is tested against the grid
    nodes outside A(T), with p the outward normal of A(T) at x. The first
    ``constructive_points`` nodes also get the transported-trajectory check
    for ``theta_samples`` seeded theta in the unit ball.
    """

    options = options or AttainableOptions()
    r0 = R_of_T(constants, R, T)
    if r0 is None:
        raise InputError(
            f"R(T) is undefined at T={T}: exp(-3KT) <= 2 c0 R T^2.",
            param="verify.horizon",
        )

    grid = field_rev.grid
    h = grid.h
    inside = field_rev.values <= T
    boundary = grid.boundary_mask(inside)
    outside_points = grid.points()[~inside.reshape(-1)]
    if len(outside_points) == 0:
        raise EmptyBoundaryError("A(T) covers the whole grid; enlarge the box.")

    ball = r0 * T
    slack = min(options.slack_cells * h / ball, 0.5)
    radius = options.radius_scale * ball * (1.0 - slack)
    slopes = local_lipschitz(field_rev).reshape(-1)
    rng = SplitMix64(options.seed + 1)
    report = AttainableReport(r0=r0, horizon=T)

    for count, index in enumerate(_sample_nodes(boundary, options.samples, options.seed)):
        x_bar = grid.points()[index]
        grad = _outward_normal(field_rev, x_bar)
        if float(np.linalg.norm(grad)) == 0.0:
            report.certificates.append(failed_certificate(x_bar, radius, 0.0, "flat_normal"))
            continue
        p_hat = unit(grad)

        center = x_bar - ball * p_hat
        if np.any(center - radius < grid.lower_array) or np.any(center + radius > grid.upper_array):
            report.certificates.append(failed_certificate(x_bar, radius, 0.0, "ball_leaves_grid"))
            continue

        # B(center, radius) avoids every outside node iff the proximal inequality
        # holds at its tangent point center + radius p_hat.
        tangent = center + radius * p_hat
        certificate = check_realized_by_ball(outside_points, tangent, -p_hat, radius, 0.0)
        report.certificates.append(certificate)

        if count >= options.constructive_points:
            continue
        try:
            arc = shoot_from_terminal(model, x_bar, p_hat, T, dt=options.dt, constants=constants)
        except MintimeError as exc:
            logger.warning("Reverse shot from %s failed: %s", x_bar.tolist(), exc)
            continue
        tolerance = verification_slack(h, float(slopes[index]))
        for _ in range(options.theta_samples):
            theta = rng.in_ball(grid.dim)
            try:
                record = _constructive_check(
                    model, field_rev, arc, theta, r0, R, T, options, tolerance
                )
            except MintimeError as exc:
                logger.warning("Adjoint transport failed at %s: %s", x_bar.tolist(), exc)
                continue
            report.constructive.append(record)

    logger.info(
        "Attainable inner balls: %d/%d pass, constructive %d/%d (r0=%.6g)",
        report.passed_count,
        len(report.certificates),
        report.constructive_passed,
        len(report.constructive),
        r0,
    )
    return report
