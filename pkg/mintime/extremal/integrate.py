from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from mintime.core.errors import InputError
from mintime.core.types import Vector, as_vector, unit
from mintime.model.errors import DegenerateCovectorError
from mintime.model.hypotheses import grad_x_hamiltonian, one_sided_grad_x_hamiltonian
from mintime.model.inclusion import Constants, InclusionModel

from .arcs import ExtremalArc, FlowPath, TransportArc
from .errors import IntegrationDiagnosticError

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_TOL = 1e-6
KINK_RATIO = 10.0
KINK_FLOOR = 1e-4
MAX_BOUND_SAMPLES = 400

CovectorPath = Callable[[float], Vector]


@dataclass(slots=True)
class GrowthReport:
    norm_slack: float
    displacement_slack: float
    exponential_slack: float
    holds: bool


@dataclass(slots=True)
class AdjointBoundReport:
    sandwich_violation: float
    increment_violation: float
    nonzero: bool
    holds: bool


@dataclass(slots=True)
class FlowLipschitzReport:
    max_ratio_excess: float
    holds: bool


def _rk4_step(
    f: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    dt: float,
) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _time_steps(horizon: float, dt: float) -> tuple[int, float]:
    if dt <= 0.0 or not math.isfinite(dt):
        raise InputError("dt must be positive.", param="dt")
    if horizon < 0.0 or not math.isfinite(horizon):
        raise InputError("horizon must be finite and nonnegative.", param="horizon")
    if horizon == 0.0:
        return 0, 0.0
    steps = max(1, math.ceil(horizon / dt - 1e-9))
    return steps, horizon / steps


def rho_of_s(constants: Constants, rho0: float, s: float) -> float:
    """Inner radius of the sublevel set carried along an arc of length s."""

    if not (math.isfinite(rho0) and rho0 > 0.0):
        raise InputError("rho0 must be positive.", param="rho0")
    if not (math.isfinite(s) and s >= 0.0):
        raise InputError("s must be finite and nonnegative.", param="s")
    return (
        rho0
        / (1.0 + 2.0 * constants.c0 * rho0 * s)
        * math.exp(-(constants.K + 2.0 * constants.K1) * s)
    )


def integrate_frozen_flow(
    model: InclusionModel,
    p_arc: CovectorPath | Vector,
    x0: Vector,
    horizon: float,
    dt: float = DEFAULT_DT,
    box: tuple[Vector, Vector] | None = None,
) -> FlowPath:
    """RK4 solution of x' = F_{p(t)}(x) from x0; stops early on leaving ``box``."""

    x0 = as_vector(x0, model.dim, name="x0")
    if callable(p_arc):
        covector = p_arc
    else:
        frozen = as_vector(p_arc, model.dim, name="p")
        covector = lambda _t: frozen  # noqa: E731

    def p_of(t: float) -> Vector:
        p = np.asarray(covector(t), dtype=float)
        if not np.any(p):
            raise DegenerateCovectorError(f"covector path vanishes at t={t:.6g}.")
        return p

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return np.asarray(model.argmax(x, p_of(t)), dtype=float)

    steps, step = _time_steps(horizon, dt)
    times = [0.0]
    states = [x0]
    covectors = [p_of(0.0)]
    escaped = False

    x = x0
    for k in range(steps):
        t = k * step
        x = _rk4_step(rhs, t, x, step)
        times.append((k + 1) * step)
        states.append(x)
        covectors.append(p_of((k + 1) * step))
        if box is not None and (np.any(x < box[0]) or np.any(x > box[1])):
            escaped = True
            logger.debug("Frozen flow left the domain box at t=%.6g", times[-1])
            break

    return FlowPath(
        times=np.asarray(times),
        states=np.asarray(states),
        covectors=np.asarray(covectors),
        escaped=escaped,
    )


def _extremal_rhs(model: InclusionModel) -> Callable[[float, np.ndarray], np.ndarray]:
    n = model.dim

    def rhs(_s: float, y: np.ndarray) -> np.ndarray:
        x, p = y[:n], y[n:]
        if not np.any(p):
            raise DegenerateCovectorError("adjoint vanished during integration.")
        velocity = -np.asarray(model.argmax(x, -p), dtype=float)
        rate = -grad_x_hamiltonian(model, x, -p)
        return np.concatenate([velocity, rate])

    return rhs


def _is_kink(model: InclusionModel, x: Vector, p: Vector) -> bool:
    forward, backward = one_sided_grad_x_hamiltonian(model, x, -p)
    central = 0.5 * (forward + backward)
    gap = float(np.max(np.abs(forward - backward)))
    return gap > KINK_RATIO * float(np.linalg.norm(central)) + KINK_FLOOR


def _check_gronwall(times: np.ndarray, adjoints: np.ndarray, K: float, tol: float) -> None:
    norms = np.linalg.norm(adjoints, axis=1)
    base = norms[0]
    lower = np.exp(-K * times) * base * (1.0 - tol)
    upper = np.exp(K * times) * base * (1.0 + tol)
    bad = np.flatnonzero((norms < lower) | (norms > upper))
    if bad.size:
        j = int(bad[0])
        raise IntegrationDiagnosticError(
            f"adjoint magnitude {norms[j]:.12g} at s={times[j]:.6g} leaves the Gronwall "
            f"band [{lower[j]:.12g}, {upper[j]:.12g}]; K may be underestimated.",
            param="K",
        )


def _assemble_arc(
    model: InclusionModel,
    times: np.ndarray,
    states: np.ndarray,
    adjoints: np.ndarray,
    constants: Constants,
    rho0: float | None,
) -> ExtremalArc:
    rhs = _extremal_rhs(model)
    n = model.dim
    rates = np.asarray(
        [rhs(0.0, np.concatenate([x, p]))[n:] for x, p in zip(states, adjoints)]
    )
    kinks = tuple(
        j for j in range(len(times)) if _is_kink(model, states[j], adjoints[j])
    )
    if kinks:
        logger.debug("Arc crosses %d kink samples of d_x H", len(kinks))
    rho = None
    if rho0 is not None:
        rho = np.asarray([rho_of_s(constants, rho0, float(s)) for s in times])
    lam = float(model.hamiltonian(states[-1], -adjoints[-1]))
    return ExtremalArc(
        times=times,
        states=states,
        adjoints=adjoints,
        lam=lam,
        rates=rates,
        kinks=kinks,
        rho=rho,
    )


def shoot_extremal(
    model: InclusionModel,
    x_terminal: Vector,
    nu: Vector,
    r: float,
    dt: float = DEFAULT_DT,
    rho0: float | None = None,
    constants: Constants | None = None,
    tol: float = DEFAULT_TOL,
) -> ExtremalArc:
    """Integrate the extremal system from a target point x1 for time r.

    ``nu`` is the normal to S at x1 pointing out of S, into the region where
    T > 0; it is normalized and the adjoint starts at p(0) = nu. The state runs
    x' = -F_{-p}(x), p' = -d_x H(x, -p), so the arc moves away from S.

    For S the complement of the unit disk, x1 = (1, 0) takes nu = (-1, 0) and
    the unit-ball arc ends at x(r) = (1 - r, 0). For the nonsmooth planar
    example at x1 = (1, -0.5), nu = (-1, 0) gives x(r) = (1 - r, -0.5) and
    lambda = H(x(r), -p(r)) = 1.
    """

    x1 = as_vector(x_terminal, model.dim, name="x_terminal")
    nu = as_vector(nu, model.dim, name="nu")
    if float(np.linalg.norm(nu)) < 1e-12:
        raise DegenerateCovectorError("normal vector vanishes.", param="nu")
    nu = unit(nu)
    constants = constants or model.constants

    steps, step = _time_steps(float(r), dt)
    rhs = _extremal_rhs(model)
    n = model.dim

    y = np.concatenate([x1, nu])
    trajectory = [y]
    for k in range(steps):
        y = _rk4_step(rhs, k * step, y, step)
        trajectory.append(y)

    trajectory_arr = np.asarray(trajectory)
    times = np.arange(steps + 1) * step
    states = trajectory_arr[:, :n]
    adjoints = trajectory_arr[:, n:]
    _check_gronwall(times, adjoints, constants.K, tol)

    arc = _assemble_arc(model, times, states, adjoints, constants, rho0)
    logger.debug(
        "Shot extremal from %s for r=%.6g: end %s, lambda=%.6g",
        x1.tolist(),
        float(r),
        arc.terminal_state.tolist(),
        arc.lam,
    )
    return arc


def shoot_from_terminal(
    model: InclusionModel,
    x_bar: Vector,
    p_terminal: Vector,
    horizon: float,
    dt: float = DEFAULT_DT,
    constants: Constants | None = None,
    tol: float = DEFAULT_TOL,
) -> ExtremalArc:
    """The extremal system integrated from its s = horizon end back to s = 0."""

    x_bar = as_vector(x_bar, model.dim, name="x_bar")
    p_terminal = as_vector(p_terminal, model.dim, name="p_terminal")
    if float(np.linalg.norm(p_terminal)) < 1e-12:
        raise DegenerateCovectorError("terminal covector vanishes.", param="p_terminal")
    constants = constants or model.constants

    steps, step = _time_steps(float(horizon), dt)
    rhs = _extremal_rhs(model)
    n = model.dim

    y = np.concatenate([x_bar, p_terminal])
    backward = [y]
    for k in range(steps):
        y = _rk4_step(rhs, float(horizon) - k * step, y, -step)
        backward.append(y)

    trajectory = np.asarray(backward[::-1])
    times = np.arange(steps + 1) * step
    states = trajectory[:, :n]
    adjoints = trajectory[:, n:]
    # Gronwall band measured from the terminal end.
    _check_gronwall(times[::-1][0] - times[::-1], adjoints[::-1], constants.K, tol)
    return _assemble_arc(model, times, states, adjoints, constants, None)


def transport_adjoint(
    arc: ExtremalArc,
    theta: Vector,
    dt: float = DEFAULT_DT,
    r0: float | None = None,
    tol: float = DEFAULT_TOL,
) -> TransportArc:
    """Backward solution of z' = -<p', z>/|p|^2 p with z(T) = p(T)/|p(T)| - theta.

    The adjoint is taken piecewise linear between arc samples, so <z, p> is
    conserved up to integration error.
    """

    theta = as_vector(theta, arc.dim, name="theta")
    if float(np.linalg.norm(theta)) >= 1.0:
        raise InputError("theta must lie in the open unit ball.", param="theta")
    if dt <= 0.0:
        raise InputError("dt must be positive.", param="dt")

    times = arc.times
    z = unit(arc.terminal_adjoint) - theta
    invariant = float(np.dot(z, arc.terminal_adjoint))
    scale = 1.0 + float(np.linalg.norm(z)) * float(np.linalg.norm(arc.terminal_adjoint))

    values = [z]
    for j in range(len(times) - 1, 0, -1):
        s_hi, s_lo = float(times[j]), float(times[j - 1])
        p_hi = arc.adjoints[j]
        rate = (arc.adjoints[j] - arc.adjoints[j - 1]) / (s_hi - s_lo)

        def rhs(s: float, zz: np.ndarray, p_hi=p_hi, rate=rate, s_hi=s_hi) -> np.ndarray:
            p = p_hi + (s - s_hi) * rate
            return -float(np.dot(rate, zz)) / float(np.dot(p, p)) * p

        substeps = max(1, math.ceil((s_hi - s_lo) / dt - 1e-9))
        width = (s_hi - s_lo) / substeps
        for k in range(substeps):
            z = _rk4_step(rhs, s_hi - k * width, z, -width)
        values.append(z)

        drift = abs(float(np.dot(z, arc.adjoints[j - 1])) - invariant)
        if drift > tol * scale:
            raise IntegrationDiagnosticError(
                f"<z, p> drifted by {drift:.3g} at s={s_lo:.6g} during adjoint transport.",
                param="theta",
            )

    return TransportArc(
        times=times.copy(),
        z_values=np.asarray(values[::-1]),
        theta=theta,
        r0=r0,
    )


def verify_growth_bounds(
    model: InclusionModel,
    trajectory: FlowPath,
    K2: float | None = None,
    tol: float = DEFAULT_TOL,
) -> GrowthReport:
    """|y(t)| and |y(t) - x0| against the linear-growth envelopes."""

    K2 = model.constants.K2 if K2 is None else K2
    times = trajectory.times
    states = trajectory.states
    x0 = states[0]
    base = float(np.linalg.norm(x0)) + 1.0
    grow = np.exp(K2 * times)

    norm_bound = base * grow - 1.0
    displacement_bound = base * (grow - 1.0)
    norms = np.linalg.norm(states, axis=1)
    displacements = np.linalg.norm(states - x0, axis=1)

    norm_slack = float(np.min(norm_bound - norms + tol * (1.0 + norm_bound)))
    displacement_slack = float(
        np.min(displacement_bound - displacements + tol * (1.0 + displacement_bound))
    )
    exponential_slack = float(np.min(K2 * times * grow - (grow - 1.0)))
    holds = norm_slack >= 0.0 and displacement_slack >= 0.0 and exponential_slack >= -tol
    if not holds:
        logger.warning(
            "Growth bound violated (norm slack %.3g, displacement slack %.3g); check K2",
            norm_slack,
            displacement_slack,
        )
    return GrowthReport(
        norm_slack=norm_slack,
        displacement_slack=displacement_slack,
        exponential_slack=exponential_slack,
        holds=holds,
    )


def verify_adjoint_bounds(
    arc: ExtremalArc,
    K: float,
    tol: float = DEFAULT_TOL,
) -> AdjointBoundReport:
    """Gronwall sandwich and increment bound over all sample pairs, relative to |p(t2)|."""

    count = len(arc.times)
    index = np.unique(np.linspace(0, count - 1, min(count, MAX_BOUND_SAMPLES)).astype(int))
    times = arc.times[index]
    adjoints = arc.adjoints[index]
    norms = np.linalg.norm(adjoints, axis=1)
    nonzero = bool(np.all(norms > 0.0))
    if not nonzero:
        return AdjointBoundReport(math.inf, math.inf, False, False)

    i, j = np.triu_indices(len(index), k=1)
    gap = times[j] - times[i]
    early, late = norms[i], norms[j]
    sandwich = np.maximum(np.exp(-K * gap) * late - early, early - np.exp(K * gap) * late)
    increment = np.linalg.norm(adjoints[j] - adjoints[i], axis=1) - K * np.exp(K * gap) * gap * late

    sandwich_violation = float(np.max(sandwich / late, initial=0.0))
    increment_violation = float(np.max(increment / late, initial=0.0))
    holds = sandwich_violation <= tol and increment_violation <= tol
    return AdjointBoundReport(
        sandwich_violation=sandwich_violation,
        increment_violation=increment_violation,
        nonzero=nonzero,
        holds=holds,
    )


def check_flow_lipschitz(
    path_a: FlowPath,
    path_b: FlowPath,
    K1: float,
    tol: float = DEFAULT_TOL,
) -> FlowLipschitzReport:
    """|y(t, z0) - y(t, x0)| <= e^{K1 t} |z0 - x0| along two frozen flows."""

    count = min(len(path_a.times), len(path_b.times))
    times = path_a.times[:count]
    separation = np.linalg.norm(path_a.states[:count] - path_b.states[:count], axis=1)
    initial = float(separation[0])
    bound = np.exp(K1 * times) * initial * (1.0 + tol) + 1e-12
    excess = float(np.max(separation - bound))
    return FlowLipschitzReport(max_ratio_excess=excess, holds=excess <= 0.0)
