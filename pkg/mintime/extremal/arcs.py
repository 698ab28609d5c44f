from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mintime.core.formatting import write_csv
from mintime.core.types import Vector


@dataclass(frozen=True)
class ExtremalArc:
    """Samples of (x(s), p(s)) on [0, r] plus lam = H(x(r), -p(r)).

    ``rates`` holds dp/ds per sample, ``kinks`` the indices of steps where the
    one-sided x-derivatives of H disagree, ``rho`` the inner radius rho(s) when
    the target radius is known.
    """

    times: np.ndarray
    states: np.ndarray
    adjoints: np.ndarray
    lam: float
    rates: np.ndarray
    kinks: tuple[int, ...] = ()
    rho: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def terminal_state(self) -> Vector:
        return self.states[-1]

    @property
    def terminal_adjoint(self) -> Vector:
        return self.adjoints[-1]

    def state_at(self, s: float) -> Vector:
        return _interp_rows(self.times, self.states, s)

    def adjoint_at(self, s: float) -> Vector:
        return _interp_rows(self.times, self.adjoints, s)

    def segment_rate(self, s: float) -> Vector:
        """Slope of the piecewise-linear adjoint on the segment containing ``s``."""

        if len(self.times) < 2:
            return np.zeros(self.dim)
        j = int(np.clip(np.searchsorted(self.times, s, side="right") - 1, 0, len(self.times) - 2))
        width = self.times[j + 1] - self.times[j]
        return (self.adjoints[j + 1] - self.adjoints[j]) / width


@dataclass(frozen=True)
class TransportArc:
    times: np.ndarray
    z_values: np.ndarray
    theta: Vector
    r0: float | None = None

    def z_at(self, s: float) -> Vector:
        return _interp_rows(self.times, self.z_values, s)


@dataclass(frozen=True)
class FlowPath:
    """Solution of x' = F_{p(t)}(x); ``escaped`` marks an exit from the domain box."""

    times: np.ndarray
    states: np.ndarray
    covectors: np.ndarray
    escaped: bool = False

    @property
    def endpoint(self) -> Vector:
        return self.states[-1]


def _interp_rows(times: np.ndarray, rows: np.ndarray, s: float) -> Vector:
    return np.array([np.interp(s, times, rows[:, i]) for i in range(rows.shape[1])])


def _header(dim: int) -> list[str]:
    return ["s", *(f"x{i + 1}" for i in range(dim)), *(f"p{i + 1}" for i in range(dim))]


def arc_to_csv(arc: ExtremalArc, path: Path) -> Path:
    rows = np.column_stack([arc.times, arc.states, arc.adjoints])
    return write_csv(path, _header(arc.dim), rows)


def flow_to_csv(flow: FlowPath, path: Path) -> Path:
    rows = np.column_stack([flow.times, flow.states, flow.covectors])
    return write_csv(path, _header(flow.states.shape[1]), rows)
