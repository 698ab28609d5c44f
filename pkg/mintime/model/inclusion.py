from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Literal

import numpy as np

from mintime.core.errors import InputError
from mintime.core.types import Hamiltonian, Sampler, Selector, Vector, unit

ConstantSource = Literal["provided", "estimated"]
CONSTANT_NAMES = ("K", "K1", "K2", "c0")

VertexField = Callable[[Vector], np.ndarray]
Indicator = Callable[[np.ndarray], np.ndarray]
NormalField = Callable[[Vector], Vector]


@dataclass(frozen=True, slots=True)
class Constants:
    """Regularity constants of the inclusion.

    K bounds the Lipschitz constant of F, K1 that of the argmax selection, K2 the
    linear growth of F, c0 the semiconvexity of H in x, and R the radius of an
    inner ball of F.
    """

    K: float = 0.0
    K1: float = 0.0
    K2: float = 0.0
    c0: float = 0.0
    R: float | None = None
    sources: dict[str, ConstantSource] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in CONSTANT_NAMES:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise InputError(
                    f"constant {name} must be finite and nonnegative, got {value}.",
                    param=name,
                )
        if self.R is not None and not (math.isfinite(self.R) and self.R > 0.0):
            raise InputError(f"constant R must be positive, got {self.R}.", param="R")

    @classmethod
    def provided(cls, R: float | None = None, **values: float) -> Constants:
        """Constants declared by the user; unnamed ones stay open to estimation."""

        sources: dict[str, ConstantSource] = {name: "provided" for name in values}
        if R is not None:
            sources["R"] = "provided"
        return cls(R=R, sources=sources, **values)

    def source_of(self, name: str) -> ConstantSource:
        return self.sources.get(name, "estimated")

    def to_record(self) -> dict[str, Any]:
        record: dict[str, Any] = {name: getattr(self, name) for name in CONSTANT_NAMES}
        record["R"] = self.R
        record["sources"] = {
            name: self.source_of(name) for name in (*CONSTANT_NAMES, "R")
        }
        return record


@dataclass(frozen=True)
class InclusionModel:
    """A differential inclusion x' in F(x) given through its support function.

    ``vertices`` enumerates candidate maximizers when the argmax of <v, p> may
    be set-valued; it drives the minimal-norm-then-lexicographic tie-break.
    """

    dim: int
    hamiltonian: Hamiltonian
    argmax: Selector
    sampler: Sampler
    constants: Constants = field(default_factory=Constants)
    name: str = "custom"
    vertices: VertexField | None = None

    def reversed(self) -> InclusionModel:
        """The inclusion x' in -F(x); its Hamiltonian is H(x, -p)."""

        hamiltonian = self.hamiltonian
        argmax = self.argmax
        sampler = self.sampler
        vertices = self.vertices

        return InclusionModel(
            dim=self.dim,
            hamiltonian=lambda x, p: hamiltonian(x, -p),
            argmax=lambda x, p: -argmax(x, -p),
            sampler=lambda x, m: [-v for v in sampler(x, m)],
            constants=self.constants,
            name=f"{self.name}-reversed",
            vertices=None if vertices is None else (lambda x: -vertices(x)),
        )

    def with_constants(self, constants: Constants) -> InclusionModel:
        return replace(self, constants=constants)


@dataclass(frozen=True)
class TargetSet:
    """Closed target S: indicator < 0 inside, > 0 outside, 0 on the boundary.

    ``indicator`` is evaluated on arrays whose last axis holds coordinates.
    ``normal`` (optional) returns the unit proximal normal pointing out of S.
    """

    dim: int
    indicator: Indicator
    rho0: float | None = None
    normal: NormalField | None = None
    name: str = "target"

    def value(self, x: Vector) -> float:
        return float(np.asarray(self.indicator(np.asarray(x, dtype=float))))

    def contains(self, x: Vector) -> bool:
        return self.value(x) <= 0.0

    def normal_at(self, x: Vector, step: float | None = None) -> Vector:
        if self.normal is not None:
            return unit(np.asarray(self.normal(np.asarray(x, dtype=float)), dtype=float))

        x = np.asarray(x, dtype=float)
        step = step if step is not None else 1e-5 * (1.0 + float(np.linalg.norm(x)))
        offsets = np.eye(self.dim) * step
        grad = (
            np.asarray(self.indicator(x + offsets)) - np.asarray(self.indicator(x - offsets))
        ) / (2.0 * step)
        if not np.all(np.isfinite(grad)) or float(np.linalg.norm(grad)) == 0.0:
            raise InputError("target indicator has no usable gradient here.", param="x")
        return unit(grad)


def _as_field(value: Vector | VertexField | float | Callable[[Vector], float]) -> Callable:
    if callable(value):
        return value
    constant = np.asarray(value, dtype=float)
    return lambda _x: constant


def _directions(dim: int, count: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(count) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    # Fibonacci sphere for dim 3.
    k = np.arange(count) + 0.5
    polar = np.arccos(1.0 - 2.0 * k / count)
    azimuth = math.pi * (1.0 + math.sqrt(5.0)) * k
    return np.stack(
        [np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar), np.cos(polar)],
        axis=1,
    )


def tie_break_argmax(candidates: np.ndarray, p: Vector) -> Vector:
    """Maximizer of <v, p> over ``candidates``: minimal norm, then lexicographic."""

    scores = candidates @ p
    best = float(np.max(scores))
    tol = 1e-12 * (1.0 + abs(best))
    winners = candidates[scores >= best - tol]
    ordered = sorted(
        winners.tolist(),
        key=lambda v: (round(math.sqrt(sum(c * c for c in v)), 12), tuple(v)),
    )
    return np.asarray(ordered[0], dtype=float)


def _edge_fill(vertices: np.ndarray, edges: list[tuple[int, int]], count: int) -> np.ndarray:
    points = [row for row in vertices]
    if not edges:
        return np.asarray(points)
    fractions = (0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875)
    for fraction, (i, j) in itertools.product(fractions, edges):
        if len(points) >= count:
            break
        points.append((1.0 - fraction) * vertices[i] + fraction * vertices[j])
    return np.asarray(points)


def ball_model(
    dim: int,
    center: Vector | VertexField | None = None,
    radius: float | Callable[[Vector], float] = 1.0,
    constants: Constants | None = None,
    name: str = "ball",
) -> InclusionModel:
    """F(x) = c(x) + r(x) * closed unit ball."""

    center_of = _as_field(np.zeros(dim) if center is None else center)
    radius_of = _as_field(radius)

    def hamiltonian(x: Vector, p: Vector) -> float:
        return float(np.dot(center_of(x), p) + float(radius_of(x)) * np.linalg.norm(p))

    def argmax(x: Vector, p: Vector) -> Vector:
        return np.asarray(center_of(x), dtype=float) + float(radius_of(x)) * unit(p)

    def sampler(x: Vector, m: int) -> list[Vector]:
        c = np.asarray(center_of(x), dtype=float)
        r = float(radius_of(x))
        return [c + r * d for d in _directions(dim, max(m, 1))]

    return InclusionModel(
        dim=dim,
        hamiltonian=hamiltonian,
        argmax=argmax,
        sampler=sampler,
        constants=constants or Constants(),
        name=name,
    )


def box_model(
    dim: int,
    generators: np.ndarray | VertexField,
    constants: Constants | None = None,
    name: str = "box",
) -> InclusionModel:
    """F(x) = {sum_j u_j g_j(x) : u in [0, 1]^m}; ``generators(x)`` has shape (m, n)."""

    generators_of = _as_field(generators)

    def gens(x: Vector) -> np.ndarray:
        return np.asarray(generators_of(x), dtype=float).reshape(-1, dim)

    def vertices(x: Vector) -> np.ndarray:
        g = gens(x)
        corners = itertools.product((0.0, 1.0), repeat=g.shape[0])
        return np.asarray([np.asarray(u) @ g for u in corners])

    def hamiltonian(x: Vector, p: Vector) -> float:
        return float(np.sum(np.maximum(gens(x) @ p, 0.0)))

    def argmax(x: Vector, p: Vector) -> Vector:
        return tie_break_argmax(vertices(x), p)

    def sampler(x: Vector, m: int) -> list[Vector]:
        verts = vertices(x)
        m_gen = gens(x).shape[0]
        edges = [
            (i, i | (1 << (m_gen - 1 - j)))
            for i in range(len(verts))
            for j in range(m_gen)
            if not i & (1 << (m_gen - 1 - j))
        ]
        return list(_edge_fill(verts, edges, max(m, len(verts))))

    return InclusionModel(
        dim=dim,
        hamiltonian=hamiltonian,
        argmax=argmax,
        sampler=sampler,
        constants=constants or Constants(),
        name=name,
        vertices=vertices,
    )


def polytope_model(
    dim: int,
    vertices: np.ndarray | VertexField,
    constants: Constants | None = None,
    name: str = "polytope",
) -> InclusionModel:
    """F(x) = conv{v_k(x)}; in the plane, vertices are listed in boundary order."""

    vertices_of = _as_field(vertices)

    def verts(x: Vector) -> np.ndarray:
        return np.asarray(vertices_of(x), dtype=float).reshape(-1, dim)

    def hamiltonian(x: Vector, p: Vector) -> float:
        return float(np.max(verts(x) @ p))

    def argmax(x: Vector, p: Vector) -> Vector:
        return tie_break_argmax(verts(x), p)

    def sampler(x: Vector, m: int) -> list[Vector]:
        v = verts(x)
        k = len(v)
        edges = [(i, (i + 1) % k) for i in range(k)] if k > 1 else []
        return list(_edge_fill(v, edges, max(m, k)))

    return InclusionModel(
        dim=dim,
        hamiltonian=hamiltonian,
        argmax=argmax,
        sampler=sampler,
        constants=constants or Constants(),
        name=name,
        vertices=verts,
    )


def ball_complement_target(radius: float = 1.0, dim: int = 2) -> TargetSet:
    """S = {|x| >= radius}; every ball outside the open disk fits in S."""

    def indicator(x: np.ndarray) -> np.ndarray:
        return radius - np.linalg.norm(x, axis=-1)

    def normal(x: Vector) -> Vector:
        return -unit(np.asarray(x, dtype=float))

    return TargetSet(
        dim=dim,
        indicator=indicator,
        rho0=radius,
        normal=normal,
        name="ball-complement",
    )


def point_target(point: Vector, radius: float, dim: int | None = None) -> TargetSet:
    """Closed ball of ``radius`` around ``point`` (a point source on a grid)."""

    center = np.asarray(point, dtype=float)

    def indicator(x: np.ndarray) -> np.ndarray:
        return np.linalg.norm(x - center, axis=-1) - radius

    def normal(x: Vector) -> Vector:
        return unit(np.asarray(x, dtype=float) - center)

    return TargetSet(
        dim=dim or center.shape[0],
        indicator=indicator,
        rho0=radius,
        normal=normal,
        name="point",
    )


def halfspace_target(direction: Vector, offset: float, rho0: float = 1.0) -> TargetSet:
    """S = {<a, x> >= offset} for a unit vector a."""

    a = unit(np.asarray(direction, dtype=float))

    def indicator(x: np.ndarray) -> np.ndarray:
        return offset - np.asarray(x) @ a

    return TargetSet(
        dim=a.shape[0],
        indicator=indicator,
        rho0=rho0,
        normal=lambda _x: -a,
        name="halfspace",
    )
