from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import InputError

TOOL_VERSION = "0.1.0"
FLOAT_FORMAT = "%.12g"

Vector = NDArray[np.float64]
Hamiltonian = Callable[[Vector, Vector], float]
Selector = Callable[[Vector, Vector], Vector]
Sampler = Callable[[Vector, int], list[Vector]]


def as_vector(value: object, dim: int | None = None, name: str = "x") -> Vector:
    """Coerce ``value`` to a finite float vector, optionally of length ``dim``."""

    try:
        vec = np.asarray(value, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not a real vector.", param=name) from exc

    if dim is not None and vec.shape[0] != dim:
        raise InputError(
            f"{name} has dimension {vec.shape[0]}, expected {dim}.",
            param=name,
        )
    if not np.all(np.isfinite(vec)):
        raise InputError(f"{name} contains non-finite entries.", param=name)

    return vec


def unit(vec: Vector) -> Vector:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return vec
    return vec / norm
