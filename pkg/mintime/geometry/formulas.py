"""Radius formulas for the exterior sphere of hypo(T) and the inner ball of A(T)."""

from __future__ import annotations

import math

import numpy as np

from mintime.core.errors import InputError
from mintime.core.types import Vector
from mintime.extremal.integrate import rho_of_s
from mintime.model.inclusion import Constants


def lipschitz_terms(
    norm_x: float,
    r: float,
    constants: Constants,
    rho0: float,
) -> tuple[float, float, float]:
    """(L1, L2, L4) at |x| = ``norm_x`` and time ``r``."""

    if not (math.isfinite(norm_x) and norm_x >= 0.0):
        raise InputError("|x| must be finite and nonnegative.", param="x")
    K, K1, K2 = constants.K, constants.K1, constants.K2
    rho_r = rho_of_s(constants, rho0, r)
    e_k = math.exp(K * r)
    e_k2 = math.exp(K2 * r)

    L1 = (
        (1.0 + K2**2 * (norm_x + 1.0) ** 2 * e_k2**2) / (2.0 * rho_r) * e_k
        + K * K2 * (norm_x + 1.0) * math.exp((K + K2) * r)
        + 2.0 * K * e_k
    )
    L2 = K * K2 * (norm_x + 1.0) * (2.0 * e_k + 1.0) * e_k2
    L4 = (
        (K2**2 * (norm_x + 2.0) ** 2 * math.exp(2.0 * K2) + 1.0) / (2.0 * rho_r)
        + K1 * (1.0 + K2 * (norm_x + 2.0) * math.exp(K2))
        + 1.0
    )
    return L1, L2, L4


def rho_T_of(x: Vector, r: float, constants: Constants, rho0: float) -> float:
    """Exterior sphere radius of hypo(T) at (x, T(x) = r)."""

    L1, L2, L4 = lipschitz_terms(float(np.linalg.norm(x)), r, constants, rho0)
    return 1.0 / max(2.0 * L1 + L2, 2.0 * L4)


def R_of_T(constants: Constants, R: float, T: float) -> float | None:
    """Inner-ball factor r0 of A(T), or None when exp(-3KT) <= 2 c0 R T^2."""

    if not (math.isfinite(R) and R > 0.0):
        raise InputError("R must be positive.", param="R")
    if not (math.isfinite(T) and T > 0.0):
        raise InputError("T must be positive.", param="T")
    K, K1, c0 = constants.K, constants.K1, constants.c0
    decay = math.exp(-3.0 * K * T)
    if decay <= 2.0 * c0 * R * T**2:
        return None
    return R * (decay - 2.0 * c0 * R * T**2) / (1.0 + K * T + K1 * T) ** 2
