from __future__ import annotations

from dataclasses import dataclass

from mintime.core.errors import MintimeError


@dataclass
class DegenerateCovectorError(MintimeError):
    code: str = "degenerate_covector"
    exit_code: int = 2
    param: str | None = "p"


@dataclass
class EstimationError(MintimeError):
    code: str = "estimation_failed"
    exit_code: int = 2


@dataclass
class ConstantsValidationError(MintimeError):
    """A sampled constant exceeds the user-provided value by more than 1 %."""

    code: str = "constant_underestimated"
    exit_code: int = 2


@dataclass
class EmptyBoundaryError(MintimeError):
    code: str = "empty_boundary"
    exit_code: int = 2
