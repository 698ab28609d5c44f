from __future__ import annotations

from dataclasses import dataclass

from mintime.core.errors import MintimeError


@dataclass
class GridConfigurationError(MintimeError):
    code: str = "grid_configuration"
    exit_code: int = 2
    param: str | None = "grid"


@dataclass
class OutOfRangeError(MintimeError):
    code: str = "out_of_range"
    exit_code: int = 2
