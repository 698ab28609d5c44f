from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass
class MintimeError(Exception):
    message: str
    code: str = "mintime_error"
    exit_code: int = 1
    param: str | None = None

    def __str__(self) -> str:
        return self.message

    def to_record(self) -> dict[str, Any]:
        return {
            "code": self.code,
            "message": self.message,
            "param": self.param,
        }


@dataclass
class InputError(MintimeError):
    code: str = "invalid_input"
    exit_code: int = 2


@dataclass
class ConfigError(MintimeError):
    code: str = "config_error"
    exit_code: int = 2


@dataclass
class ThresholdFailure(MintimeError):
    """Verification finished, but fewer certificates passed than required."""

    code: str = "threshold_failure"
    exit_code: int = 5
