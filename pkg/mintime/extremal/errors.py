from __future__ import annotations

from dataclasses import dataclass

from mintime.core.errors import MintimeError


@dataclass
class IntegrationDiagnosticError(MintimeError):
    """An integrated arc violates a bound it must satisfy by construction."""

    code: str = "integration_diagnostic"
    exit_code: int = 4
