from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable

from pydantic import BaseModel, ConfigDict, Field

from mintime.core.formatting import to_jsonable, write_json

from .proximal import SphereCertificate


class SphereCertificateRecord(BaseModel):
    base: list[float]
    normal: list[float]
    radius: float
    sigma_residual: float | None
    slack: float
    passed: bool = Field(alias="pass")
    tested_count: int
    note: str | None = None

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    @classmethod
    def from_certificate(cls, certificate: SphereCertificate) -> SphereCertificateRecord:
        return cls(
            base=[float(v) for v in certificate.base],
            normal=[float(v) for v in certificate.normal],
            radius=certificate.radius,
            sigma_residual=to_jsonable(certificate.sigma_residual),
            slack=certificate.slack,
            passed=certificate.passed,
            tested_count=certificate.tested_count,
            note=certificate.note,
        )

    def to_record(self) -> dict[str, Any]:
        record = self.model_dump(by_alias=True)
        if record["note"] is None:
            del record["note"]
        return record


class PointCheckRecord(BaseModel):
    """Scalar check at one point (Petrov margin, semiconcavity excess)."""

    base: list[float]
    value: float | None
    threshold: float
    passed: bool = Field(alias="pass")

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    def to_record(self) -> dict[str, Any]:
        return self.model_dump(by_alias=True)


class CheckSummary(BaseModel):
    kind: str
    passed_count: int
    total: int
    pass_fraction: float
    threshold: float
    failure: str | None = None
    details: dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(extra="forbid")

    @classmethod
    def tally(
        cls,
        kind: str,
        passed: Iterable[bool],
        threshold: float,
        failure: str | None = None,
        **details: Any,
    ) -> CheckSummary:
        flags = list(passed)
        count = sum(flags)
        return cls(
            kind=kind,
            passed_count=count,
            total=len(flags),
            pass_fraction=count / len(flags) if flags else 0.0,
            threshold=threshold,
            failure=failure,
            details=details,
        )

    @property
    def ok(self) -> bool:
        return self.failure is None and self.total > 0 and self.pass_fraction >= self.threshold

    def summary_line(self) -> str:
        return f"PASS {self.passed_count}/{self.total}"


def certificate_records(
    certificates: Iterable[SphereCertificate],
) -> list[dict[str, Any]]:
    return [SphereCertificateRecord.from_certificate(c).to_record() for c in certificates]


def write_certificates(path: Path, records: list[dict[str, Any]]) -> Path:
    return write_json(path, records)
