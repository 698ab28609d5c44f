from __future__ import annotations

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from mintime.core.errors import ConfigError
from mintime.core.formatting import write_json
from mintime.core.rng import SplitMix64
from mintime.geometry.certify import (
    AttainableOptions,
    HypographOptions,
    certify_attainable_inner_ball,
    certify_hypograph_exterior_sphere,
)
from mintime.geometry.proximal import proximal_normal, test_semiconcavity
from mintime.geometry.schemas import (
    CheckSummary,
    PointCheckRecord,
    certificate_records,
    write_certificates,
)
from mintime.model.errors import EmptyBoundaryError
from mintime.model.hypotheses import sample_target_boundary
from mintime.solver.grid import ScalarField
from mintime.solver.sweeping import local_lipschitz, restrict_continuity_region

from .runtime import RunContext

logger = logging.getLogger(__name__)

CERTIFICATES_FILE = "certificates.json"
CONSTRUCTIVE_FILE = "constructive.json"
SUMMARY_FILE = "summary.json"


class VerifyKind(str, Enum):
    hypo = "hypo"
    attainable = "attainable"
    petrov = "petrov"
    semiconcavity = "semiconcavity"


def _verify_hypo(context: RunContext) -> tuple[list[dict[str, Any]], CheckSummary]:
    v = context.config.verify
    field_ = context.field()
    mask = restrict_continuity_region(field_, v.slack_kappa)
    options = HypographOptions(
        samples=v.samples,
        seed=context.config.seed,
        dt=v.dt,
        velocity_samples=context.config.solver.velocity_samples,
    )
    certificates = certify_hypograph_exterior_sphere(
        field_, mask, context.model, context.target, context.constants, context.rho0, options
    )
    summary = CheckSummary.tally(
        VerifyKind.hypo.value,
        (c.passed for c in certificates),
        v.threshold,
        masked_nodes=int(mask.sum()),
        h=context.grid.h,
    )
    return certificate_records(certificates), summary


def _verify_attainable(context: RunContext) -> tuple[list[dict[str, Any]], CheckSummary]:
    v = context.config.verify
    if v.horizon is None:
        raise ConfigError("missing key: verify.horizon", param="verify.horizon")
    field_rev = context.field()
    options = AttainableOptions(
        samples=v.samples,
        seed=context.config.seed,
        dt=v.dt,
        constructive_points=v.constructive_points,
        theta_samples=v.theta_samples,
        radius_scale=v.radius_scale,
    )
    report = certify_attainable_inner_ball(
        context.model, field_rev, v.horizon, context.constants, context.R, options
    )

    constructive = [
        {
            "base": record.base,
            "theta": record.theta,
            "key3_margin": record.key3_margin,
            "endpoint": record.endpoint,
            "endpoint_value": record.endpoint_value,
            "pass": record.passed,
        }
        for record in report.constructive
    ]
    write_json(context.out_dir / CONSTRUCTIVE_FILE, constructive)

    failure = None
    if report.constructive_passed < len(report.constructive):
        failure = "constructive_check"
    summary = CheckSummary.tally(
        VerifyKind.attainable.value,
        (c.passed for c in report.certificates),
        v.threshold,
        failure=failure,
        r0=report.r0,
        horizon=report.horizon,
        constructive_passed=report.constructive_passed,
        constructive_total=len(report.constructive),
    )
    return certificate_records(report.certificates), summary


def _verify_petrov(context: RunContext) -> tuple[list[dict[str, Any]], CheckSummary]:
    v = context.config.verify
    points = sample_target_boundary(context.target, context.grid)
    records = []
    for x in points:
        mu = float(context.model.hamiltonian(x, -proximal_normal(context.target, x)))
        records.append(
            PointCheckRecord(
                base=x.tolist(),
                value=mu,
                threshold=v.petrov_margin,
                passed=mu >= v.petrov_margin,
            )
        )

    worst = min(records, key=lambda record: record.value)
    mu_min = float(worst.value)
    failure = None
    if mu_min < v.petrov_margin:
        failure = "petrov"
        logger.warning(
            "Petrov condition fails: mu_min=%.6g at %s (margin %.3g)",
            mu_min,
            worst.base,
            v.petrov_margin,
        )
    summary = CheckSummary.tally(
        VerifyKind.petrov.value,
        (record.passed for record in records),
        v.threshold,
        failure=failure,
        mu_min=mu_min,
        worst_point=worst.base,
    )
    return [record.to_record() for record in records], summary


def _interior(mask: np.ndarray) -> np.ndarray:
    """Mask nodes whose whole 3^n neighbourhood is in the mask."""

    padded = np.pad(mask, 1, constant_values=False)
    inner = mask.copy()
    for shift in np.ndindex(*(3,) * mask.ndim):
        inner &= padded[tuple(slice(s, s + n) for s, n in zip(shift, mask.shape))]
    return inner


def _semiconcavity_steps(field_: ScalarField) -> list[np.ndarray]:
    dim = field_.grid.dim
    steps = []
    for offset in np.ndindex(*(3,) * dim):
        z = np.asarray(offset) - 1
        # One step per +/- pair.
        nonzero = np.flatnonzero(z)
        if len(nonzero) and z[nonzero[0]] > 0:
            steps.append(z * field_.grid.spacing)
    return steps


def _verify_semiconcavity(context: RunContext) -> tuple[list[dict[str, Any]], CheckSummary]:
    v = context.config.verify
    field_ = context.field()
    grid = field_.grid
    h = grid.h
    mask = _interior(restrict_continuity_region(field_, v.slack_kappa))
    candidates = np.flatnonzero(mask.reshape(-1))
    if len(candidates) == 0:
        raise EmptyBoundaryError("no interior nodes in the continuity region.")

    slopes = local_lipschitz(field_).reshape(-1)
    steps = _semiconcavity_steps(field_)
    longest = max(float(np.linalg.norm(z)) for z in steps)
    rng = SplitMix64(context.config.seed)

    records = []
    for index in candidates[rng.sample_indices(len(candidates), v.samples)]:
        x = grid.points()[index]
        slack = 2.0 * h * longest * (1.0 + min(float(slopes[index]), 1.0 / h))
        report = test_semiconcavity(field_.interpolate, x[None, :], 0.0, steps, slack)
        records.append(
            PointCheckRecord(
                base=x.tolist(),
                value=report.max_excess,
                threshold=slack,
                passed=report.passed,
            )
        )

    summary = CheckSummary.tally(
        VerifyKind.semiconcavity.value,
        (record.passed for record in records),
        v.threshold,
        c=0.0,
        interior_nodes=len(candidates),
    )
    return [record.to_record() for record in records], summary


VERIFIERS = {
    VerifyKind.hypo: _verify_hypo,
    VerifyKind.attainable: _verify_attainable,
    VerifyKind.petrov: _verify_petrov,
    VerifyKind.semiconcavity: _verify_semiconcavity,
}


def _merge_summary(path: Path, summary: CheckSummary) -> None:
    summaries: dict[str, Any] = {}
    if path.exists():
        try:
            summaries = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            logger.warning("Replacing unreadable %s", path)
    record = summary.model_dump()
    record["ok"] = summary.ok
    summaries[summary.kind] = record
    write_json(path, dict(sorted(summaries.items())))


def cmd_verify(context: RunContext, which: VerifyKind) -> CheckSummary:
    """Run one verification, write certificates.json and merge summary.json."""

    records, summary = VERIFIERS[which](context)
    write_certificates(context.out_dir / CERTIFICATES_FILE, records)
    _merge_summary(context.out_dir / SUMMARY_FILE, summary)
    logger.info(
        "verify %s: %s (fraction %.4g, threshold %.4g)",
        which.value,
        summary.summary_line(),
        summary.pass_fraction,
        summary.threshold,
    )
    return summary
