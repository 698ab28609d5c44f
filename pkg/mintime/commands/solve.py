from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from mintime.core.formatting import write_json
from mintime.core.types import TOOL_VERSION
from mintime.solver.grid import ScalarField, field_to_csv

from .runtime import FIELD_FILE, META_FILE, RunContext

logger = logging.getLogger(__name__)

EXIT_NOT_CONVERGED = 3


def oracle_error(context: RunContext, field_: ScalarField) -> dict | None:
    """Largest |T - oracle| over reached nodes where the oracle is defined."""

    scenario = context.scenario
    if scenario is None or scenario.oracle is None:
        return None
    worst = 0.0
    worst_at = None
    compared = 0
    for x, value in zip(field_.grid.points(), field_.flat):
        if not value < field_.cap:
            continue
        exact = scenario.oracle_at(x)
        if exact is None or not math.isfinite(exact):
            continue
        compared += 1
        gap = abs(float(value) - exact)
        if gap > worst:
            worst, worst_at = gap, x
    return {
        "max_abs_error": worst,
        "at": None if worst_at is None else np.asarray(worst_at).tolist(),
        "compared": compared,
    }


def cmd_solve(context: RunContext) -> tuple[ScalarField, int]:
    """Solve for T, write T.csv and meta.json; exit code 3 when not converged."""

    field_ = context.solve()
    out = context.out_dir
    field_to_csv(field_, out / FIELD_FILE)

    meta = {
        "tool_version": TOOL_VERSION,
        "scenario": context.name,
        "model": context.model.name,
        "target": context.target.name,
        "seed": context.config.seed,
        "grid": context.grid.to_record(),
        "solver": dataclasses.asdict(context.solver_options),
        "residual": field_.stats.residual,
        "sweeps": field_.stats.sweeps,
        "converged": field_.stats.converged,
        "constants": context.constants.to_record(),
        "oracle": oracle_error(context, field_),
        "field": context.field_signature(),
    }
    write_json(out / META_FILE, meta)
    logger.info("Wrote %s and %s to %s", FIELD_FILE, META_FILE, out)

    return field_, 0 if field_.stats.converged else EXIT_NOT_CONVERGED
