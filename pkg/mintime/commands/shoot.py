from __future__ import annotations

import logging

from mintime.core.errors import ConfigError
from mintime.extremal.arcs import ExtremalArc, arc_to_csv
from mintime.extremal.integrate import shoot_extremal

from .runtime import RunContext

logger = logging.getLogger(__name__)

ARC_FILE = "arc.csv"


def cmd_shoot(context: RunContext) -> ExtremalArc:
    section = context.config.shoot
    for key in ("terminal", "normal", "r"):
        if getattr(section, key) is None:
            raise ConfigError(f"missing key: shoot.{key}", param=f"shoot.{key}")

    arc = shoot_extremal(
        context.model,
        section.terminal,
        section.normal,
        float(section.r),
        dt=section.dt,
        rho0=context.config.verify.rho0 or context.target.rho0,
        constants=context.constants,
    )
    if arc.kinks:
        logger.warning("Arc crosses %d kink steps of d_x H", len(arc.kinks))
    logger.info(
        "Arc ends at %s with lambda=%.6g",
        arc.terminal_state.tolist(),
        arc.lam,
    )
    arc_to_csv(arc, context.out_dir / ARC_FILE)
    return arc
