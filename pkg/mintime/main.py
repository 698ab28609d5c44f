from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Optional

import typer

from mintime.commands.config import load_config, parse_value, resolve_output_dir
from mintime.commands.report import cmd_report
from mintime.commands.runtime import RunContext, build_context
from mintime.commands.shoot import cmd_shoot
from mintime.commands.solve import cmd_solve
from mintime.commands.verify import VerifyKind, cmd_verify
from mintime.core.errors import ThresholdFailure
from mintime.core.types import TOOL_VERSION
from mintime.dependencies import configure_logging, handle_errors

ConfigOption = Annotated[
    Optional[Path],
    typer.Option("--config", "-c", help="Flat key = value run configuration."),
]
ScenarioOption = Annotated[
    Optional[str],
    typer.Option("--scenario", help="Built-in scenario: example1, eikonal or ball-origin."),
]
SpacingOption = Annotated[Optional[float], typer.Option("--h", help="Grid spacing (grid.h).")]
HorizonOption = Annotated[
    Optional[float], typer.Option("--T", help="Attainable-set horizon (verify.horizon).")
]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Seed for all sampling.")]
OutOption = Annotated[
    Optional[Path], typer.Option("--out", help="Output directory (output.dir).")
]


def _vector(text: str | None, key: str) -> Any:
    return None if text is None else parse_value(text, key)


def _context(
    config: Path | None,
    overrides: dict[str, Any],
    require_spacing: bool = True,
) -> RunContext:
    if overrides.get("output.dir") is not None:
        overrides["output.dir"] = str(overrides["output.dir"])
    return build_context(load_config(config, overrides), require_spacing)


def create_app() -> typer.Typer:
    app = typer.Typer(
        name="mintime",
        help="Minimum time functions, extremal arcs and regularity certificates.",
        no_args_is_help=True,
        add_completion=False,
    )

    @app.callback()
    def main(
        verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")] = False,
    ) -> None:
        configure_logging(verbose)

    @app.command()
    def version() -> None:
        """Print the tool version."""

        typer.echo(TOOL_VERSION)

    @app.command()
    @handle_errors
    def solve(
        config: ConfigOption = None,
        scenario: ScenarioOption = None,
        h: SpacingOption = None,
        seed: SeedOption = None,
        out: OutOption = None,
    ) -> None:
        """Solve for T on the grid; writes T.csv and meta.json."""

        context = _context(
            config,
            {"scenario": scenario, "grid.h": h, "seed": seed, "output.dir": out},
        )
        field_, code = cmd_solve(context)
        stats = field_.stats
        typer.echo(f"solved {context.name}: {stats.sweeps} sweeps, residual {stats.residual:.3e}")
        if code:
            raise typer.Exit(code=code)

    @app.command()
    @handle_errors
    def shoot(
        config: ConfigOption = None,
        scenario: ScenarioOption = None,
        h: SpacingOption = None,
        terminal: Annotated[
            Optional[str],
            typer.Option("--terminal", help="Terminal point on the target, e.g. '1,0'."),
        ] = None,
        normal: Annotated[
            Optional[str],
            typer.Option("--normal", help="Outward normal to S at the terminal point."),
        ] = None,
        r: Annotated[Optional[float], typer.Option("--r", help="Arc length in time.")] = None,
        dt: Annotated[Optional[float], typer.Option("--dt", help="Integration step.")] = None,
        out: OutOption = None,
    ) -> None:
        """Integrate an extremal arc from a target point; writes arc.csv."""

        context = _context(
            config,
            {
                "scenario": scenario,
                "grid.h": h,
                "shoot.terminal": _vector(terminal, "shoot.terminal"),
                "shoot.normal": _vector(normal, "shoot.normal"),
                "shoot.r": r,
                "shoot.dt": dt,
                "output.dir": out,
            },
            require_spacing=False,
        )
        arc = cmd_shoot(context)
        end = ",".join(f"{v:.12g}" for v in arc.terminal_state)
        typer.echo(f"arc: {len(arc.times)} samples, end ({end}), lambda {arc.lam:.12g}")

    @app.command()
    @handle_errors
    def verify(
        which: Annotated[VerifyKind, typer.Argument(help="Which check to run.")],
        config: ConfigOption = None,
        scenario: ScenarioOption = None,
        h: SpacingOption = None,
        horizon: HorizonOption = None,
        seed: SeedOption = None,
        out: OutOption = None,
    ) -> None:
        """Run a certification; writes certificates.json and summary.json."""

        context = _context(
            config,
            {
                "scenario": scenario,
                "grid.h": h,
                "verify.horizon": horizon,
                "seed": seed,
                "output.dir": out,
            },
        )
        summary = cmd_verify(context, which)
        typer.echo(summary.summary_line())
        if not summary.ok:
            reason = summary.failure or (
                f"pass fraction {summary.pass_fraction:.4g} < {summary.threshold:.4g}"
            )
            raise ThresholdFailure(
                f"verify {which.value} failed: {reason}", param="verify.threshold"
            )

    @app.command()
    @handle_errors
    def report(out: OutOption = None, config: ConfigOption = None) -> None:
        """Aggregate the artifacts of prior runs into report.md."""

        path = cmd_report(out if out is not None else resolve_output_dir(config))
        typer.echo(str(path))

    return app


app = create_app()
