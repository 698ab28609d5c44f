from __future__ import annotations

import functools
import logging
from typing import Callable, ParamSpec, TypeVar

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from mintime.core.errors import MintimeError

P = ParamSpec("P")
R = TypeVar("R")

stderr = Console(stderr=True)


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=stderr, show_path=verbose, rich_tracebacks=True)],
        force=True,
    )


def handle_errors(command: Callable[P, R]) -> Callable[P, R]:
    """Report a MintimeError on stderr and exit with its code."""

    @functools.wraps(command)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        try:
            return command(*args, **kwargs)
        except MintimeError as exc:
            logging.getLogger("mintime").debug("Command failed: %s", exc.to_record())
            stderr.print(
                f"[bold red]error[/] ({exc.code}): {escape(exc.message)}",
                highlight=False,
                soft_wrap=True,
            )
            raise typer.Exit(code=exc.exit_code) from exc

    return wrapper
