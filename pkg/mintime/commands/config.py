"""Flat ``key = value`` run configuration.

Keys are dotted (``grid.h = 0.01``), ``#`` starts a comment, booleans are
``true``/``false`` and comma-separated values are vectors. The nested result is
validated by :class:`RunConfig`; unknown keys are errors.
"""

from __future__ import annotations

import logging
import os
import re
from pathlib import Path
from typing import Any, Mapping

from pydantic import ValidationError

from mintime.core.errors import ConfigError

from .schemas import RunConfig

logger = logging.getLogger(__name__)

OUTPUT_ENV = "MINTIME_OUT"
KEY_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


def _scalar(text: str) -> Any:
    if text in ("true", "false"):
        return text == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_value(text: str, key: str) -> Any:
    text = text.strip()
    if text == "":
        raise ConfigError(f"empty value for key: {key}", param=key)
    if "," not in text:
        return _scalar(text)
    items = [item.strip() for item in text.split(",")]
    try:
        return [float(item) for item in items]
    except ValueError:
        raise ConfigError(f"invalid vector for key: {key}", param=key) from None


def set_dotted(tree: dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    node = tree
    for depth, part in enumerate(parts[:-1]):
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(
                f"key {'.'.join(parts[: depth + 1])} is a value, not a section",
                param=key,
            )
        node = child
    if isinstance(node.get(parts[-1]), dict):
        raise ConfigError(f"key {key} is a section, not a value", param=key)
    node[parts[-1]] = value


def parse_flat(text: str) -> dict[str, Any]:
    tree: dict[str, Any] = {}
    seen: set[str] = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected 'key = value'", param=f"line {number}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not KEY_PATTERN.match(key):
            raise ConfigError(f"line {number}: invalid key {key!r}", param=key)
        if key in seen:
            raise ConfigError(f"duplicate key: {key}", param=key)
        seen.add(key)
        set_dotted(tree, key, parse_value(value, key))
    return tree


def _translate(exc: ValidationError) -> ConfigError:
    error = exc.errors()[0]
    key = ".".join(str(part) for part in error["loc"])
    if error["type"] == "missing":
        message = f"missing key: {key}"
    elif error["type"] == "extra_forbidden":
        message = f"unknown key: {key}"
    else:
        message = f"invalid value for {key}: {error['msg']}"
    return ConfigError(message, param=key)


def load_config(
    path: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """File keys, then ``MINTIME_OUT``, then non-None ``overrides`` (dotted keys)."""

    tree: dict[str, Any] = {}
    if path is not None:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}", param="config") from exc
        tree.update(parse_flat(text))

    env_out = os.environ.get(OUTPUT_ENV)
    if env_out:
        set_dotted(tree, "output.dir", env_out)

    for key, value in (overrides or {}).items():
        if value is not None:
            set_dotted(tree, key, value)

    try:
        config = RunConfig.model_validate(tree)
    except ValidationError as exc:
        raise _translate(exc) from None

    logger.debug("Loaded config: %s", config.model_dump(exclude_none=True))
    return config


def resolve_output_dir(path: Path | None = None) -> Path:
    """``output.dir`` alone: ``MINTIME_OUT``, then the config file, then ``out``."""

    env_out = os.environ.get(OUTPUT_ENV)
    if env_out:
        return Path(env_out)
    if path is None:
        return Path("out")
    try:
        tree = parse_flat(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", param="config") from exc
    output = tree.get("output", {})
    return Path(str(output.get("dir", "out"))) if isinstance(output, dict) else Path("out")
