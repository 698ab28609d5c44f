from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .types import FLOAT_FORMAT


def fmt(value: float) -> str:
    return FLOAT_FORMAT % value


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[float]],
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(fmt(float(v)) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    text = path.read_text(encoding="utf-8").strip().splitlines()
    if not text:
        return [], np.zeros((0, 0))
    header = [item.strip() for item in text[0].split(",")]
    rows = [[float(item) for item in line.split(",")] for line in text[1:] if line]
    return header, np.asarray(rows, dtype=float).reshape(len(rows), len(header))


def to_jsonable(value: Any) -> Any:
    """Round floats through ``%.12g`` and turn arrays/tuples into lists."""

    if isinstance(value, dict):
        return {key: to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(fmt(value))
    return value


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(payload), indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")
    return path
