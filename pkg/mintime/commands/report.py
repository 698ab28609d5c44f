from __future__ import annotations

import json
import logging
from pathlib import Path

from mintime.core.errors import InputError
from mintime.core.formatting import fmt, read_csv

from .runtime import FIELD_FILE
from .shoot import ARC_FILE
from .solve import META_FILE
from .verify import CERTIFICATES_FILE, CONSTRUCTIVE_FILE, SUMMARY_FILE

logger = logging.getLogger(__name__)

REPORT_FILE = "report.md"


def _rows(path: Path) -> str:
    _header, data = read_csv(path)
    return str(len(data))


def _count(path: Path) -> str:
    return str(len(json.loads(path.read_text(encoding="utf-8"))))


def _field_detail(path: Path) -> str:
    header, data = read_csv(path)
    if len(data) == 0:
        return "empty"
    values = data[:, len(header) - 1]
    return f"T in [{fmt(values.min())}, {fmt(values.max())}]"


def _meta_detail(path: Path) -> str:
    meta = json.loads(path.read_text(encoding="utf-8"))
    converged = "yes" if meta["converged"] else "no"
    detail = f"{meta['sweeps']} sweeps, residual {fmt(meta['residual'])}, converged {converged}"
    oracle = meta.get("oracle")
    if oracle:
        detail += f", oracle error {fmt(oracle['max_abs_error'])}"
    return detail


def _arc_detail(path: Path) -> str:
    header, data = read_csv(path)
    dim = (len(header) - 1) // 2
    end = ", ".join(fmt(v) for v in data[-1, 1 : 1 + dim])
    return f"s = {fmt(data[-1, 0])}, x = ({end})"


def _records_detail(path: Path) -> str:
    records = json.loads(path.read_text(encoding="utf-8"))
    passed = sum(1 for record in records if record.get("pass"))
    return f"{passed} of {len(records)} pass"


ARTIFACTS = (
    (FIELD_FILE, _rows, _field_detail),
    (META_FILE, lambda _p: "1", _meta_detail),
    (ARC_FILE, _rows, _arc_detail),
    (CERTIFICATES_FILE, _count, _records_detail),
    (CONSTRUCTIVE_FILE, _count, _records_detail),
)


def _summary_lines(path: Path) -> list[str]:
    summaries = json.loads(path.read_text(encoding="utf-8"))
    lines = [
        "",
        "| check | result | fraction | threshold | status |",
        "| --- | --- | --- | --- | --- |",
    ]
    for kind, record in summaries.items():
        status = "ok" if record.get("ok") else (record.get("failure") or "below threshold")
        lines.append(
            f"| {kind} | PASS {record['passed_count']}/{record['total']} "
            f"| {fmt(record['pass_fraction'])} | {fmt(record['threshold'])} | {status} |"
        )
    return lines


def cmd_report(out_dir: Path) -> Path:
    """Aggregate the artifacts found in ``out_dir`` into report.md."""

    lines = [
        "# mintime report",
        "",
        "| artifact | rows | detail |",
        "| --- | --- | --- |",
    ]
    found = 0
    for name, rows, detail in ARTIFACTS:
        path = out_dir / name
        if not path.exists():
            continue
        found += 1
        lines.append(f"| {name} | {rows(path)} | {detail(path)} |")

    summary = out_dir / SUMMARY_FILE
    if summary.exists():
        found += 1
        lines.extend(_summary_lines(summary))

    if found == 0:
        raise InputError(f"no artifacts found in {out_dir}", param="output.dir")

    path = out_dir / REPORT_FILE
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    logger.info("Wrote %s (%d artifacts)", path, found)
    return path
