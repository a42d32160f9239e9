"""
Table serialization for the command line.

A :class:`Table` is a named list of rows sharing one column order.  CSV output
puts ``#`` comment lines (metadata, optional timestamp) above the header row.
JSON output groups rows by ``step`` when the table has that column.

Floats are written with ``repr``, the shortest string that reads back to the
same double, so both formats round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Optional, Sequence

import numpy as np

__all__ = [
    "Table",
    "format_value",
    "parse_complex_list",
    "parse_n_range",
    "render_csv",
    "render_json",
    "timestamp_line",
]


@dataclass
class Table:
    name: str
    columns: Sequence[str]
    rows: list[tuple] = field(default_factory=list)

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def format_value(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def timestamp_line() -> str:
    return "generated " + datetime.now(timezone.utc).isoformat(timespec="seconds")


def render_csv(tables: Sequence[Table], meta: dict[str, Any], timestamp: bool = True) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# {timestamp_line()}\n")
    for key, val in meta.items():
        buf.write(f"# {key}: {format_value(val)}\n")
    for i, table in enumerate(tables):
        if len(tables) > 1:
            if i:
                buf.write("\n")
            buf.write(f"# table: {table.name}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _group_by_step(table: Table):
    if "step" not in table.columns:
        return [dict(zip(table.columns, map(_plain, r))) for r in table.rows]
    grouped: dict[str, dict[str, list]] = {}
    others = [c for c in table.columns if c != "step"]
    for rec in table.records():
        slot = grouped.setdefault(str(rec["step"]), {c: [] for c in others})
        for c in others:
            slot[c].append(_plain(rec[c]))
    return grouped


def render_json(tables: Sequence[Table], meta: dict[str, Any], timestamp: bool = True) -> str:
    doc: dict[str, Any] = {}
    if timestamp:
        doc["generated"] = timestamp_line().split(" ", 1)[1]
    doc["meta"] = {k: _plain(v) for k, v in meta.items()}
    for table in tables:
        doc[table.name] = _group_by_step(table)
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def parse_complex_list(text: str) -> np.ndarray:
    """Parse ``"re+imj,re+imj,..."`` into a complex vector."""
    parts = [p.strip().replace(" ", "") for p in text.split(",")]
    if not parts or any(not p for p in parts):
        raise ValueError(f"empty amplitude in {text!r}")
    try:
        return np.array([complex(p) for p in parts], dtype=np.complex128)
    except ValueError as exc:
        raise ValueError(f"cannot parse amplitudes {text!r}: {exc}") from None


def parse_n_range(text: str) -> list[int]:
    """``"3"`` -> [3]; ``"1..7"`` -> [1, ..., 7] (inclusive)."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        a, b = int(lo), int(hi)
        if b < a:
            raise ValueError(f"empty range {text!r}")
        return list(range(a, b + 1))
    return [int(text)]


def write_output(text: str, path: Optional[str], stdout) -> None:
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
