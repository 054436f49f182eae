"""CSV/JSON writers with a metadata header.

CSV files start with ``# key=value`` lines, then one header row, then data
rows; floats are written with 17 significant digits and missing values as
empty fields. JSON mirrors the same content as
``{"metadata": ..., "columns": ..., "rows": ...}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import numbers
from typing import Any, Sequence


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    x = float(value)
    return "" if math.isnan(x) else format(x, ".17g")


def _meta_str(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return _fmt(value)


def render_csv(metadata: dict, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    for key, value in metadata.items():
        buf.write(f"# {key}={_meta_str(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (str, bool)) or value is None:
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    x = float(value)
    return None if math.isnan(x) else x


def render_json(metadata: dict, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    doc = {"metadata": _jsonable(metadata), "columns": list(columns), "rows": _jsonable(list(rows))}
    return json.dumps(doc, indent=1) + "\n"


def read_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    """Parse a file written by ``render_csv`` back into (metadata, columns, rows)."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    parsed = list(csv.reader(body))
    return meta, parsed[0], parsed[1:]
