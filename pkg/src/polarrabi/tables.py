"""Plain-text tables with a ``#``-prefixed metadata header, and their JSON mirror."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

FLOAT_FMT = "{:.12e}"


def _cell(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    if isinstance(x, float) or hasattr(x, "dtype"):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return FLOAT_FMT.format(x)
    return str(x)


def _meta_value(v) -> str:
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(v, sort_keys=True, default=_json_default)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    return str(o)


def format_table(columns: Sequence[str], rows: Sequence[Sequence[Any]], metadata: Mapping[str, Any]) -> str:
    lines = [f"# {k} = {_meta_value(v)}" for k, v in metadata.items()]
    lines.append("\t".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match columns")
        lines.append("\t".join(_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def format_json(columns: Sequence[str], rows: Sequence[Sequence[Any]], metadata: Mapping[str, Any]) -> str:
    def clean(x):
        if isinstance(x, float) and not math.isfinite(x):
            return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return x

    data = {
        "metadata": dict(metadata),
        "columns": list(columns),
        "rows": [[clean(_json_default(x) if hasattr(x, "dtype") else x) for x in row] for row in rows],
    }
    return json.dumps(data, indent=1, sort_keys=False, default=_json_default) + "\n"


def write(path: Path, columns, rows, metadata, fmt: str = "table") -> Path:
    text = format_json(columns, rows, metadata) if fmt == "json" else format_table(columns, rows, metadata)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def read_table(path: Path):
    """Parse a table written by :func:`format_table` into ``(metadata, columns, rows)``."""
    meta: Dict[str, str] = {}
    columns: List[str] = []
    rows: List[List[str]] = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(" = ")
            meta[k] = v
        elif not columns:
            columns = line.split("\t")
        elif line:
            rows.append(line.split("\t"))
    return meta, columns, rows
