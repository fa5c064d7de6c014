"""Deterministic JSON / CSV / text rendering of reports."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

SCHEMA = "ppt-lab/1"
SIG_DIGITS = 12


def normalize(obj):
    """Make a report JSON-safe with stable float and rational printing."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return str(obj)
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, Fraction):
        return obj.numerator if obj.denominator == 1 else str(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def envelope(command, config, result):
    return {"schema": SCHEMA, "command": command, "config": config, "result": result}


def to_json(doc):
    return json.dumps(normalize(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and all(isinstance(x, dict) for x in obj):
        for i, x in enumerate(obj):
            yield from _flatten(x, f"{prefix}[{i}]")
    elif isinstance(obj, list):
        yield prefix, " | ".join(str(x) for x in obj)
    else:
        yield prefix, "" if obj is None else obj


def table_of(result):
    """(header, rows) when the result carries a natural table."""
    if "rows" in result and isinstance(result["rows"], list):
        rows = result["rows"]
        header = list(rows[0]) if rows else []
        return header, [[r[h] for h in header] for r in rows]
    if "sizes" in result:
        return ["L", "size"], [[i, s] for i, s in enumerate(result["sizes"])]
    return None


def to_csv(doc):
    result = normalize(doc["result"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    table = table_of(result)
    if table:
        header, rows = table
        writer.writerow(header)
        writer.writerows(rows)
    else:
        writer.writerow(["key", "value"])
        writer.writerows(_flatten(result))
    return buf.getvalue()


def to_text(doc):
    result = normalize(doc["result"])
    lines = [f"# {doc['schema']} {doc['command']}"]
    table = table_of(result)
    if table:
        header, rows = table
        cells = [[str(h) for h in header]] + [[str(c) for c in r] for r in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
        for row in cells:
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        rest = {k: v for k, v in result.items() if k not in ("rows", "sizes")}
    else:
        rest = result
    pairs = list(_flatten(rest))
    if pairs:
        width = max(len(k) for k, _ in pairs)
        lines.extend(f"{k.ljust(width)}  {v}" for k, v in pairs)
    return "\n".join(lines) + "\n"


def render(doc, fmt):
    if fmt == "json":
        return to_json(doc)
    if fmt == "csv":
        return to_csv(doc)
    if fmt == "text":
        return to_text(doc)
    raise ValueError(f"unknown format {fmt!r}")
