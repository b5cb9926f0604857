"""Deterministic JSON and CSV writers.

Floats are printed with 17 significant digits so that every double round
trips exactly; non-finite values become ``null``.  Payloads never contain
timestamps.  Provenance goes to a ``.meta.json`` sidecar instead.
"""

from __future__ import annotations

import csv
import datetime
import io
import json
import math
import os
import platform
import sys

import numpy as np


def format_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    return "%.17g" % v


def _encode(obj, out: list, indent: int, level: int):
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out, indent, level)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            out.append(("," if i else "") + pad + json.dumps(str(k)) + ": ")
            _encode(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        # lists of scalars stay on one line; nested structures are indented
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            out.append("[")
            for i, v in enumerate(obj):
                if i:
                    out.append(", ")
                _encode(v, out, indent, level)
            out.append("]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append(("," if i else "") + pad)
            _encode(v, out, indent, level + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj, indent: int = 2) -> str:
    out: list[str] = []
    _encode(obj, out, indent, 0)
    return "".join(out) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        s = format_float(float(v))
        return "" if s == "null" else s
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    """Dotted key/value pairs for a nested report; list entries are indexed."""
    items = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            items.extend(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            items.extend(flatten(v, f"{prefix}[{i}]"))
    else:
        items.append((prefix, obj))
    return items


def metadata(argv) -> dict:
    return {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "argv": list(argv),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": os.environ.get("MB_THREADS"),
    }


def write_output(text: str, path: str | None, argv=None) -> None:
    """Write ``text`` to ``path`` plus a provenance sidecar, or to stdout."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(metadata(argv or sys.argv), fh, indent=2)
        fh.write("\n")
