"""Deterministic JSON/CSV writers and input loaders."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import ParseError
from .geodesy import GeodesicRecord, MetricSample

FLOAT_DIGITS = 17


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps("inf" if x > 0 else "-inf" if x < 0 else "nan")
        return format(x, f".{FLOAT_DIGITS}g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = f",\n{pad}".join(f"{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in items)
        return "{\n" + pad + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, str, np.number)) or x is None for x in obj):
            return "[" + ", ".join(_encode(x, indent, level + 1) for x in obj) + "]"
        body = f",\n{pad}".join(_encode(x, indent, level + 1) for x in obj)
        return "[\n" + pad + body + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and every float printed to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def polylines_csv(polylines) -> str:
    """CSV with columns ``object,t,x1,...,xn``; one object id per polyline."""
    polylines = list(polylines)
    dim = max((np.asarray(p).shape[1] - 1 for _, p in polylines), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object", "t"] + [f"x{i + 1}" for i in range(dim)])
    for name, rows in polylines:
        for row in np.asarray(rows, dtype=float):
            w.writerow([name] + [format(float(x), f".{FLOAT_DIGITS}g") for x in row])
    return buf.getvalue()


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(float(x), f".{FLOAT_DIGITS}g") if isinstance(x, (float, np.floating))
                    else x for x in row])
    return buf.getvalue()


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def load_space(obj) -> MetricSample:
    if "space" in obj and "points" not in obj:
        obj = obj["space"]
    return MetricSample.from_json(obj)


def load_geodesics(obj) -> list[GeodesicRecord]:
    if isinstance(obj, dict):
        obj = obj.get("geodesics", [obj] if "stations" in obj else [])
    return [GeodesicRecord.from_json(r) for r in obj]
