"""Reading and writing distance tables, map words and reports."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core_metric import INF, ExtendedMetricSpace, is_inf, validate
from .errors import InputError, ValidationError
from .model_space import MapWord

INF_TOKENS = {"inf", "infinity", "∞"}


def _parse_entry(v, exact: bool):
    if isinstance(v, str):
        s = v.strip()
        if s.lower() in INF_TOKENS:
            return INF
        try:
            return Fraction(s) if exact else float(s)
        except ValueError:
            raise InputError(f"bad distance entry {v!r}") from None
    if isinstance(v, bool) or v is None:
        raise InputError(f"bad distance entry {v!r}")
    if isinstance(v, (int, Fraction)):
        return v if exact else float(v)
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            raise InputError("use the string \"inf\" for infinite distances")
        return Fraction(v) if exact else v
    raise InputError(f"bad distance entry {v!r}")


def space_from_dict(obj, exact: bool = False) -> ExtendedMetricSpace:
    try:
        points = obj["points"]
        table = obj["distances"]
    except (KeyError, TypeError):
        raise InputError("space JSON needs \"points\" and \"distances\"") from None
    omega = obj.get("infinite_point")
    if not isinstance(table, list) or not all(isinstance(r, list) for r in table):
        raise InputError("\"distances\" must be a list of rows")
    rows = [[_parse_entry(v, exact) for v in row] for row in table]
    return ExtendedMetricSpace(tuple(points), rows, omega)


def _entry_out(v):
    if is_inf(v):
        return "inf"
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return float(v)


def space_to_dict(space: ExtendedMetricSpace) -> dict:
    return {
        "points": list(space.point_ids),
        "infinite_point": space.infinite_point,
        "distances": [[_entry_out(v) for v in row] for row in space.distances],
    }


def space_from_csv(text: str, exact: bool = False) -> ExtendedMetricSpace:
    rows = [r for r in csv.reader(_io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows:
        raise InputError("empty CSV")
    ids = tuple(c.strip() for c in rows[0])
    table = [[_parse_entry(c, exact) for c in r] for r in rows[1:]]
    omega = None
    for i, row in enumerate(table):
        off = [v for j, v in enumerate(row) if j != i]
        if off and all(is_inf(v) for v in off):
            if omega is not None:
                raise InputError("more than one row is entirely infinite")
            omega = ids[i]
    return ExtendedMetricSpace(ids, table, omega)


def space_to_csv(space: ExtendedMetricSpace) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([str(p) for p in space.point_ids])
    for row in space.distances:
        w.writerow([_entry_out(v) for v in row])
    return buf.getvalue()


def load_space(path, fmt: str | None = None, exact: bool = False, check: bool = True,
               rel_tol: float = 1e-9, abs_tol: float = 1e-15) -> ExtendedMetricSpace:
    """Load a space from JSON or CSV; raise ValidationError if it is not a valid extended metric."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if fmt == "json":
        try:
            obj = json.loads(text, parse_float=Fraction if exact else float)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        space = space_from_dict(obj, exact)
    elif fmt == "csv":
        space = space_from_csv(text, exact)
    else:
        raise InputError(f"unknown format {fmt!r}")
    if check:
        report = validate(space, rel_tol, abs_tol)
        if not report.ok:
            raise ValidationError(report)
    return space


def load_map_word(path) -> MapWord:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read map word: {exc}") from None
    if not isinstance(data, list):
        raise InputError("map word JSON must be a list of factors")
    return MapWord.from_list(data)


def jsonable(obj):
    """Convert numpy / Fraction / infinity values to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if is_inf(obj):
        return "inf"
    if type(obj).__name__ == "PointAtInfinity":
        return "inf"
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
