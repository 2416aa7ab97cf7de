"""File formats: JSON pmf input, CSV/JSON results, JSON metadata sidecars."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .discrete import JointPmf, validate_pmf
from .errors import ParseError, ValidationError

SIG_DIGITS = 9


def fmt(v: Any) -> str:
    """Canonical text for one CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if f == 0.0:
            return "0"
        return format(f, f".{SIG_DIGITS}g")
    return str(v)


def _round_json(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _round_json(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_round_json(x) for x in v]
    if isinstance(v, np.ndarray):
        return _round_json(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(fmt(float(v))) if np.isfinite(v) else str(float(v))
    return v


def load_pmf(path) -> JointPmf:
    """Read ``{"pmf": [[...], ...]}`` (rows index x) and validate it."""
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "pmf" not in doc:
        raise ParseError(f"{path}: field 'pmf' missing")
    raw = doc["pmf"]
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        raise ParseError(f"{path}: field 'pmf' must be a list of rows")
    try:
        return validate_pmf(raw)
    except ValidationError as exc:
        raise type(exc)(f"{path}: field 'pmf': {exc}") from exc


def dump_pmf(p: JointPmf, path) -> None:
    Path(path).write_text(json.dumps({"pmf": p.to_list()}) + "\n")


def csv_text(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        if len(r) != len(columns):
            raise ValidationError("row length differs from header")
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj: Any) -> str:
    return json.dumps(_round_json(obj), sort_keys=True, indent=2) + "\n"


def emit(results, fmt_: str, path, meta: dict | None = None) -> Path:
    """Write ``results`` and, when ``meta`` is given, ``<path>.meta.json`` beside it.

    CSV results are ``(columns, rows)``; JSON results are any JSON-able object.
    """
    path = Path(path)
    if fmt_ == "csv":
        columns, rows = results
        text = csv_text(columns, rows)
    elif fmt_ == "json":
        text = json_text(results)
    else:
        raise ValidationError(f"unknown format {fmt_!r}")
    path.write_text(text)
    if meta is not None:
        sidecar_path(path).write_text(json_text(meta))
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def load_csv(path) -> tuple[list[str], list[list[Any]]]:
    """Inverse of the CSV branch of :func:`emit`.  Numbers come back as floats, text as text."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        rows = []
        for lineno, r in enumerate(reader, start=2):
            if len(r) != len(columns):
                raise ParseError(f"{path}: line {lineno}: {len(r)} fields, header has {len(columns)}")
            out = []
            for cell in r:
                if cell in ("true", "false"):
                    out.append(cell == "true")
                    continue
                try:
                    out.append(float(cell))
                except ValueError:
                    out.append(cell)
            rows.append(out)
    return columns, rows


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
