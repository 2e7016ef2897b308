"""Persisted formats: assembly JSON documents and the CSV tables.

Lengths in assembly documents are always metres.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, TextIO

from .device import TofSample
from .errors import InvalidArgumentError, InvalidDataError
from .geometry import CircularLoop, ConductorAssembly, StraightSegment, validate_assembly


class ParseError(InvalidArgumentError):
    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


def fmt(x: float) -> str:
    """Shortest round-trip decimal for a float (at most 17 significant digits)."""
    x = float(x)
    if x == 0.0:
        return "0.0"  # also folds -0.0
    return repr(x)


def _vec(obj, key, where):
    v = obj.get(key)
    if not (isinstance(v, list) and len(v) == 3 and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ParseError(f"{where}: '{key}' must be a list of three numbers")
    return tuple(float(c) for c in v)


def _num(obj, key, where, default=None):
    if key not in obj:
        if default is not None:
            return default
        raise ParseError(f"{where}: missing '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParseError(f"{where}: '{key}' must be a finite number")
    return float(v)


def assembly_from_dict(doc) -> ConductorAssembly:
    if not isinstance(doc, dict):
        raise ParseError("assembly document must be a JSON object")
    raw = doc.get("elements")
    if not isinstance(raw, list) or not raw:
        raise ParseError("'elements' must be a non-empty list")
    elements = []
    for i, e in enumerate(raw):
        where = f"elements[{i}]"
        if not isinstance(e, dict):
            raise ParseError(f"{where}: must be an object")
        kind = e.get("type")
        if kind == "loop":
            elements.append(
                CircularLoop(_vec(e, "center", where), _vec(e, "axis", where), _num(e, "radius", where), _num(e, "current", where))
            )
        elif kind == "segment":
            elements.append(StraightSegment(_vec(e, "start", where), _vec(e, "end", where), _num(e, "current", where)))
        else:
            raise ParseError(f"{where}: unknown element type {kind!r}")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ParseError("'label' must be a string")
    a = ConductorAssembly(tuple(elements), label, _num(doc, "drive_scale", "document", default=1.0))
    problems = validate_assembly(a)
    if problems:
        raise ParseError("invalid assembly: " + "; ".join(problems))
    return a


def load_assembly(text: str) -> ConductorAssembly:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return assembly_from_dict(doc)


def assembly_to_dict(a: ConductorAssembly) -> dict:
    elements = []
    for e in a.elements:
        if isinstance(e, CircularLoop):
            elements.append(
                {"type": "loop", "center": list(e.center), "axis": list(e.axis), "radius": e.radius, "current": e.current}
            )
        else:
            elements.append({"type": "segment", "start": list(e.start), "end": list(e.end), "current": e.current})
    return {"label": a.label, "elements": elements, "drive_scale": a.drive_scale}


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_csv(header: Iterable[str], rows: Iterable[Iterable[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _read_table(stream: TextIO, columns: tuple[str, str]) -> list[tuple[float, float]]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV input") from None
    if [h.strip() for h in header] != list(columns):
        raise ParseError(f"expected header {','.join(columns)}, got {','.join(header)}", 1, 1)
    out = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", reader.line_num, 1)
        try:
            vals = (float(row[0]), float(row[1]))
        except ValueError:
            raise ParseError(f"non-numeric value in {row!r}", reader.line_num, 1) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", reader.line_num, 1)
        out.append(vals)
    return out


def read_tof_csv(stream: TextIO) -> list[TofSample]:
    """Samples from a ``t_s,sigma_m`` table."""
    rows = _read_table(stream, ("t_s", "sigma_m"))
    try:
        return [TofSample(t, s) for t, s in rows]
    except InvalidDataError as exc:
        raise ParseError(str(exc)) from None


def read_profile_csv(stream: TextIO) -> list[tuple[float, float]]:
    """(position, value) pairs from an ``x,value`` table."""
    return _read_table(stream, ("x", "value"))


def tof_csv(samples: Iterable[TofSample]) -> str:
    return write_csv(("t_s", "sigma_m"), ((s.t, s.sigma) for s in samples))
