"""Mode files and report serialization.

JSON mode file::

    {"q": 0.5, "modes": [{"k": 0, "l": 1, "re": 1.0, "im": 0.0}, ...]}

CSV mode file: header ``k,l,re,im``; an optional leading ``# q=<value>``
comment carries the deformation parameter.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import sys
from pathlib import Path
from typing import IO, Any

from .lattice import QLattice
from .modes import ModeFunction

DROP_BELOW = 1e-300
CSV_HEADER = ["k", "l", "re", "im"]


class ModeFileError(ValueError):
    """Malformed mode file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<input>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


def fmt_float(x: float) -> str:
    """17 significant digits; non-finite values become quoted strings."""
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with keys in insertion order and floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _records(f: ModeFunction) -> list[tuple[int, int, complex]]:
    return [(k, l, complex(v)) for (k, l), v in sorted(f.items()) if abs(v) >= DROP_BELOW]


def modes_to_json(f: ModeFunction) -> str:
    modes = [{"k": k, "l": l, "re": v.real, "im": v.imag} for k, l, v in _records(f)]
    return dumps({"q": f.q, "modes": modes}) + "\n"


def modes_to_csv(f: ModeFunction) -> str:
    buf = io.StringIO()
    buf.write(f"# q={fmt_float(f.q)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for k, l, v in _records(f):
        w.writerow([k, l, fmt_float(v.real), fmt_float(v.imag)])
    return buf.getvalue()


def write_modes(f: ModeFunction, path: str | Path | None, fmt: str = "json", stream: IO[str] | None = None) -> None:
    text = modes_to_json(f) if fmt == "json" else modes_to_csv(f)
    if path is None:
        (stream or sys.stdout).write(text)
    else:
        Path(path).write_text(text)


def _int_field(rec: dict, key: str, idx: int, line: int | None, source: str) -> int:
    v = rec.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ModeFileError(f"mode {idx}: field {key!r} must be an integer, got {v!r}", line, source)
    return v


def _num_field(rec: dict, key: str, idx: int, line: int | None, source: str) -> float:
    v = rec.get(key, 0.0)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ModeFileError(f"mode {idx}: field {key!r} must be a finite number, got {v!r}", line, source)
    return float(v)


def _record_lines(text: str) -> list[int]:
    """Line numbers of the opening braces after the ``modes`` key."""
    start = text.find('"modes"')
    if start < 0:
        return []
    return [text.count("\n", 0, m.start()) + 1 for m in re.finditer(r"\{", text) if m.start() > start]


def parse_modes_json(text: str, source: str = "<input>") -> ModeFunction:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModeFileError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno, source) from None
    if not isinstance(doc, dict):
        raise ModeFileError("top level must be an object with 'q' and 'modes'", 1, source)
    q = doc.get("q")
    if isinstance(q, bool) or not isinstance(q, (int, float)):
        raise ModeFileError(f"'q' must be a number, got {q!r}", None, source)
    try:
        lattice = QLattice(q)
    except ValueError as exc:
        raise ModeFileError(str(exc), None, source) from None
    modes = doc.get("modes")
    if not isinstance(modes, list):
        raise ModeFileError("'modes' must be a list", None, source)
    lines = _record_lines(text)
    coeffs: dict[tuple[int, int], complex] = {}
    for i, rec in enumerate(modes):
        line = lines[i] if i < len(lines) else None
        if not isinstance(rec, dict):
            raise ModeFileError(f"mode {i}: expected an object, got {rec!r}", line, source)
        k = _int_field(rec, "k", i, line, source)
        l = _int_field(rec, "l", i, line, source)
        v = complex(_num_field(rec, "re", i, line, source), _num_field(rec, "im", i, line, source))
        coeffs[(k, l)] = coeffs.get((k, l), 0j) + v
    return ModeFunction(lattice, coeffs)


_Q_COMMENT = re.compile(r"^#\s*q\s*=\s*(\S+)\s*$")


def parse_modes_csv(text: str, default_q: float | None = None, source: str = "<input>") -> ModeFunction:
    q = default_q
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("#"):
            m = _Q_COMMENT.match(raw)
            if m:
                try:
                    q = float(m.group(1))
                except ValueError:
                    raise ModeFileError(f"bad q value {m.group(1)!r}", lineno, source) from None
            continue
        if raw.strip():
            body.append((lineno, raw))
    if q is None:
        raise ModeFileError("no '# q=' line and no default q supplied", None, source)
    try:
        lattice = QLattice(q)
    except ValueError as exc:
        raise ModeFileError(str(exc), None, source) from None
    if not body:
        raise ModeFileError("missing header 'k,l,re,im'", None, source)
    rows = csv.reader([r for _, r in body])
    header = [h.strip() for h in next(rows)]
    if header != CSV_HEADER:
        raise ModeFileError(f"header must be {','.join(CSV_HEADER)}, got {','.join(header)}", body[0][0], source)
    coeffs: dict[tuple[int, int], complex] = {}
    for (lineno, _), row in zip(body[1:], rows):
        if len(row) != 4:
            raise ModeFileError(f"expected 4 fields, got {len(row)}", lineno, source)
        try:
            k, l = int(row[0]), int(row[1])
            re_, im_ = float(row[2]), float(row[3])
        except ValueError as exc:
            raise ModeFileError(f"bad value: {exc}", lineno, source) from None
        if not (math.isfinite(re_) and math.isfinite(im_)):
            raise ModeFileError("coefficients must be finite", lineno, source)
        coeffs[(k, l)] = coeffs.get((k, l), 0j) + complex(re_, im_)
    return ModeFunction(lattice, coeffs)


def read_modes(path: str | Path, fmt: str | None = None, default_q: float | None = None) -> ModeFunction:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModeFileError(f"cannot read: {exc.strerror}", None, str(path)) from None
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    if fmt == "csv":
        return parse_modes_csv(text, default_q, str(path))
    return parse_modes_json(text, str(path))
