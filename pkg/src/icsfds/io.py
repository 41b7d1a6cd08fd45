"""CSV and JSON readers/writers used by the command line.

CSV files are comma separated, UTF-8, with a mandatory header row. Floats
are written with ``repr`` so they round-trip exactly.
"""

import csv
import io
import json
import math
import sys

import numpy as np

from .errors import ParseError


def read_numeric_csv(source):
    """Header and (n, p) float array from a CSV path or text stream.

    Raises ParseError naming the 1-based data row and column of the first bad cell.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV input: a header row is required") from None
    header = [h.strip() for h in header]
    if not header or any(h == "" for h in header):
        raise ParseError("header row has empty column names", row=0)
    rows = []
    for r, cells in enumerate(reader, start=1):
        if not cells or all(c.strip() == "" for c in cells):
            continue
        if len(cells) != len(header):
            raise ParseError(f"row {r} has {len(cells)} cells, header has {len(header)}", row=r)
        values = []
        for c, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric value {cell!r} at row {r}, column {c} ({header[c - 1]})",
                                 row=r, column=c) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {cell!r} at row {r}, column {c} ({header[c - 1]})",
                                 row=r, column=c)
            values.append(v)
        rows.append(values)
    if not rows:
        raise ParseError("CSV input has a header but no data rows")
    return header, np.array(rows, dtype=float)


def _read_text(source):
    if hasattr(source, "read"):
        return source.read()
    if source == "-":
        return sys.stdin.read()
    with open(source, encoding="utf-8", newline="") as fh:
        return fh.read()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (tuple, list)):
        return " ".join(_cell(x) for x in v)
    return "" if v is None else str(v)


def write_csv(rows, target, columns=None):
    """Write dict rows (or a dict of equal-length columns) as CSV."""
    if isinstance(rows, dict):
        columns = columns or list(rows)
        n = len(rows[columns[0]]) if columns else 0
        it = (tuple(rows[c][i] for c in columns) for i in range(n))
    else:
        rows = list(rows)
        if columns is None:
            columns = list(rows[0]) if rows else []
        it = (tuple(r.get(c) for c in columns) for r in rows)
    fh, close = _open_out(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in it:
            w.writerow([_cell(v) for v in row])
    finally:
        if close:
            fh.close()


def write_matrix_csv(matrix, header, target):
    fh, close = _open_out(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.asarray(matrix):
            w.writerow([repr(float(v)) for v in row])
    finally:
        if close:
            fh.close()


def _parse_cell(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def read_csv(source):
    """Dict rows with ints, floats and booleans converted back from text."""
    reader = csv.DictReader(io.StringIO(_read_text(source)))
    if reader.fieldnames is None:
        raise ParseError("empty CSV input: a header row is required")
    return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_json(obj):
    """JSON text; floats use the shortest repr that round-trips (17 significant digits max)."""
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(obj, target):
    fh, close = _open_out(target)
    try:
        fh.write(dumps_json(obj))
    finally:
        if close:
            fh.close()


def read_json(source):
    return json.loads(_read_text(source))


def _open_out(target):
    if target is None or target == "-":
        return sys.stdout, False
    if hasattr(target, "write"):
        return target, False
    return open(target, "w", encoding="utf-8", newline=""), True
