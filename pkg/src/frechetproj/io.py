"""Text formats for curves, distance matrices and GISCUP-style trajectories.

Curve file::

    # comment lines start with '#'
    d t
    x_1 ... x_d        (t lines)

Matrix file: same layout with a ``rows cols`` header followed by the rows.
Files are UTF-8 with LF line endings; floats are written with 17 significant
digits so that a write/read round trip is exact.
"""

from pathlib import Path

import numpy as np

from .errors import CurveFormatError
from .geom import MAX_DIM


def fmt(x):
    return "%.17g" % x


def _content_lines(text):
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _parse_table(text, path, what):
    lines = _content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise CurveFormatError(f"empty {what} file", path) from None
    parts = header.split()
    if len(parts) != 2:
        raise CurveFormatError(f"header must hold two integers, got {header!r}", path, lineno)
    try:
        first, second = (int(x) for x in parts)
    except ValueError:
        raise CurveFormatError(f"header must hold two integers, got {header!r}", path, lineno) from None
    if what == "curve":
        width, count = first, second
    else:
        count, width = first, second
    if width < 1 or count < 1:
        raise CurveFormatError(f"header values must be positive, got {header!r}", path, lineno)
    rows = []
    for lineno, line in lines:
        fields = line.split()
        if len(fields) != width:
            raise CurveFormatError(f"expected {width} numbers, got {len(fields)}", path, lineno)
        try:
            rows.append([float(x) for x in fields])
        except ValueError:
            raise CurveFormatError(f"not a number in {line!r}", path, lineno) from None
        if not all(np.isfinite(rows[-1])):
            raise CurveFormatError("non-finite value", path, lineno)
    if len(rows) != count:
        raise CurveFormatError(f"header announces {count} rows, found {len(rows)}", path)
    return np.array(rows, dtype=np.float64).reshape(count, width)


def parse_curve(text, path=None):
    P = _parse_table(text, path, "curve")
    if P.shape[1] > MAX_DIM:
        raise CurveFormatError(f"dimension {P.shape[1]} exceeds {MAX_DIM}", path, 1)
    return P


def read_curve(path):
    return parse_curve(Path(path).read_text(encoding="utf-8"), path)


def format_curve(P, comment=None):
    P = np.asarray(P, dtype=np.float64)
    out = []
    if comment:
        out.extend(f"# {line}" for line in comment.splitlines())
    out.append(f"{P.shape[1]} {P.shape[0]}")
    out.extend(" ".join(fmt(x) for x in row) for row in P)
    return "\n".join(out) + "\n"


def write_curve(path, P, comment=None):
    Path(path).write_text(format_curve(P, comment), encoding="utf-8", newline="\n")


def read_matrix(path):
    text = Path(path).read_text(encoding="utf-8")
    D = _parse_table(text, path, "matrix")
    if np.any(D < 0):
        raise CurveFormatError("distance matrix entries must be nonnegative", path)
    return D


def write_matrix(path, D, comment=None):
    D = np.asarray(D, dtype=np.float64)
    out = []
    if comment:
        out.extend(f"# {line}" for line in comment.splitlines())
    out.append(f"{D.shape[0]} {D.shape[1]}")
    out.extend(" ".join(fmt(x) for x in row) for row in D)
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")


def parse_giscup(text, path=None):
    """Parse a GISCUP 2017 trajectory file (``x y k tid`` rows, optional header)."""
    rows = []
    for lineno, line in _content_lines(text):
        fields = line.split()
        try:
            x, y = float(fields[0]), float(fields[1])
        except (ValueError, IndexError):
            if not rows and fields and fields[0].lower() == "x":
                continue  # header
            raise CurveFormatError(f"cannot read x y from {line!r}", path, lineno) from None
        rows.append((x, y))
    if not rows:
        raise CurveFormatError("no vertices", path)
    return np.array(rows, dtype=np.float64)


def load_curve(path):
    """Read a curve file in the native format, falling back to GISCUP rows."""
    text = Path(path).read_text(encoding="utf-8")
    for _, line in _content_lines(text):
        parts = line.split()
        if len(parts) == 2 and all(p.lstrip("-").isdigit() for p in parts):
            return parse_curve(text, path)
        break
    return parse_giscup(text, path)
