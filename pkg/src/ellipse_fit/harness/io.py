"""CSV point files: header ``x,y`` or ``x,y,label``, one point per line."""

from __future__ import annotations

import csv
import os

import numpy as np

from ..errors import EmptyPointSet, MalformedFile
from ..geometry import PointSet

LABEL_INLIER = "inlier"
LABEL_OUTLIER = "outlier"


def format_number(v: float) -> str:
    """Shortest round-trip decimal, with integral values written without ``.0``."""
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def points_to_csv(points: PointSet) -> str:
    labelled = points.labels is not None
    lines = ["x,y,label" if labelled else "x,y"]
    for i, (x, y) in enumerate(points.points):
        row = f"{format_number(x)},{format_number(y)}"
        if labelled:
            row += "," + (LABEL_OUTLIER if points.labels[i] else LABEL_INLIER)
        lines.append(row)
    return "\n".join(lines) + "\n"


def write_csv(points: PointSet, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(points_to_csv(points))


def read_csv(path: str | os.PathLike) -> PointSet:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedFile("missing header", 1)
    header = [h.strip() for h in rows[0]]
    if header not in (["x", "y"], ["x", "y", "label"]):
        raise MalformedFile(f"expected header 'x,y' or 'x,y,label', got {','.join(rows[0])!r}", 1)
    labelled = len(header) == 3
    pts, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise MalformedFile(f"expected {len(header)} fields, got {len(row)}", lineno)
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise MalformedFile(f"non-numeric coordinate in {','.join(row)!r}", lineno) from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise MalformedFile("non-finite coordinate", lineno)
        pts.append((x, y))
        if labelled:
            lab = row[2].strip().lower()
            if lab not in (LABEL_INLIER, LABEL_OUTLIER):
                raise MalformedFile(f"label must be {LABEL_INLIER!r} or {LABEL_OUTLIER!r}", lineno)
            labels.append(lab == LABEL_OUTLIER)
    if not pts:
        raise EmptyPointSet(f"{path}: no points (PointSet must be non-empty)")
    return PointSet(np.array(pts), np.array(labels) if labelled else None)
