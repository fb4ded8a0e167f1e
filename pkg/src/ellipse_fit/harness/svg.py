"""Standalone SVG plots of measurements and fitted ellipses."""

from __future__ import annotations

import math
import os
from xml.sax.saxutils import escape

import numpy as np

from ..geometry import GeometricEllipse, PointSet, sample_parametric

PALETTE = ["#000000", "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b"]
CURVE_SAMPLES = 360


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_svg_string(
    points: PointSet | None,
    ellipses: list[tuple[str, GeometricEllipse]],
    width: int = 640,
) -> str:
    curves = []
    for name, e in ellipses:
        t = np.linspace(0.0, 2.0 * math.pi, CURVE_SAMPLES + 1)
        curves.append((name, sample_parametric(e, t).points))
    clouds = [points.points] if points is not None else []
    allpts = np.vstack(clouds + [c for _, c in curves]) if (clouds or curves) else np.zeros((1, 2))
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    pad = 0.05 * span
    lo = lo - pad
    span += 2 * pad
    legend_h = 18 * (len(ellipses) + (1 if points is not None else 0)) + 10
    # one scale for both axes keeps the aspect ratio equal
    scale = width / span
    plot_h = (hi[1] - lo[1] + pad) * scale
    height = int(math.ceil(plot_h)) + legend_h

    def sx(x):
        return (x - lo[0]) * scale

    def sy(y):
        return plot_h - (y - lo[1]) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if points is not None:
        labels = points.labels if points.labels is not None else np.zeros(len(points), bool)
        out.append('<g id="measurements">')
        for (x, y), is_out in zip(points.points, labels):
            colour = "#d62728" if is_out else "#555555"
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2" fill="{colour}"/>')
        out.append("</g>")
    for k, (name, c) in enumerate(curves):
        colour = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in c)
        out.append(
            f'<polyline id="ellipse-{k}" fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>'
        )
    y0 = plot_h + 16
    out.append('<g id="legend" font-family="sans-serif" font-size="12">')
    row = 0
    if points is not None:
        out.append(f'<circle cx="12" cy="{_fmt(y0 - 4)}" r="3" fill="#555555"/>')
        out.append(f'<text x="24" y="{_fmt(y0)}">measurements</text>')
        row += 1
    for k, (name, _) in enumerate(curves):
        y = y0 + 18 * row
        colour = PALETTE[k % len(PALETTE)]
        out.append(f'<line x1="4" y1="{_fmt(y - 4)}" x2="20" y2="{_fmt(y - 4)}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="24" y="{_fmt(y)}">{escape(name)}</text>')
        row += 1
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(points: PointSet | None, ellipses, path: str | os.PathLike) -> None:
    """Write measurement dots, one closed polyline per ellipse and a legend."""
    text = render_svg_string(points, list(ellipses))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
