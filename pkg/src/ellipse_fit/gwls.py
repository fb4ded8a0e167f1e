"""Gradient-weighted algebraic least squares.

Each algebraic residual is divided by the squared gradient norm of the conic
at that point, which approximates the squared orthogonal distance. Because
the weights depend on the parameters the weighted problem is solved by
fixed-point iteration starting from the plain algebraic fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebraic import build_design, fit_als, solve_weighted
from .geometry import ConicCoefficients, as_points, conic_to_geometric
from .report import FitReport

__all__ = ["GradientWeights", "gradient_sq", "gradient_weights", "fit_gwls"]

WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class GradientWeights:
    w: np.ndarray
    floor: float


def gradient_sq(p, point):
    """Squared gradient norm of the ``a + c = 1`` conic at ``point``.

    Works on a single point or an ``(n, 2)`` array.
    """
    a, b, d, e, f = np.asarray(p, dtype=float)
    pt = np.asarray(point, dtype=float)
    x, y = pt[..., 0], pt[..., 1]
    gx = 2 * a * x + 2 * b * y + 2 * d
    gy = -2 * a * y + 2 * b * x + 2 * e + 2 * y
    g = gx * gx + gy * gy
    return float(g) if np.ndim(g) == 0 else g


def gradient_weights(p, points) -> GradientWeights:
    g = np.atleast_1d(gradient_sq(p, as_points(points)))
    floor = WEIGHT_FLOOR * float(np.max(g)) if np.max(g) > 0 else WEIGHT_FLOOR
    return GradientWeights(np.maximum(g, floor), floor)


def fit_gwls(
    points,
    p0=None,
    *,
    max_iter: int = 100,
    tol: float = 1e-10,
    reweight: bool = True,
) -> FitReport:
    """Gradient-weighted least-squares ellipse fit.

    ``reweight=False`` performs a single solve with ``W = I`` and therefore
    returns the algebraic fit itself. If the iteration does not settle
    within ``max_iter`` steps the iterate with the smallest weighted
    criterion is returned with ``converged=False``.
    """
    pts = as_points(points)
    design = build_design(pts)
    if not reweight:
        p = solve_weighted(design)
        res = design.residuals(p)
        conic = ConicCoefficients.from_reduced(p)
        return FitReport(
            "gwls", conic_to_geometric(conic), conic, res, iterations=1, params=p,
            weights=np.ones(len(res)), history=[float(res @ res)],
        )

    p = fit_als(pts).params if p0 is None else np.asarray(p0, dtype=float)
    history = []
    best = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        W = gradient_weights(p, pts).w
        p_new = solve_weighted(design, 1.0 / W)
        res = design.residuals(p_new)
        Wn = gradient_weights(p_new, pts).w
        crit = float(np.sum(res * res / Wn))
        history.append(crit)
        if best is None or crit < best[0]:
            best = (crit, p_new)
        step = np.linalg.norm(p_new - p)
        p = p_new
        if step < tol * (1.0 + np.linalg.norm(p)):
            converged = True
            break
    if not converged:
        p = best[1]
    res = design.residuals(p)
    W = gradient_weights(p, pts).w
    conic = ConicCoefficients.from_reduced(p)
    return FitReport(
        "gwls",
        conic_to_geometric(conic),
        conic,
        res / np.sqrt(W),
        iterations=it,
        converged=converged,
        params=p,
        weights=1.0 / W,
        history=history,
    )

