"""Least-squares fit of the algebraic distance under ``a + c = 1``.

With ``c = 1 - a`` the conic becomes ``phi . p - z`` where
``phi = [x^2 - y^2, 2xy, 2x, 2y, 1]``, ``p = (a, b, d, e, f)`` and
``z = -y^2``; the fit is an ordinary linear least-squares problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, SingularSystem
from .geometry import ConicCoefficients, as_points, conic_to_geometric
from .report import FitReport

__all__ = ["DesignSystem", "build_design", "solve_weighted", "fit_als", "fit_exact_5", "RANK_TOL"]

RANK_TOL = 1e-10
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class DesignSystem:
    Phi: np.ndarray
    y: np.ndarray

    def residuals(self, p) -> np.ndarray:
        return self.Phi @ np.asarray(p, dtype=float) - self.y


def build_design(points) -> DesignSystem:
    pts = as_points(points)
    x, y = pts[:, 0], pts[:, 1]
    Phi = np.column_stack([x * x - y * y, 2 * x * y, 2 * x, 2 * y, np.ones_like(x)])
    return DesignSystem(Phi, -(y * y))


def solve_weighted(design: DesignSystem, weights=None) -> np.ndarray:
    """Minimise ``sum w_i (phi_i p - z_i)^2``; ``weights=None`` is plain LS.

    Solved by an orthogonal factorisation of the row-scaled system. Unit
    weights reproduce the unweighted solution bit for bit.
    """
    Phi, y = design.Phi, design.y
    if weights is not None:
        s = np.sqrt(np.asarray(weights, dtype=float))
        Phi = Phi * s[:, None]
        y = y * s
    if Phi.shape[0] < 5:
        raise RankDeficient(f"need at least 5 points, got {Phi.shape[0]}")
    p, _, _, sv = np.linalg.lstsq(Phi, y, rcond=None)
    if not sv[0] > 0 or sv[-1] < RANK_TOL * sv[0]:
        raise RankDeficient(
            f"design matrix is rank deficient (sigma_min/sigma_max = {sv[-1] / sv[0] if sv[0] else 0:.2e})"
        )
    return p


def _similarity_params(pts: np.ndarray):
    centroid = pts.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum((pts - centroid) ** 2, axis=1)))
    scale = rms / np.sqrt(2.0) if rms > 0 else 1.0
    return centroid, scale


def _unscale_reduced(p, centroid, scale) -> np.ndarray:
    # conic in u = (x - m) / s  ->  conic in x, then back to a + c = 1
    a, b, d, e, f = p
    A = np.array([[a, b], [b, 1.0 - a]])
    g = np.array([d, e])
    Ax = A / scale**2
    gx = g / scale - A @ centroid / scale**2
    fx = centroid @ A @ centroid / scale**2 - 2 * g @ centroid / scale + f
    conic = ConicCoefficients(Ax[0, 0], Ax[0, 1], Ax[1, 1], gx[0], gx[1], fx)
    return conic.reduced()


def fit_als(points, precondition: bool = False) -> FitReport:
    """Algebraic least-squares ellipse fit.

    Parameters
    ----------
    points : PointSet or array-like of shape (n, 2)
        At least five measurements.
    precondition : bool
        Shift to the centroid and scale to RMS radius sqrt(2) before
        solving. The ``a + c = 1`` fit is similarity invariant, so this only
        changes rounding behaviour.

    Returns
    -------
    FitReport
        ``params`` is ``(a, b, d, e, f)``, ``residuals`` the algebraic
        residuals ``Phi p - y`` on the original data.

    Raises
    ------
    RankDeficient
        Smallest singular value of the design below 1e-10 of the largest.
    NotAnEllipse
        The minimiser is a hyperbola or parabola.
    """
    pts = as_points(points)
    design = build_design(pts)
    if precondition:
        centroid, scale = _similarity_params(pts)
        p = solve_weighted(build_design((pts - centroid) / scale))
        p = _unscale_reduced(p, centroid, scale)
    else:
        p = solve_weighted(design)
    conic = ConicCoefficients.from_reduced(p)
    ellipse = conic_to_geometric(conic)
    res = design.residuals(p)
    return FitReport("als", ellipse, conic, res, iterations=1, params=p, history=[float(res @ res)])


def fit_exact_5(points) -> np.ndarray:
    """Conic through exactly five points; returns ``(a, b, d, e, f)``.

    The result is not checked for being an ellipse.
    """
    pts = as_points(points)
    if pts.shape[0] != 5:
        raise ValueError(f"fit_exact_5 needs exactly 5 points, got {pts.shape[0]}")
    design = build_design(pts)
    sv = np.linalg.svd(design.Phi, compute_uv=False)
    if not sv[0] > 0 or sv[-1] < SINGULAR_TOL * sv[0]:
        raise SingularSystem("5-point system is singular")
    return np.linalg.solve(design.Phi, design.y)
