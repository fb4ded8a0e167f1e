"""Outlier-resistant ellipse estimators.

* :func:`fit_mest` -- Cauchy M-estimator solved by iteratively reweighted
  algebraic least squares.
* :func:`fit_lmeds` -- least median of squares over random 5-point subsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebraic import build_design, fit_als, fit_exact_5, solve_weighted
from .errors import EllipseFitError, NoValidSubset
from .geometry import ConicCoefficients, as_points, conic_to_geometric
from .orthogonal import fit_ols, orthogonal_distances
from .report import FitReport

__all__ = [
    "RhoFunction",
    "CAUCHY",
    "cauchy_weight",
    "robust_sigma",
    "default_subset_count",
    "SubsetTrial",
    "fit_mest",
    "fit_lmeds",
]

CAUCHY_TUNING = 2.3849
MAD_TO_SIGMA = 1.4826
RESIDUAL_KINDS = ("algebraic", "orthogonal")


def cauchy_weight(d, c: float):
    """Cauchy weight ``1 / (1 + (d/c)^2)``."""
    if c <= 0:
        raise ValueError("scale c must be positive")
    u = np.asarray(d, dtype=float) / c
    w = 1.0 / (1.0 + u * u)
    return float(w) if np.ndim(w) == 0 else w


def _cauchy_rho(d, c):
    u = np.asarray(d, dtype=float) / c
    return 0.5 * c * c * np.log1p(u * u)


def _cauchy_psi(d, c):
    d = np.asarray(d, dtype=float)
    return d / (1.0 + (d / c) ** 2)


@dataclass(frozen=True)
class RhoFunction:
    """Loss ``rho``, influence ``psi = rho'`` and weight ``psi(d)/d``."""

    name: str
    rho: Callable
    psi: Callable
    weight: Callable
    tuning: float


CAUCHY = RhoFunction("cauchy", _cauchy_rho, _cauchy_psi, cauchy_weight, CAUCHY_TUNING)


def robust_sigma(residuals) -> float:
    """MAD estimate of the residual standard deviation (residuals centred at 0)."""
    return MAD_TO_SIGMA * float(np.median(np.abs(residuals)))


def _residuals(kind, design, p, pts):
    if kind == "algebraic":
        return design.residuals(p)
    ellipse = conic_to_geometric(ConicCoefficients.from_reduced(p))
    return orthogonal_distances(ellipse, pts)


def _check_kind(kind):
    if kind not in RESIDUAL_KINDS:
        raise ValueError(f"residual_kind must be one of {RESIDUAL_KINDS}, got {kind!r}")


def fit_mest(
    points,
    c: float | None = None,
    residual_kind: str = "algebraic",
    *,
    rho: RhoFunction = CAUCHY,
    weight_fn: Callable | None = None,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> FitReport:
    """M-estimator ellipse fit by iteratively reweighted least squares.

    Parameters
    ----------
    points : PointSet or (n, 2) array
    c : float, optional
        Fixed scale of the weight function. By default it is recomputed
        every iteration as ``2.3849 * 1.4826 * median(|d|)``.
    residual_kind : {"algebraic", "orthogonal"}
        Residual fed to the weight function. The weighted problem itself is
        always the linear algebraic one.
    weight_fn : callable ``(d, c) -> w``, optional
        Overrides ``rho.weight``.

    Returns
    -------
    FitReport
        ``weights`` are the weights implied by the final residuals; values
        near zero mark likely outliers. ``converged`` is False when the
        budget ran out (the last iterate is returned).
    """
    _check_kind(residual_kind)
    pts = as_points(points)
    design = build_design(pts)
    wfun = weight_fn if weight_fn is not None else rho.weight
    p = fit_als(pts).params

    def weights_for(p):
        d = _residuals(residual_kind, design, p, pts)
        scale = c
        if scale is None:
            dmax = float(np.max(np.abs(d)))
            if dmax == 0.0:
                return d, np.ones_like(d), 0.0
            # a floor keeps the scale positive when most residuals vanish
            scale = max(rho.tuning * robust_sigma(d), 1e-12 * dmax)
        return d, np.asarray(wfun(d, scale), dtype=float) * np.ones_like(d), scale

    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        _, w, _ = weights_for(p)
        p_new = solve_weighted(design, w)
        step = np.linalg.norm(p_new - p)
        p = p_new
        d, w_new, _ = weights_for(p)
        history.append(float(np.sum(w_new * d * d)))
        if step < tol * (1.0 + np.linalg.norm(p)):
            converged = True
            break
    d, w, scale = weights_for(p)
    conic = ConicCoefficients.from_reduced(p)
    return FitReport(
        "mest",
        conic_to_geometric(conic),
        conic,
        d,
        iterations=it,
        converged=converged,
        params=p,
        weights=w,
        history=history,
        extra={"scale": scale, "residual_kind": residual_kind},
    )


def default_subset_count(outlier_fraction: float = 0.4, confidence: float = 0.99, p: int = 5) -> int:
    """Subsets needed to draw one outlier-free minimal set with given confidence."""
    good = (1.0 - outlier_fraction) ** p
    if good >= 1.0:
        return 1
    return int(math.ceil(math.log(1.0 - confidence) / math.log(1.0 - good)))


@dataclass(frozen=True)
class SubsetTrial:
    indices: tuple[int, ...]
    params: np.ndarray | None  # None when the minimal fit failed
    median_sq: float  # inf for failed trials


def _subset_indices(seed: int, n: int, m: int) -> list[np.ndarray]:
    children = np.random.SeedSequence(seed).spawn(m)
    return [np.random.default_rng(ch).choice(n, size=5, replace=False) for ch in children]


def _run_trial(idx, pts, design, residual_kind) -> SubsetTrial:
    key = tuple(int(i) for i in idx)
    try:
        p = fit_exact_5(pts[idx])
        conic_to_geometric(ConicCoefficients.from_reduced(p))
        r = _residuals(residual_kind, design, p, pts)
    except EllipseFitError:
        return SubsetTrial(key, None, math.inf)
    return SubsetTrial(key, p, float(np.median(r * r)))


def fit_lmeds(
    points,
    m_subsets: int | None = None,
    residual_kind: str = "algebraic",
    seed: int = 0,
    *,
    polish: bool = True,
    subsets=None,
) -> FitReport:
    """Least-median-of-squares ellipse fit.

    Draws ``m_subsets`` random 5-point subsets (each from its own child seed
    of ``seed``), fits the conic through each exactly, and keeps the one
    with the smallest median squared residual over all points. Subsets
    whose conic is singular or not an ellipse are skipped.

    ``subsets`` may supply the index tuples explicitly (e.g. an exhaustive
    enumeration), in which case ``m_subsets`` and ``seed`` are ignored.
    By default the winner is then refined by an orthogonal fit on the points
    within 2.5 robust standard deviations of it (skipped when fewer than
    five qualify or the refinement fails); ``polish=False`` returns the
    bare minimal-subset winner.
    """
    _check_kind(residual_kind)
    pts = as_points(points)
    n = pts.shape[0]
    if n < 5:
        raise NoValidSubset(f"need at least 5 points, got {n}")
    if subsets is None:
        m = default_subset_count() if m_subsets is None else int(m_subsets)
        if m < 1:
            raise ValueError("m_subsets must be >= 1")
        subsets = _subset_indices(seed, n, m)
    design = build_design(pts)
    trials = [_run_trial(np.asarray(idx), pts, design, residual_kind) for idx in subsets]
    valid = [i for i, t in enumerate(trials) if t.params is not None]
    if not valid:
        raise NoValidSubset(f"all {len(trials)} subsets failed")
    best = min(valid, key=lambda i: trials[i].median_sq)
    p = trials[best].params
    conic = ConicCoefficients.from_reduced(p)
    ellipse = conic_to_geometric(conic)
    r = _residuals(residual_kind, design, p, pts)
    sigma = MAD_TO_SIGMA * (1.0 + 5.0 / max(n - 5, 1)) * math.sqrt(trials[best].median_sq)
    inliers = np.abs(r) <= 2.5 * sigma
    extra = {
        "trials": trials,
        "best_index": best,
        "subset_ellipse": ellipse,
        "failed": len(trials) - len(valid),
        "inliers": inliers,
        "robust_sigma": sigma,
        "residual_kind": residual_kind,
    }
    report = FitReport("lmeds", ellipse, conic, r, iterations=len(trials), params=p, extra=extra)
    if polish and inliers.sum() >= 5:
        try:
            refined = fit_ols(pts[inliers], ellipse)
        except EllipseFitError as exc:
            extra["polish_error"] = f"{type(exc).__name__}: {exc}"
            return report
        report.ellipse = refined.ellipse
        report.conic = refined.conic
        report.params = refined.conic.reduced()
        report.residuals = orthogonal_distances(refined.ellipse, pts)
        extra["polish"] = refined
    return report
