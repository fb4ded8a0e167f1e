"""Synthetic scenarios, method comparison and Monte Carlo statistics."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..algebraic import fit_als
from ..errors import EllipseFitError
from ..geometry import GeometricEllipse, PointSet, canonicalize_geometric, sample_parametric
from ..gwls import fit_gwls
from .io import format_number
from ..orthogonal import fit_ols
from ..report import FitReport
from ..robust import fit_lmeds, fit_mest

__all__ = [
    "OutlierModel",
    "ScenarioConfig",
    "inlier_scenario",
    "outlier_scenario",
    "generate",
    "METHODS",
    "METHOD_LABELS",
    "resolve_methods",
    "run_method",
    "ParameterErrors",
    "parameter_errors",
    "ComparisonRow",
    "ComparisonTable",
    "compare",
    "MethodStats",
    "MonteCarloSummary",
    "monte_carlo",
    "trial_seeds",
]

OUTLIER_MODELS = ("offset", "uniform-box")


@dataclass(frozen=True)
class OutlierModel:
    """``count`` points replaced by outliers.

    ``offset`` pushes the chosen points along the outward normal by a
    distance drawn uniformly from ``magnitude``; ``uniform-box`` scatters
    them uniformly over the ellipse's bounding box.
    """

    count: int = 0
    model: str = "offset"
    magnitude: tuple[float, float] = (5.0, 15.0)

    def __post_init__(self):
        if self.model not in OUTLIER_MODELS:
            raise ValueError(f"outlier model must be one of {OUTLIER_MODELS}")
        if self.count < 0:
            raise ValueError("outlier count must be >= 0")
        lo, hi = self.magnitude
        if not 0 <= lo <= hi:
            raise ValueError("outlier magnitude must satisfy 0 <= lo <= hi")


@dataclass(frozen=True)
class ScenarioConfig:
    ellipse: GeometricEllipse = GeometricEllipse(0.0, 0.0, 24.0, 12.0, 0.0)
    n: int = 100
    t_range: tuple[float, float] = (0.5 * math.pi, 1.5 * math.pi)
    noise_sigma2: float = 0.25
    outlier: OutlierModel = field(default_factory=OutlierModel)
    seed: int = 20240101

    def __post_init__(self):
        if self.n < 5:
            raise ValueError("n must be >= 5")
        if self.noise_sigma2 < 0:
            raise ValueError("noise variance must be >= 0")
        if not self.t_range[0] < self.t_range[1]:
            raise ValueError("t_min must be < t_max")
        if self.outlier.count > self.n:
            raise ValueError("more outliers than points")


def inlier_scenario(seed: int = 20240101, n: int = 100) -> ScenarioConfig:
    return ScenarioConfig(n=n, seed=seed)


def outlier_scenario(seed: int = 20240101, n: int = 100, count: int = 10) -> ScenarioConfig:
    return ScenarioConfig(n=n, seed=seed, outlier=OutlierModel(count=count))


def generate(config: ScenarioConfig) -> PointSet:
    """Noisy samples of ``config.ellipse`` with optional outliers.

    ``t`` is equally spaced over ``t_range`` (end points included). All
    randomness comes from ``config.seed``.
    """
    rng = np.random.default_rng(config.seed)
    e = config.ellipse
    t = np.linspace(config.t_range[0], config.t_range[1], config.n)
    pts = sample_parametric(e, t).points.copy()
    if config.noise_sigma2 > 0:
        pts += rng.normal(0.0, math.sqrt(config.noise_sigma2), size=pts.shape)
    labels = np.zeros(config.n, dtype=bool)
    out = config.outlier
    if out.count:
        idx = np.sort(rng.choice(config.n, size=out.count, replace=False))
        labels[idx] = True
        ca, sa = math.cos(e.alpha), math.sin(e.alpha)
        if out.model == "offset":
            # canonical normal (b cos t, a sin t), rotated into the world frame
            nx, ny = e.b * np.cos(t[idx]), e.a * np.sin(t[idx])
            norm = np.hypot(nx, ny)
            nx, ny = nx / norm, ny / norm
            wx, wy = ca * nx - sa * ny, sa * nx + ca * ny
            dist = rng.uniform(out.magnitude[0], out.magnitude[1], size=out.count)
            pts[idx, 0] += dist * wx
            pts[idx, 1] += dist * wy
        else:
            hx = math.hypot(e.a * ca, e.b * sa)
            hy = math.hypot(e.a * sa, e.b * ca)
            pts[idx, 0] = rng.uniform(e.x_c - hx, e.x_c + hx, size=out.count)
            pts[idx, 1] = rng.uniform(e.y_c - hy, e.y_c + hy, size=out.count)
    return PointSet(pts, labels)


# --- methods -------------------------------------------------------------

def _ols(points, seed):
    return fit_ols(points, fit_als(points).ellipse)


METHODS: dict[str, Callable[[PointSet, int], FitReport]] = {
    "als": lambda pts, seed: fit_als(pts),
    "ols": _ols,
    "gwls": lambda pts, seed: fit_gwls(pts),
    "mest": lambda pts, seed: fit_mest(pts),
    "lmeds": lambda pts, seed: fit_lmeds(pts, seed=seed),
}

METHOD_LABELS = {
    "truth": "Ground truth ellipse",
    "als": "Least squares (algebraic distance)",
    "ols": "Least squares (orthogonal distance)",
    "gwls": "Gradient weighted least squares",
    "mest": "M-estimator (Cauchy)",
    "lmeds": "Least median of squares",
}


def resolve_methods(names) -> list[str]:
    """Expand ``all`` and validate method names; accepts comma lists."""
    if isinstance(names, str):
        names = [names]
    out: list[str] = []
    for item in names:
        for name in str(item).split(","):
            name = name.strip().lower()
            if not name:
                continue
            if name == "all":
                out.extend(m for m in METHODS if m not in out)
            elif name in METHODS:
                if name not in out:
                    out.append(name)
            else:
                raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}, all")
    if not out:
        raise ValueError("no methods given")
    return out


def run_method(name: str, points, seed: int = 0) -> FitReport:
    return METHODS[name](points, seed)


# --- metrics -------------------------------------------------------------

@dataclass(frozen=True)
class ParameterErrors:
    a: float
    b: float
    center: float
    alpha: float

    @property
    def geometric(self) -> float:
        """Euclidean norm of the axis and centre errors."""
        return math.sqrt(self.a**2 + self.b**2 + self.center**2)


def angular_error(alpha1: float, alpha2: float) -> float:
    d = math.fmod(abs(alpha1 - alpha2), math.pi)
    return min(d, math.pi - d)


def parameter_errors(estimate: GeometricEllipse, truth: GeometricEllipse) -> ParameterErrors:
    e = canonicalize_geometric(estimate)
    t = canonicalize_geometric(truth)
    ang = 0.0 if t.a == t.b or e.a == e.b else angular_error(e.alpha, t.alpha)
    return ParameterErrors(
        abs(e.a - t.a), abs(e.b - t.b), math.hypot(e.x_c - t.x_c, e.y_c - t.y_c), ang
    )


# --- comparison table ----------------------------------------------------

@dataclass
class ComparisonRow:
    method: str
    ellipse: GeometricEllipse | None
    errors: ParameterErrors | None = None
    iterations: int | None = None
    ms: float | None = None
    error: str | None = None


CSV_COLUMNS = ("method", "a", "b", "xc", "yc", "alpha", "err_a", "err_b", "err_center", "err_alpha", "iterations", "ms")


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_number(v)


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow]
    truth: GeometricEllipse | None = None

    def row(self, method: str) -> ComparisonRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def _cells(self, r: ComparisonRow, timing: bool):
        e, err = r.ellipse, r.errors
        vals = [r.method]
        vals += [None] * 5 if e is None else [e.a, e.b, e.x_c, e.y_c, e.alpha]
        vals += [None] * 4 if err is None else [err.a, err.b, err.center, err.alpha]
        vals += [r.iterations, r.ms if timing else None]
        return vals

    def to_csv(self, timing: bool = False) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            cells = self._cells(r, timing)
            lines.append(",".join([cells[0]] + [_num(v) for v in cells[1:]]))
        return "\n".join(lines) + "\n"

    def to_text(self, timing: bool = False) -> str:
        header = list(CSV_COLUMNS)
        body = []
        for r in self.rows:
            cells = self._cells(r, timing)
            row = [cells[0]]
            for v in cells[1:]:
                if v is None:
                    row.append("-")
                elif isinstance(v, (int, np.integer)):
                    row.append(str(int(v)))
                else:
                    row.append(f"{v:.4f}")
            if r.error:
                row = [cells[0]] + ["-"] * (len(header) - 1)
                row[-1] = f"error: {r.error}"
            body.append(row)
        widths = [max(len(x) for x in col) for col in zip(header, *body)]
        lines = ["  ".join(h.rjust(w) if i else h.ljust(w) for i, (h, w) in enumerate(zip(header, widths)))]
        for row in body:
            lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))))
        return "\n".join(line.rstrip() for line in lines) + "\n"


def compare(points, methods, truth: GeometricEllipse | None = None, seed: int = 0) -> ComparisonTable:
    """Run each method on ``points``; failures become row-level errors."""
    methods = resolve_methods(methods)
    rows: list[ComparisonRow] = []
    if truth is not None:
        t = canonicalize_geometric(truth)
        rows.append(ComparisonRow("truth", t, parameter_errors(t, t)))
    for name in methods:
        start = time.perf_counter()
        try:
            rep = run_method(name, points, seed)
        except EllipseFitError as exc:
            ms = 1e3 * (time.perf_counter() - start)
            rows.append(ComparisonRow(name, None, None, None, ms, f"{type(exc).__name__}: {exc}"))
            continue
        ms = 1e3 * (time.perf_counter() - start)
        est = canonicalize_geometric(rep.ellipse)
        err = parameter_errors(est, truth) if truth is not None else None
        rows.append(ComparisonRow(name, est, err, rep.iterations, ms))
    return ComparisonTable(rows, truth)


# --- Monte Carlo ---------------------------------------------------------

@dataclass(frozen=True)
class MethodStats:
    method: str
    trials: int
    failures: int
    mean_a_hat: float
    mean_b_hat: float
    err_a: tuple[float, float]  # (mean, std)
    err_b: tuple[float, float]
    err_center: tuple[float, float]
    err_alpha: tuple[float, float]
    err_geometric: tuple[float, float]


@dataclass
class MonteCarloSummary:
    trials: int
    methods: list[str]
    stats: dict[str, MethodStats]
    # per-trial (a_hat, b_hat, err_a, err_b, err_center, err_alpha); NaN rows are failures
    samples: dict[str, np.ndarray]

    def geometric_errors(self, method: str) -> np.ndarray:
        s = self.samples[method]
        return np.sqrt(s[:, 2] ** 2 + s[:, 3] ** 2 + s[:, 4] ** 2)

    def to_text(self) -> str:
        header = ["method", "trials", "failures", "mean_a", "mean_b", "err_a", "err_b", "err_center", "err_alpha", "err_geom"]
        body = []
        for m in self.methods:
            s = self.stats[m]
            row = [m, str(s.trials), str(s.failures), f"{s.mean_a_hat:.4f}", f"{s.mean_b_hat:.4f}"]
            for mu, sd in (s.err_a, s.err_b, s.err_center, s.err_alpha, s.err_geometric):
                row.append(f"{mu:.4f}+-{sd:.4f}")
            body.append(row)
        widths = [max(len(x) for x in col) for col in zip(header, *body)]
        lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in [header] + body]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        cols = ["method", "trials", "failures", "mean_a", "mean_b"]
        for k in ("err_a", "err_b", "err_center", "err_alpha", "err_geom"):
            cols += [f"{k}_mean", f"{k}_std"]
        lines = [",".join(cols)]
        for m in self.methods:
            s = self.stats[m]
            vals = [s.trials, s.failures, s.mean_a_hat, s.mean_b_hat]
            for pair in (s.err_a, s.err_b, s.err_center, s.err_alpha, s.err_geometric):
                vals += list(pair)
            lines.append(",".join([m] + [_num(v) for v in vals]))
        return "\n".join(lines) + "\n"


def trial_seeds(master_seed: int, trials: int) -> list[int]:
    """Independent 64-bit seeds derived from ``master_seed``."""
    children = np.random.SeedSequence(master_seed).spawn(trials)
    return [int(ch.generate_state(1, dtype=np.uint64)[0]) for ch in children]


def _run_trial(args):
    config, methods = args
    pts = generate(config)
    table = compare(pts, methods, config.ellipse, seed=config.seed)
    out = []
    for name in methods:
        r = table.row(name)
        if r.ellipse is None:
            out.append([math.nan] * 6)
        else:
            out.append([r.ellipse.a, r.ellipse.b, r.errors.a, r.errors.b, r.errors.center, r.errors.alpha])
    return out


def _mean_std(v: np.ndarray) -> tuple[float, float]:
    if v.size == 0:
        return (math.nan, math.nan)
    return (float(np.mean(v)), float(np.std(v)))


def monte_carlo(config: ScenarioConfig, methods, trials: int, workers: int = 1) -> MonteCarloSummary:
    """Repeat ``config`` ``trials`` times with seeds derived from ``config.seed``.

    Results do not depend on ``workers``: each trial owns its seed and
    trials are collected in order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    methods = resolve_methods(methods)
    jobs = [(replace(config, seed=s), methods) for s in trial_seeds(config.seed, trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [_run_trial(j) for j in jobs]
    arr = np.array(results, dtype=float)  # (trials, methods, 6)
    stats, samples = {}, {}
    for k, name in enumerate(methods):
        s = arr[:, k, :]
        samples[name] = s
        ok = s[~np.isnan(s[:, 0])]
        geom = np.sqrt(ok[:, 2] ** 2 + ok[:, 3] ** 2 + ok[:, 4] ** 2)
        stats[name] = MethodStats(
            name,
            trials,
            int(trials - ok.shape[0]),
            float(np.mean(ok[:, 0])) if ok.size else math.nan,
            float(np.mean(ok[:, 1])) if ok.size else math.nan,
            _mean_std(ok[:, 2]),
            _mean_std(ok[:, 3]),
            _mean_std(ok[:, 4]),
            _mean_std(ok[:, 5]),
            _mean_std(geom),
        )
    return MonteCarloSummary(trials, methods, stats, samples)
