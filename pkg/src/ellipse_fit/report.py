from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import NoConvergence
from .geometry import ConicCoefficients, GeometricEllipse


@dataclass
class FitReport:
    """Result of a single fit.

    ``residuals`` holds the per-point quantity the method minimises
    (algebraic values, orthogonal distances, ...); ``history`` is the
    objective value after every accepted iteration for iterative methods.
    """

    method: str
    ellipse: GeometricEllipse
    conic: ConicCoefficients
    residuals: np.ndarray
    iterations: int = 0
    converged: bool = True
    params: np.ndarray | None = None
    weights: np.ndarray | None = None
    history: list[float] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)


def require_converged(report: FitReport) -> FitReport:
    """Raise :class:`NoConvergence` for a report flagged as not converged."""
    if not report.converged:
        raise NoConvergence(f"{report.method} did not converge in {report.iterations} iterations")
    return report
