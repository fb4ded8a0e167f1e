"""Ellipse fitting to noisy 2-D measurements.

Estimators: algebraic least squares (:func:`fit_als`), orthogonal distance
Gauss-Newton (:func:`fit_ols`), gradient-weighted least squares
(:func:`fit_gwls`), the Cauchy M-estimator (:func:`fit_mest`) and least
median of squares (:func:`fit_lmeds`).
"""

from .algebraic import build_design, fit_als, fit_exact_5
from .errors import (
    BadInitial,
    DegenerateConic,
    DegenerateStep,
    EllipseFitError,
    EmptyPointSet,
    MalformedFile,
    NoConvergence,
    NotAnEllipse,
    NoValidSubset,
    RankDeficient,
    SingularJacobian,
    SingularSystem,
)
from .geometry import (
    ConicCoefficients,
    GeometricEllipse,
    PointSet,
    RotationFrame,
    algebraic_residual,
    canonicalize_geometric,
    conic_to_geometric,
    from_canonical,
    geometric_to_conic,
    sample_parametric,
    to_canonical,
)
from .gwls import fit_gwls, gradient_sq
from .orthogonal import FootPoint, fit_ols, foot_point, orthogonal_distances
from .report import FitReport
from .robust import cauchy_weight, fit_lmeds, fit_mest

__version__ = "0.1.0"

__all__ = [
    "build_design",
    "fit_als",
    "fit_exact_5",
    "BadInitial",
    "DegenerateConic",
    "DegenerateStep",
    "EllipseFitError",
    "EmptyPointSet",
    "MalformedFile",
    "NoConvergence",
    "NotAnEllipse",
    "NoValidSubset",
    "RankDeficient",
    "SingularJacobian",
    "SingularSystem",
    "ConicCoefficients",
    "GeometricEllipse",
    "PointSet",
    "RotationFrame",
    "algebraic_residual",
    "canonicalize_geometric",
    "conic_to_geometric",
    "from_canonical",
    "geometric_to_conic",
    "sample_parametric",
    "to_canonical",
    "fit_gwls",
    "gradient_sq",
    "FootPoint",
    "fit_ols",
    "foot_point",
    "orthogonal_distances",
    "FitReport",
    "cauchy_weight",
    "fit_lmeds",
    "fit_mest",
]
