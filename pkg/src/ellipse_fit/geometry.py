"""Ellipse representations and the conversions between them.

Two parameterisations are used throughout the package:

* the implicit conic ``a x^2 + 2 b xy + c y^2 + 2 d x + 2 e y + f = 0``
  (:class:`ConicCoefficients`), compared after scaling to ``a + c = 1``;
* the geometric form ``(x_c, y_c, a, b, alpha)`` (:class:`GeometricEllipse`)
  with semi-axes ``a >= b`` and the major axis at angle ``alpha``.

The canonical frame is the one in which the ellipse is centred at the origin
and axis aligned: ``X = R (x - x_c)`` with ``R = [[cos, sin], [-sin, cos]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateConic, EmptyPointSet, NotAnEllipse

__all__ = [
    "ConicCoefficients",
    "GeometricEllipse",
    "PointSet",
    "RotationFrame",
    "as_points",
    "sample_parametric",
    "to_canonical",
    "from_canonical",
    "geometric_to_conic",
    "conic_to_geometric",
    "algebraic_residual",
    "canonicalize_geometric",
    "ELLIPSE_TOL",
]

# b^2 - ac must be below -ELLIPSE_TOL (after a + c = 1 scaling)
ELLIPSE_TOL = 1e-12


@dataclass(frozen=True)
class ConicCoefficients:
    """Coefficients of ``a x^2 + 2b xy + c y^2 + 2d x + 2e y + f``."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def __post_init__(self):
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise DegenerateConic("quadratic coefficients a, b, c are all zero")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e, self.f], dtype=float)

    @classmethod
    def from_reduced(cls, p: Sequence[float]) -> "ConicCoefficients":
        """Build from the ``(a, b, d, e, f)`` vector of an ``a + c = 1`` conic."""
        a, b, d, e, f = (float(v) for v in p)
        return cls(a, b, 1.0 - a, d, e, f)

    def reduced(self) -> np.ndarray:
        """Return ``(a, b, d, e, f)`` after scaling to ``a + c = 1``."""
        n = self.normalized()
        return np.array([n.a, n.b, n.d, n.e, n.f])

    def discriminant(self) -> float:
        return self.b * self.b - self.a * self.c

    def evaluate(self, x, y):
        a, b, c, d, e, f = self.as_array()
        return a * x * x + 2 * b * x * y + c * y * y + 2 * d * x + 2 * e * y + f

    # The three normalisations used in the literature. a + c = 1 is the
    # internal one; the others are plain rescalings.
    def normalized(self) -> "ConicCoefficients":
        s = self.a + self.c
        if s == 0:
            raise NotAnEllipse("a + c = 0, cannot normalise (not an ellipse)")
        return ConicCoefficients(*(self.as_array() / s))

    def normalized_unit(self) -> "ConicCoefficients":
        """Scale to unit Euclidean norm with ``a + c >= 0``."""
        v = self.as_array()
        v = v / np.linalg.norm(v)
        if v[0] + v[2] < 0:
            v = -v
        return ConicCoefficients(*v)

    def normalized_f(self) -> "ConicCoefficients":
        if self.f == 0:
            raise DegenerateConic("f = 0, cannot normalise to f = 1")
        return ConicCoefficients(*(self.as_array() / self.f))


@dataclass(frozen=True)
class GeometricEllipse:
    """Centre, semi-axes and rotation of an ellipse."""

    x_c: float
    y_c: float
    a: float
    b: float
    alpha: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x_c, self.y_c, self.a, self.b, self.alpha], dtype=float)

    @classmethod
    def from_array(cls, q: Sequence[float]) -> "GeometricEllipse":
        return cls(*(float(v) for v in q))

    @property
    def center(self) -> np.ndarray:
        return np.array([self.x_c, self.y_c])

    def frame(self) -> "RotationFrame":
        return RotationFrame.from_angle(self.alpha, (self.x_c, self.y_c))


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered 2-D measurements with optional outlier labels.

    ``labels[i]`` is True when point ``i`` was injected as an outlier.
    """

    points: np.ndarray
    labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.size == 0:
            raise EmptyPointSet("PointSet must be non-empty")
        pts = pts.reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise ValueError("PointSet coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.array(self.labels, dtype=bool, copy=True).reshape(-1)
            if lab.shape[0] != pts.shape[0]:
                raise ValueError("labels must have one entry per point")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def subset(self, idx) -> "PointSet":
        labels = None if self.labels is None else self.labels[idx]
        return PointSet(self.points[idx], labels)

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        if self.labels is None or other.labels is None:
            same_labels = self.labels is None and other.labels is None
        else:
            same_labels = np.array_equal(self.labels, other.labels)
        return np.array_equal(self.points, other.points) and same_labels


def as_points(points) -> np.ndarray:
    """Return an ``(n, 2)`` float array from a PointSet or array-like."""
    if isinstance(points, PointSet):
        return np.asarray(points.points, dtype=float)
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise EmptyPointSet("PointSet must be non-empty")
    return pts.reshape(-1, 2)


@dataclass(frozen=True)
class RotationFrame:
    R: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        if R.shape != (2, 2):
            raise ValueError("rotation must be 2x2")
        if not np.allclose(R.T @ R, np.eye(2), rtol=0, atol=1e-12) or abs(np.linalg.det(R) - 1) > 1e-12:
            raise ValueError("R must be a proper rotation")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "center", np.array(self.center, dtype=float).reshape(2))

    @classmethod
    def from_angle(cls, alpha: float, center=(0.0, 0.0)) -> "RotationFrame":
        c, s = math.cos(alpha), math.sin(alpha)
        return cls(np.array([[c, s], [-s, c]]), np.asarray(center, dtype=float))


def to_canonical(frame: RotationFrame, p) -> np.ndarray:
    """Map world point(s) ``x`` to ``R (x - x_c)``. Accepts shape (2,) or (n, 2)."""
    p = np.asarray(p, dtype=float)
    return (p - frame.center) @ frame.R.T


def from_canonical(frame: RotationFrame, P) -> np.ndarray:
    """Inverse of :func:`to_canonical`: ``R^T X + x_c``."""
    P = np.asarray(P, dtype=float)
    return P @ frame.R + frame.center


def sample_parametric(ellipse: GeometricEllipse, t_values: Iterable[float]) -> PointSet:
    t = np.asarray(list(t_values) if not isinstance(t_values, np.ndarray) else t_values, dtype=float)
    ca, sa = math.cos(ellipse.alpha), math.sin(ellipse.alpha)
    ct, st = np.cos(t), np.sin(t)
    x = ellipse.x_c + ellipse.a * ct * ca - ellipse.b * st * sa
    y = ellipse.y_c + ellipse.a * ct * sa + ellipse.b * st * ca
    return PointSet(np.column_stack([x, y]))


def geometric_to_conic(ellipse: GeometricEllipse) -> ConicCoefficients:
    """Implicit coefficients of the ellipse, scaled to ``a + c = 1``."""
    ca, sa = math.cos(ellipse.alpha), math.sin(ellipse.alpha)
    ia, ib = 1.0 / ellipse.a**2, 1.0 / ellipse.b**2
    A = ca * ca * ia + sa * sa * ib
    B = ca * sa * (ia - ib)
    C = sa * sa * ia + ca * ca * ib
    xc, yc = ellipse.x_c, ellipse.y_c
    D = -(A * xc + B * yc)
    E = -(B * xc + C * yc)
    F = A * xc * xc + 2 * B * xc * yc + C * yc * yc - 1.0
    s = A + C
    return ConicCoefficients(A / s, B / s, C / s, D / s, E / s, F / s)


def conic_to_geometric(conic: ConicCoefficients) -> GeometricEllipse:
    """Centre, axes and rotation of an elliptic conic.

    Raises
    ------
    NotAnEllipse
        If ``b^2 - ac >= -1e-12`` after scaling to ``a + c = 1``.
    DegenerateConic
        If the conic is elliptic but has no real points (or only one).
    """
    if conic.a + conic.c == 0:
        raise NotAnEllipse("a + c = 0")
    n = conic.normalized()
    a, b, c, d, e, f = n.a, n.b, n.c, n.d, n.e, n.f
    if not all(math.isfinite(v) for v in (a, b, c, d, e, f)):
        raise DegenerateConic("non-finite coefficients")
    det = a * c - b * b
    if -det >= -ELLIPSE_TOL:
        raise NotAnEllipse(f"b^2 - ac = {-det:.3e} is not negative")

    xc = (b * e - c * d) / det
    yc = (b * d - a * e) / det
    f0 = f + d * xc + e * yc
    if not f0 < 0:
        raise DegenerateConic("conic has no real locus")

    # a + c = 1, so the eigenvalues are 1/2 +- r
    half = 0.5 * (a - c)
    r = math.hypot(half, b)
    lam_max = 0.5 + r
    lam_min = det / lam_max
    major = math.sqrt(-f0 / lam_min)
    minor = math.sqrt(-f0 / lam_max)
    if r == 0.0:
        alpha = 0.0
    else:
        alpha = 0.5 * math.atan2(-2.0 * b, c - a)
    return canonicalize_geometric(GeometricEllipse(xc, yc, major, minor, alpha))


def algebraic_residual(p5, point) -> float | np.ndarray:
    """Value of ``a (x^2 - y^2) + 2 b xy + 2 d x + 2 e y + y^2 + f``.

    ``point`` may be a single ``(x, y)`` or an ``(n, 2)`` array.
    """
    a, b, d, e, f = np.asarray(p5, dtype=float)
    pt = np.asarray(point, dtype=float)
    x, y = pt[..., 0], pt[..., 1]
    r = a * (x * x - y * y) + 2 * b * x * y + 2 * d * x + 2 * e * y + y * y + f
    return float(r) if np.ndim(r) == 0 else r


def canonicalize_geometric(e: GeometricEllipse) -> GeometricEllipse:
    """Swap axes so ``a >= b`` and reduce alpha into ``[0, pi)``.

    Circles get ``alpha = 0``.
    """
    a, b, alpha = abs(e.a), abs(e.b), e.alpha
    if b > a:
        a, b = b, a
        alpha += 0.5 * math.pi
    if a == b:
        alpha = 0.0
    alpha = math.fmod(alpha, math.pi)
    if alpha < 0:
        alpha += math.pi
    if alpha >= math.pi:
        alpha = 0.0
    return GeometricEllipse(float(e.x_c), float(e.y_c), float(a), float(b), alpha + 0.0)
