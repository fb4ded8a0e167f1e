"""Orthogonal-distance (geometric) ellipse fitting.

Two nested Gauss-Newton loops. The inner one finds, for every measurement
``X_i`` in the canonical frame, the foot point ``X'`` on the ellipse solving

    f1 = 1/2 (a^2 Y^2 + b^2 X^2 - a^2 b^2)   = 0   (on the ellipse)
    f2 = b^2 X (Y_i - Y) - a^2 Y (X_i - X)  = 0   (normal through X_i)

The outer one updates ``q = (x_c, y_c, a, b, alpha)`` from the stacked
system ``J dq = d`` with ``J = R^-1 Q^-1 B`` the derivative of the world
foot point with respect to ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BadInitial, DegenerateStep, NoConvergence, SingularJacobian
from .geometry import (
    GeometricEllipse,
    RotationFrame,
    as_points,
    canonicalize_geometric,
    geometric_to_conic,
    to_canonical,
)
from .report import FitReport

__all__ = [
    "FootPoint",
    "foot_point",
    "foot_points",
    "initial_foot_guess",
    "foot_residuals",
    "foot_jacobian",
    "parameter_jacobian",
    "orthogonal_distances",
    "fit_ols",
]

INNER_MAX_ITER = 50
OUTER_MAX_ITER = 100
MAX_HALVINGS = 12


@dataclass(frozen=True)
class FootPoint:
    foot: np.ndarray  # canonical frame
    distance_vec: np.ndarray  # x - x', world frame
    iterations: int

    @property
    def distance(self) -> float:
        return float(np.hypot(*self.distance_vec))


def foot_residuals(a, b, X, Y, Xi, Yi):
    f1 = 0.5 * (a * a * Y * Y + b * b * X * X - a * a * b * b)
    f2 = b * b * X * (Yi - Y) - a * a * Y * (Xi - X)
    return f1, f2


def foot_jacobian(a, b, X, Y, Xi, Yi):
    """Entries ``(q11, q12, q21, q22)`` of ``Q = d(f1, f2)/d(X, Y)``."""
    a2, b2 = a * a, b * b
    return b2 * X, a2 * Y, (a2 - b2) * Y + b2 * Yi, (a2 - b2) * X - a2 * Xi


def initial_foot_guess(a, b, Xi, Yi):
    """Average of the radial projection and the vertical (or vertex) projection.

    ``Xi = Yi = 0`` has no radial projection; it is handled by the caller.
    sign(0) is taken as +1 so the guess is always on the ellipse's upper
    half for points on the major axis.
    """
    Xi = np.asarray(Xi, dtype=float)
    Yi = np.asarray(Yi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = a * b / np.sqrt(b * b * Xi * Xi + a * a * Yi * Yi)
        Xk1, Yk1 = Xi * k, Yi * k
    inside = np.abs(Xi) < a
    sy = np.where(Yi < 0, -1.0, 1.0)
    sx = np.where(Xi < 0, -1.0, 1.0)
    root = np.sqrt(np.clip(a * a - Xi * Xi, 0.0, None))
    Xk2 = np.where(inside, Xi, sx * a)
    Yk2 = np.where(inside, sy * (b / a) * root, 0.0)
    return Xk1, Yk1, Xk2, Yk2


def _newton_feet(a, b, Xi, Yi, tol):
    """Vectorised Newton iteration; returns feet, iteration counts, ok-mask."""
    n = Xi.shape[0]
    Xk1, Yk1, Xk2, Yk2 = initial_foot_guess(a, b, Xi, Yi)
    X = 0.5 * (Xk1 + Xk2)
    Y = 0.5 * (Yk1 + Yk2)
    centre = (Xi == 0) & (Yi == 0)
    # Nearest points to the centre are the minor-axis vertices.
    X = np.where(centre, 0.0, X)
    Y = np.where(centre, b, Y)
    iters = np.zeros(n, dtype=int)
    active = ~centre
    ok = centre.copy()
    singular = np.zeros(n, dtype=bool)
    det_scale = 1e-14 * (a * b) ** 2 * (a * a + b * b)
    for it in range(1, INNER_MAX_ITER + 1):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        x, y, xi, yi = X[idx], Y[idx], Xi[idx], Yi[idx]
        f1, f2 = foot_residuals(a, b, x, y, xi, yi)
        q11, q12, q21, q22 = foot_jacobian(a, b, x, y, xi, yi)
        det = q11 * q22 - q12 * q21
        bad = np.abs(det) < det_scale * (1.0 + np.hypot(xi, yi) / a)
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = (q22 * f1 - q12 * f2) / det
            dy = (-q21 * f1 + q11 * f2) / det
        dx = np.where(bad, 0.0, dx)
        dy = np.where(bad, 0.0, dy)
        X[idx] = x - dx
        Y[idx] = y - dy
        iters[idx] = it
        done = np.hypot(dx, dy) < tol
        singular[idx[bad]] = True
        finished = done & ~bad
        ok[idx[finished]] = True
        active[idx[finished | bad]] = False
    return X, Y, iters, ok, singular


def _foot_quadrant_root(a, b, Xi, Yi):
    """Closest point by a bracketed 1-D root in the point's own quadrant.

    Safeguard for the rare inputs where the Newton iteration is captured by
    a non-minimal normal (points deep inside a very flat ellipse).
    """
    x0, y0 = abs(Xi), abs(Yi)
    a2, b2 = a * a, b * b
    if y0 > 0:
        if x0 > 0:
            def g(t):
                return (a * x0 / (t + a2)) ** 2 + (b * y0 / (t + b2)) ** 2 - 1.0

            # g(lo) >= 0 >= g(hi); the root is unique on t > -b^2
            lo = -b2 + b * y0
            hi = -b2 + math.hypot(a * x0, b * y0)
            if hi <= lo:
                t = lo
            else:
                t = brentq(g, lo, hi, xtol=1e-15 * (a2 + abs(hi)), rtol=4.5e-16, maxiter=500)
            fx = a2 * x0 / (t + a2)
            fy = b2 * y0 / (t + b2)
        else:
            fx, fy = 0.0, b
    else:
        if a2 > b2 and x0 < (a2 - b2) / a:
            fx = a2 * x0 / (a2 - b2)
            fy = b * math.sqrt(max(0.0, 1.0 - (fx / a) ** 2))
        else:
            fx, fy = a, 0.0
    return math.copysign(fx, Xi if Xi != 0 else 1.0), math.copysign(fy, Yi if Yi != 0 else 1.0)


def _sq_dist(X, Y, Xi, Yi):
    return (Xi - X) ** 2 + (Yi - Y) ** 2


def foot_points(a: float, b: float, Xc: np.ndarray, *, strict: bool = True):
    """Foot points of canonical-frame points ``Xc`` (shape (n, 2)) on (a, b).

    Returns ``(feet, iterations)``. The Newton result is replaced by the
    bracketed quadrant root whenever the latter is strictly closer, so the
    returned foot is the nearest point on the ellipse.
    """
    Xc = np.asarray(Xc, dtype=float).reshape(-1, 2)
    Xi, Yi = Xc[:, 0].copy(), Xc[:, 1].copy()
    tol = 1e-12 * (1.0 + a)
    X, Y, iters, ok, singular = _newton_feet(a, b, Xi, Yi, tol)

    # Nearest foot shares the quadrant of X_i; anything else came from a
    # different normal and is re-solved.
    wrong = (X * Xi < 0) | (Y * Yi < 0) | ~np.isfinite(X) | ~np.isfinite(Y)
    suspect = ~ok | wrong
    on_axis = (Xi == 0) | (Yi == 0)
    check = np.nonzero(suspect | on_axis)[0]
    for i in check:
        fx, fy = _foot_quadrant_root(a, b, Xi[i], Yi[i])
        if suspect[i] or _sq_dist(fx, fy, Xi[i], Yi[i]) < _sq_dist(X[i], Y[i], Xi[i], Yi[i]):
            X[i], Y[i] = fx, fy
            ok[i] = True
            singular[i] = False
    if strict:
        if singular.any():
            raise SingularJacobian("foot-point Jacobian singular")
        if not ok.all():
            raise NoConvergence("foot-point iteration did not converge")
    return np.column_stack([X, Y]), iters


def foot_point(ellipse_canonical, X_i, frame: RotationFrame | None = None) -> FootPoint:
    """Foot point of a single canonical-frame point on the ellipse ``(a, b)``.

    ``distance_vec`` is expressed in the world frame given by ``frame``
    (identity frame when omitted).
    """
    a, b = (float(v) for v in ellipse_canonical)
    if not (a >= b > 0):
        raise ValueError("need a >= b > 0")
    Xi = np.asarray(X_i, dtype=float).reshape(1, 2)
    feet, iters = foot_points(a, b, Xi)
    foot = feet[0]
    dvec = Xi[0] - foot
    if frame is not None:
        dvec = dvec @ frame.R
    return FootPoint(foot, dvec, int(iters[0]))


def parameter_jacobian(q, feet: np.ndarray, Xc: np.ndarray) -> np.ndarray:
    """Stacked ``(2n, 5)`` derivative of world foot points w.r.t. ``q``.

    Row pair ``i`` is ``R^-1 Q^-1 B`` evaluated at foot ``i`` (canonical
    coordinates in ``feet`` and ``Xc``).
    """
    _, _, a, b, alpha = q
    C, S = math.cos(alpha), math.sin(alpha)
    X, Y = feet[:, 0], feet[:, 1]
    Xi, Yi = Xc[:, 0], Xc[:, 1]
    a2, b2 = a * a, b * b
    n = X.shape[0]
    B = np.empty((n, 2, 5))
    B[:, 0, 0] = b2 * X * C - a2 * Y * S
    B[:, 1, 0] = b2 * (Yi - Y) * C + a2 * (Xi - X) * S
    B[:, 0, 1] = b2 * X * S + a2 * Y * C
    B[:, 1, 1] = b2 * (Yi - Y) * S - a2 * (Xi - X) * C
    B[:, 0, 2] = a * (b2 - Y * Y)
    B[:, 1, 2] = 2 * a * Y * (Xi - X)
    B[:, 0, 3] = b * (a2 - X * X)
    B[:, 1, 3] = -2 * b * X * (Yi - Y)
    B[:, 0, 4] = (a2 - b2) * X * Y
    B[:, 1, 4] = (a2 - b2) * (X * X - Y * Y - X * Xi + Y * Yi)
    q11, q12, q21, q22 = foot_jacobian(a, b, X, Y, Xi, Yi)
    det = q11 * q22 - q12 * q21
    Qinv = np.empty((n, 2, 2))
    Qinv[:, 0, 0] = q22 / det
    Qinv[:, 0, 1] = -q12 / det
    Qinv[:, 1, 0] = -q21 / det
    Qinv[:, 1, 1] = q11 / det
    Rinv = np.array([[C, -S], [S, C]])
    J = np.einsum("ij,njk,nkl->nil", Rinv, Qinv, B)
    return J.reshape(2 * n, 5)


def _feet_world(q, pts, strict=True):
    e = GeometricEllipse.from_array(q)
    frame = e.frame()
    Xc = to_canonical(frame, pts)
    feet, iters = foot_points(e.a, e.b, Xc, strict=strict)
    D = (Xc - feet) @ frame.R  # x - x' in world frame
    return Xc, feet, D


def orthogonal_distances(ellipse: GeometricEllipse, points) -> np.ndarray:
    """Unsigned orthogonal distance of each point to the ellipse."""
    e = canonicalize_geometric(ellipse)
    _, _, D = _feet_world(e.as_array(), as_points(points))
    return np.hypot(D[:, 0], D[:, 1])


def _canon_q(q):
    return canonicalize_geometric(GeometricEllipse.from_array(q)).as_array()


def _valid(q):
    return bool(np.all(np.isfinite(q)) and q[2] > 0 and q[3] > 0)


def fit_ols(points, q0=None, *, max_iter: int = OUTER_MAX_ITER, gtol: float = 1e-8) -> FitReport:
    """Orthogonal-distance least-squares fit by damped Gauss-Newton.

    Parameters
    ----------
    points : PointSet or (n, 2) array
    q0 : GeometricEllipse or 5-vector, optional
        Starting ellipse. Defaults to the algebraic fit.
    gtol : float
        Stop when ``|J^T D| < gtol (1 + |D|)``.

    Returns
    -------
    FitReport
        ``residuals`` are the orthogonal distances, ``history`` the sum of
        squared distances after every accepted step.
    """
    pts = as_points(points)
    if pts.shape[0] < 5:
        raise DegenerateStep(f"need at least 5 points, got {pts.shape[0]}")
    if q0 is None:
        from .algebraic import fit_als

        q0 = fit_als(pts).ellipse
    q = np.asarray(q0.as_array() if isinstance(q0, GeometricEllipse) else q0, dtype=float)
    if q.shape != (5,) or not _valid(q):
        raise BadInitial("initial parameters are not a valid ellipse")
    q = _canon_q(q)

    Xc, feet, D = _feet_world(q, pts)
    ssq = float(np.sum(D * D))
    history = [ssq]
    converged = False
    it = 0
    first_step = None
    for it in range(1, max_iter + 1):
        J = parameter_jacobian(q, feet, Xc)
        r = D.reshape(-1)
        grad = J.T @ r
        if np.linalg.norm(grad) < gtol * (1.0 + math.sqrt(ssq)):
            converged = True
            it -= 1
            break
        dq = _gn_step(J, r, q)
        if first_step is None:
            first_step = float(np.linalg.norm(dq))
        lam = 1.0
        accepted = False
        # near the optimum the decrease drops below rounding of the sum
        tiny_step = np.linalg.norm(dq) < 1e-6 * (1.0 + np.linalg.norm(q))
        ssq_limit = ssq * (1.0 + 1e-13) if tiny_step else ssq
        for _ in range(MAX_HALVINGS + 1):
            q_try = q + lam * dq
            if _valid(q_try):
                q_try = _canon_q(q_try)
                try:
                    Xc_t, feet_t, D_t = _feet_world(q_try, pts)
                except (NoConvergence, SingularJacobian):
                    D_t = None
                if D_t is not None:
                    ssq_t = float(np.sum(D_t * D_t))
                    if ssq_t < ssq or (tiny_step and lam == 1.0 and ssq_t <= ssq_limit):
                        accepted = True
                        break
            lam *= 0.5
        if not accepted:
            # No decrease is representable any more: accept stationarity
            # when the Gauss-Newton step is at rounding level.
            if np.linalg.norm(dq) <= 1e-10 * (1.0 + np.linalg.norm(q)):
                converged = True
                break
            raise NoConvergence(f"no descent step found at iteration {it}")
        q, Xc, feet, D, ssq = q_try, Xc_t, feet_t, D_t, ssq_t
        history.append(ssq)
        if np.linalg.norm(lam * dq) <= 1e-14 * (1.0 + np.linalg.norm(q)):
            converged = True
            break
    else:
        J = parameter_jacobian(q, feet, Xc)
        if np.linalg.norm(J.T @ D.reshape(-1)) < gtol * (1.0 + math.sqrt(ssq)):
            converged = True
        else:
            raise NoConvergence(f"orthogonal fit did not converge in {max_iter} iterations")

    ellipse = GeometricEllipse.from_array(q)
    dist = np.hypot(D[:, 0], D[:, 1])
    return FitReport(
        "ols",
        ellipse,
        geometric_to_conic(ellipse),
        dist,
        iterations=it,
        converged=converged,
        params=q,
        history=history,
        extra={"first_step_norm": first_step if first_step is not None else 0.0, "distance_vectors": D},
    )


def _gn_step(J, r, q):
    # Rotation is unidentifiable for a circle: drop the alpha column.
    a, b = q[2], q[3]
    cols = 5
    if (a - b) <= 1e-12 * a:
        cols = 4
    Jc = J[:, :cols]
    dq, _, _, sv = np.linalg.lstsq(Jc, r, rcond=None)
    if not sv[0] > 0 or sv[-1] < 1e-10 * sv[0]:
        raise DegenerateStep("stacked Jacobian is rank deficient")
    if cols == 4:
        dq = np.append(dq, 0.0)
    return dq
