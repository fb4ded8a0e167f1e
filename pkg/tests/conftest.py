import math

import numpy as np
import pytest

from ellipse_fit.geometry import GeometricEllipse, sample_parametric

MIN_AXIS_RATIO = math.sqrt(1.0 - 0.999**2)  # eccentricity 0.999


def random_ellipse(rng, axis_range=(1.0, 100.0), center_range=20.0) -> GeometricEllipse:
    """Random ellipse with both axes in ``axis_range`` and eccentricity <= 0.999."""
    a = rng.uniform(*axis_range)
    b_lo = max(axis_range[0], a * MIN_AXIS_RATIO)
    b = rng.uniform(b_lo, a)
    return GeometricEllipse(
        rng.uniform(-center_range, center_range),
        rng.uniform(-center_range, center_range),
        a,
        b,
        rng.uniform(0.0, math.pi),
    )


def full_samples(ellipse, n=100):
    t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return sample_parametric(ellipse, t)


def dense_distance(a, b, point, samples=100_000):
    """Brute-force distance from a canonical-frame point to the ellipse (a, b)."""
    t = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    return float(np.min(np.hypot(a * np.cos(t) - point[0], b * np.sin(t) - point[1])))


def geom_close(e1, e2, tol):
    """Compare two canonicalised ellipses, angle modulo pi."""
    d_alpha = math.fmod(abs(e1.alpha - e2.alpha), math.pi)
    d_alpha = min(d_alpha, math.pi - d_alpha)
    return (
        abs(e1.x_c - e2.x_c) < tol
        and abs(e1.y_c - e2.y_c) < tol
        and abs(e1.a - e2.a) < tol
        and abs(e1.b - e2.b) < tol
        and d_alpha < tol
    )


TRUTH = GeometricEllipse(0.0, 0.0, 24.0, 12.0, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
