import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import TRUTH, full_samples, geom_close
from ellipse_fit.algebraic import fit_als
from ellipse_fit.errors import NoValidSubset
from ellipse_fit.geometry import GeometricEllipse
from ellipse_fit.harness.simulate import (
    OutlierModel,
    ScenarioConfig,
    generate,
    parameter_errors,
    trial_seeds,
)
from ellipse_fit.robust import CAUCHY, cauchy_weight, default_subset_count, fit_lmeds, fit_mest


def test_cauchy_weight_values():
    assert cauchy_weight(0.0, 2.0) == 1.0
    assert cauchy_weight(2.0, 2.0) == 0.5
    assert cauchy_weight(20.0, 2.0) == pytest.approx(1 / 101)
    with pytest.raises(ValueError):
        cauchy_weight(1.0, 0.0)


@given(d1=st.floats(-1e6, 1e6), d2=st.floats(-1e6, 1e6), c=st.floats(1e-3, 1e3))
def test_cauchy_weight_monotone(d1, d2, c):
    w1, w2 = cauchy_weight(d1, c), cauchy_weight(d2, c)
    assert 0 < w1 <= 1 and 0 < w2 <= 1
    if abs(d1) <= abs(d2):
        assert w1 >= w2


@given(d=st.floats(-1e3, 1e3), c=st.floats(1e-2, 1e2))
def test_cauchy_rho_properties(d, c):
    assert CAUCHY.rho(d, c) == pytest.approx(CAUCHY.rho(-d, c))
    assert CAUCHY.rho(0.0, c) == 0.0
    assert CAUCHY.rho(abs(d) + 1, c) >= CAUCHY.rho(d, c)
    if d != 0:
        assert CAUCHY.psi(d, c) / d == pytest.approx(cauchy_weight(d, c))


def test_mest_noise_free_equals_als():
    pts = full_samples(TRUTH, 60)
    m = fit_mest(pts)
    np.testing.assert_allclose(m.params, fit_als(pts).params, rtol=0, atol=1e-8)


def test_mest_unit_weight_equals_als_exactly():
    pts = generate(ScenarioConfig(seed=8, outlier=OutlierModel(10)))
    m = fit_mest(pts, weight_fn=lambda d, c: np.ones_like(d))
    np.testing.assert_array_equal(m.params, fit_als(pts).params)


def test_mest_downweights_gross_outlier():
    e = GeometricEllipse(0, 0, 24, 12, 0)
    rng = np.random.default_rng(2024)
    pts = full_samples(e, 50).points + rng.normal(0, 0.5, (50, 2))
    outlier = np.array([[24.0 + 50.0, 0.0]])  # 100 sigma off the curve along the major axis
    data = np.vstack([pts, outlier])
    rep = fit_mest(data)
    assert rep.weights[-1] < 0.05
    assert rep.weights[-1] == pytest.approx(cauchy_weight(rep.residuals[-1], rep.extra["scale"]))


def test_mest_orthogonal_residuals():
    pts = generate(ScenarioConfig(seed=3, outlier=OutlierModel(10)))
    rep = fit_mest(pts, residual_kind="orthogonal")
    assert parameter_errors(rep.ellipse, TRUTH).geometric < parameter_errors(fit_als(pts).ellipse, TRUTH).geometric


def test_default_subset_count():
    assert default_subset_count(0.4, 0.99) == 57
    assert default_subset_count(0.0) == 1


def test_lmeds_noise_free_exact():
    pts = full_samples(TRUTH, 40)
    rep = fit_lmeds(pts, 3, seed=1, polish=False)
    assert rep.extra["trials"][rep.extra["best_index"]].median_sq < 1e-18
    assert geom_close(rep.ellipse, TRUTH, 1e-8)


def test_lmeds_deterministic():
    pts = generate(ScenarioConfig(seed=4, outlier=OutlierModel(20)))
    r1 = fit_lmeds(pts, 50, seed=9)
    r2 = fit_lmeds(pts, 50, seed=9)
    assert r1.ellipse == r2.ellipse
    assert [t.indices for t in r1.extra["trials"]] == [t.indices for t in r2.extra["trials"]]


def test_lmeds_selects_minimum_median():
    pts = generate(ScenarioConfig(seed=4, outlier=OutlierModel(20)))
    rep = fit_lmeds(pts, 200, seed=1)
    trials = rep.extra["trials"]
    best = trials[rep.extra["best_index"]]
    assert all(best.median_sq <= t.median_sq for t in trials)
    assert all(len(set(t.indices)) == 5 for t in trials)


def test_lmeds_subset_contains_only_inliers():
    cfg = ScenarioConfig(n=100, t_range=(0, 2 * math.pi), seed=77, outlier=OutlierModel(30))
    pts = generate(cfg)
    rep = fit_lmeds(pts, 500, seed=5)
    chosen = rep.extra["trials"][rep.extra["best_index"]].indices
    assert not pts.labels[list(chosen)].any()


def test_lmeds_against_exhaustive_enumeration():
    cfg = ScenarioConfig(n=20, t_range=(0, 2 * math.pi), seed=13, outlier=OutlierModel(5))
    pts = generate(cfg)
    everything = list(itertools.combinations(range(20), 5))
    exhaustive = fit_lmeds(pts, subsets=everything, polish=False)
    best_all = exhaustive.extra["trials"][exhaustive.extra["best_index"]]
    assert not pts.labels[list(best_all.indices)].any()
    sampled = fit_lmeds(pts, 2000, seed=2, polish=False)
    best_sampled = sampled.extra["trials"][sampled.extra["best_index"]]
    assert best_sampled.median_sq >= best_all.median_sq
    assert not pts.labels[list(best_sampled.indices)].any()
    assert best_sampled.median_sq <= 4 * best_all.median_sq


def test_lmeds_no_valid_subset():
    line = np.column_stack([np.arange(10.0), np.arange(10.0)])
    with pytest.raises(NoValidSubset):
        fit_lmeds(line, 20, seed=0)


@pytest.mark.slow
def test_lmeds_breakdown_40_percent():
    # 40 % outliers at least 20 sigma off the curve
    clean_errs, dirty_errs = [], []
    for s in trial_seeds(31, 100):
        base = ScenarioConfig(n=100, t_range=(0, 2 * math.pi), seed=s)
        dirty_cfg = ScenarioConfig(n=100, t_range=(0, 2 * math.pi), seed=s, outlier=OutlierModel(40, "offset", (10.0, 20.0)))
        clean = generate(base)
        dirty = generate(dirty_cfg)
        clean_errs.append(parameter_errors(fit_lmeds(clean, 1000, seed=s).ellipse, TRUTH).geometric)
        dirty_errs.append(parameter_errors(fit_lmeds(dirty, 1000, seed=s).ellipse, TRUTH).geometric)
    reference = np.median(clean_errs)
    assert np.mean(np.array(dirty_errs) <= 3 * reference) >= 0.95
