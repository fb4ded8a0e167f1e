"""Simulation harness: synthetic data, comparisons, Monte Carlo, CSV and SVG."""

from .io import read_csv, write_csv
from .simulate import (
    ComparisonTable,
    MonteCarloSummary,
    OutlierModel,
    ScenarioConfig,
    compare,
    generate,
    monte_carlo,
    inlier_scenario,
    outlier_scenario,
    parameter_errors,
)
from .svg import render_svg

__all__ = [
    "read_csv",
    "write_csv",
    "ComparisonTable",
    "MonteCarloSummary",
    "OutlierModel",
    "ScenarioConfig",
    "compare",
    "generate",
    "monte_carlo",
    "inlier_scenario",
    "outlier_scenario",
    "parameter_errors",
    "render_svg",
]
