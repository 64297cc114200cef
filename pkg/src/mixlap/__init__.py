"""mixlap: adaptive Gaussian-mixture approximation of non-normalised densities.

The engine grows a mixture one component at a time, alternating a
non-negative least-squares re-fit of all weights with a residual-driven
search for the next component location.  Two engine variants are provided
(the classic one-sided scheme and a modified two-sided scheme), together
with benchmark targets and grid-based comparison utilities.
"""

from .density import TargetDensity
from .engine import IterLapConfig, RunReport, run
from .evaluate import (
    ComparisonReport,
    EvaluationGrid,
    compare,
    default_grid,
    s_statistic,
    standardize,
)
from .mixture import GaussianComponent, GaussianMixture, prune
from .optimize import OptimResult, OptimSettings, minimize

__all__ = [
    "TargetDensity",
    "IterLapConfig",
    "RunReport",
    "run",
    "GaussianComponent",
    "GaussianMixture",
    "prune",
    "EvaluationGrid",
    "ComparisonReport",
    "compare",
    "default_grid",
    "standardize",
    "s_statistic",
    "OptimSettings",
    "OptimResult",
    "minimize",
]

__version__ = "0.1.0"
