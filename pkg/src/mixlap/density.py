"""Target density abstraction consumed by the approximation engine."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["TargetDensity"]


@dataclass(frozen=True)
class TargetDensity:
    """A non-normalised density known through its log value.

    ``log_q`` maps a point (or, when ``vectorized``, an ``(n, d)`` batch) to
    the log of the non-normalised density.  Invalid inputs must come back as
    -inf; +inf and NaN returns are coerced to -inf here.

    ``manual_points`` is an optional hook called with each newly accepted
    component mean; any extra locations it returns are added to the explored
    set.  ``reference_box`` is a per-axis (lo, hi) list used to build default
    evaluation grids.
    """

    dim: int
    log_q: Callable[[np.ndarray], np.ndarray | float]
    name: str = "target"
    manual_points: Callable[[np.ndarray], np.ndarray] | None = None
    reference_box: tuple[tuple[float, float], ...] | None = None
    vectorized: bool = False

    def log_density(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        v = float(np.ravel(self.log_q(x))[0])
        return v if v < np.inf and not np.isnan(v) else -np.inf

    def log_density_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.vectorized:
            out = np.asarray(self.log_q(X), dtype=float)
        else:
            out = np.array([float(np.ravel(self.log_q(row))[0]) for row in X])
        out = np.where(np.isnan(out), -np.inf, out)
        return np.where(out == np.inf, -np.inf, out)
