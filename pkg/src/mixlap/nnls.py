"""Non-negative (optionally weighted) least squares.

Lawson-Hanson active-set iteration on the normal equations.  Point weights
turn the objective into ``(y - Zb)^T diag(w) (y - Zb)``; they are folded in
by scaling rows with sqrt(w), so one solver serves both the plain and the
weighted variant.  Design columns are normalised to unit Euclidean norm
before solving (mixture-density columns differ by many orders of magnitude)
and the solution is unscaled afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

__all__ = ["NnlsProblem", "NnlsResult", "solve_nnls"]

_DEGENERATE_NORM = 1e-300


@dataclass(frozen=True)
class NnlsProblem:
    """min_b (y - Zb)^T diag(point_weights) (y - Zb) subject to b >= 0."""

    design: np.ndarray
    response: np.ndarray
    point_weights: np.ndarray | None = None


@dataclass(frozen=True)
class NnlsResult:
    x: np.ndarray
    converged: bool


def _solve_passive(G: np.ndarray, c: np.ndarray, passive: np.ndarray) -> np.ndarray:
    """Unconstrained minimiser on the passive set via the Gram system."""
    idx = np.flatnonzero(passive)
    Gp = G[np.ix_(idx, idx)]
    try:
        sol = cho_solve(cho_factor(Gp, lower=True), c[idx])
    except LinAlgError:
        sol, *_ = np.linalg.lstsq(Gp, c[idx], rcond=None)
    z = np.zeros(G.shape[0])
    z[idx] = sol
    return z


def solve_nnls(problem: NnlsProblem) -> NnlsResult:
    """Solve the non-negative least-squares problem.

    Returns a vector that is exactly elementwise >= 0.  If the outer
    active-set loop exceeds ``3 * n`` passes the best feasible iterate so
    far is returned with ``converged=False``.
    """
    Z = np.asarray(problem.design, dtype=float)
    y = np.asarray(problem.response, dtype=float)
    if Z.ndim != 2 or y.ndim != 1 or Z.shape[0] != y.size:
        raise ValueError(f"incompatible shapes {Z.shape} and {y.shape}")
    if problem.point_weights is None:
        w = np.ones(y.size)
    else:
        w = np.asarray(problem.point_weights, dtype=float)
        if w.shape != y.shape or np.any(w <= 0):
            raise ValueError("point_weights must be positive and match the response")
    if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise ValueError("non-finite entries in the NNLS problem")

    sw = np.sqrt(w)
    A = Z * sw[:, None]
    b = y * sw
    col_norms = np.linalg.norm(A, axis=0)
    usable = col_norms > _DEGENERATE_NORM
    scale = np.where(usable, col_norms, 1.0)
    A = A / scale

    n = A.shape[1]
    G = A.T @ A
    c = A.T @ b

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    tol = 1e-12 * max(1.0, float(np.linalg.norm(c, np.inf)))
    best_x, best_obj = x.copy(), float(b @ b)
    converged = True
    max_outer = 3 * n
    outer = 0
    while True:
        grad = c - G @ x  # negative gradient of the half objective
        candidates = (~passive) & usable & (grad > tol)
        if not np.any(candidates):
            break
        outer += 1
        if outer > max_outer:
            converged = False
            x = best_x
            break
        j = int(np.flatnonzero(candidates)[np.argmax(grad[candidates])])
        passive[j] = True
        while True:
            z = _solve_passive(G, c, passive)
            if np.min(z[passive]) > 0.0:
                x = z
                break
            mask = passive & (z <= 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = x[mask] / (x[mask] - z[mask])
            alpha = float(np.min(ratios))
            x = x + alpha * (z - x)
            x[x < tol] = 0.0
            passive = passive & (x > 0.0)
            if not np.any(passive):
                x = np.zeros(n)
                break
        obj = float(b @ b) - 2.0 * float(c @ x) + float(x @ (G @ x))
        if obj < best_obj:
            best_obj, best_x = obj, x.copy()

    x = np.maximum(x, 0.0)
    return NnlsResult(x / scale * usable, converged)
