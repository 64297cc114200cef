"""Quasi-Newton minimisation and finite-difference derivatives.

BFGS with a backtracking (Armijo) line search and numeric central-difference
gradients.  The residual surfaces this library minimises are only piecewise
smooth, so the line search treats non-finite trial values as +inf and the
optimiser always returns the best point it visited, even when the search
stalls before the gradient test is met.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "OptimSettings",
    "OptimResult",
    "NonFiniteObjectiveError",
    "minimize",
    "numerical_gradient",
    "numerical_hessian",
]

_EPS = float(np.finfo(float).eps)
_DEFAULT_FD_STEP = _EPS ** (1.0 / 3.0)  # ~6.06e-6, central first differences
_HESS_STEP = _EPS**0.25  # ~1.22e-4, central second differences


class NonFiniteObjectiveError(ValueError):
    """Objective evaluated to a non-finite value where finiteness is required."""


@dataclass(frozen=True)
class OptimSettings:
    grad_tol: float = 1e-6
    max_iters: int = 200
    fd_step: float = _DEFAULT_FD_STEP

    def __post_init__(self):
        if self.grad_tol <= 0 or self.max_iters <= 0 or self.fd_step <= 0:
            raise ValueError("all optimiser settings must be strictly positive")


@dataclass(frozen=True)
class OptimResult:
    argmin: np.ndarray
    value: float
    converged: bool
    n_evals: int


def numerical_gradient(f, x: np.ndarray, fd_step: float = _DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient with per-coordinate step ``h_j = fd_step * max(1, |x_j|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        h = fd_step * max(1.0, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        fp, fm = f(xp), f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteObjectiveError(
                f"non-finite value probing gradient coordinate {j}"
            )
        g[j] = (fp - fm) / (2.0 * h)
    return g


def numerical_hessian(f, x: np.ndarray, fd_step: float = _HESS_STEP) -> np.ndarray:
    """Central second differences, symmetrised; steps scale with max(1, |x_j|)."""
    x = np.asarray(x, dtype=float)
    d = x.size
    h = fd_step * np.maximum(1.0, np.abs(x))
    f0 = f(x)
    if not np.isfinite(f0):
        raise NonFiniteObjectiveError("non-finite value at the Hessian centre point")
    H = np.empty((d, d))
    for i in range(d):
        xp, xm = x.copy(), x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        fp, fm = f(xp), f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteObjectiveError(
                f"non-finite value probing Hessian coordinate pair ({i}, {i})"
            )
        H[i, i] = (fp - 2.0 * f0 + fm) / h[i] ** 2
    for i in range(d):
        for j in range(i + 1, d):
            vals = []
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                xt = x.copy()
                xt[i] += si * h[i]
                xt[j] += sj * h[j]
                v = f(xt)
                if not np.isfinite(v):
                    raise NonFiniteObjectiveError(
                        f"non-finite value probing Hessian coordinate pair ({i}, {j})"
                    )
                vals.append(v)
            H[i, j] = H[j, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (
                4.0 * h[i] * h[j]
            )
    return (H + H.T) / 2.0


def minimize(f, x0: np.ndarray, settings: OptimSettings = OptimSettings()) -> OptimResult:
    """BFGS descent with Armijo backtracking (shrink 1/2, initial step 1).

    Converged means the inf-norm of the numeric gradient dropped below
    ``grad_tol``.  Non-finite trial values are treated as +inf by the line
    search; the best point seen is always the one returned.
    """
    x = np.asarray(x0, dtype=float).copy()
    n_evals = 1
    fx = float(f(x))
    if not np.isfinite(fx):
        raise NonFiniteObjectiveError("objective is non-finite at the starting point")

    def fsafe(pt):
        nonlocal n_evals
        n_evals += 1
        v = f(pt)
        return float(v) if np.isfinite(v) else np.inf

    d = x.size
    best_x, best_f = x.copy(), fx
    Hinv = np.eye(d)
    try:
        g = numerical_gradient(f, x, settings.fd_step)
    except NonFiniteObjectiveError:
        return OptimResult(best_x, best_f, False, n_evals)
    n_evals += 2 * d
    converged = False
    c1 = 1e-4
    for _ in range(settings.max_iters):
        if np.max(np.abs(g)) <= settings.grad_tol:
            converged = True
            break
        p = -Hinv @ g
        slope = float(p @ g)
        if slope >= 0:  # loss of descent direction; restart from steepest descent
            Hinv = np.eye(d)
            p = -g
            slope = float(p @ g)
        t = 1.0
        f_new = np.inf
        while t >= 1e-14:
            f_new = fsafe(x + t * p)
            if f_new <= fx + c1 * t * slope:
                break
            t *= 0.5
        else:
            break  # line search stalled
        if not np.isfinite(f_new):
            break
        x_new = x + t * p
        try:
            g_new = numerical_gradient(f, x_new, settings.fd_step)
        except NonFiniteObjectiveError:
            if f_new < best_f:
                best_x, best_f = x_new, f_new
            break
        n_evals += 2 * d
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(yv):
            rho = 1.0 / sy
            I = np.eye(d)
            V = I - rho * np.outer(s, yv)
            Hinv = V @ Hinv @ V.T + rho * np.outer(s, s)
        else:
            Hinv = np.eye(d)
        x, fx, g = x_new, f_new, g_new
        if fx < best_f:
            best_x, best_f = x.copy(), fx
    else:
        converged = False
    if fx < best_f:
        best_x, best_f = x.copy(), fx
    return OptimResult(best_x, best_f, converged, n_evals)
