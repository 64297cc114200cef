"""Dense symmetric linear algebra helpers.

Thin wrappers around LAPACK (via numpy/scipy) that give the rest of the
library a uniform failure mode for non-positive-definite matrices and a
spectral repair routine for Hessians that come out indefinite from finite
differences.

All tolerances here are implementation guarantees, not user knobs.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_solve
from scipy.linalg import cholesky as _scipy_cholesky

__all__ = [
    "NotPositiveDefiniteError",
    "cholesky",
    "try_cholesky",
    "log_det_from_cholesky",
    "make_positive_definite",
    "solve_spd",
]


class NotPositiveDefiniteError(ValueError):
    """Raised when a matrix expected to be positive definite is not."""


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular factor L with ``m = L @ L.T``.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot is not strictly positive.
    """
    m = np.asarray(m, dtype=float)
    try:
        return _scipy_cholesky(m, lower=True)
    except LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc


def try_cholesky(m: np.ndarray) -> np.ndarray | None:
    """Like :func:`cholesky` but returns ``None`` instead of raising."""
    try:
        return cholesky(m)
    except NotPositiveDefiniteError:
        return None


def log_det_from_cholesky(chol_lower: np.ndarray) -> float:
    """log-determinant of ``L @ L.T`` given its lower factor ``L``."""
    return 2.0 * float(np.sum(np.log(np.diag(chol_lower))))


def make_positive_definite(m: np.ndarray, floor_ratio: float = 1e-8) -> np.ndarray:
    """Raise small or negative eigenvalues so the matrix becomes SPD.

    Eigenvalues below ``floor_ratio * max(|eigenvalues|)`` are lifted to
    that floor and the matrix is reassembled from its eigendecomposition.
    A matrix that already satisfies the floor is returned unchanged, which
    makes the operation idempotent.  A zero matrix maps to
    ``floor_ratio * I`` (reference scale 1).

    Eigenvalue flooring is used instead of diagonal jitter so that later
    whole-matrix scaling of precisions does not get directionally distorted.
    """
    if not 0.0 < floor_ratio <= 1.0:
        raise ValueError(f"floor_ratio must be in (0, 1], got {floor_ratio}")
    m = np.asarray(m, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(m)
    ref = float(np.max(np.abs(eigvals)))
    if ref == 0.0:
        ref = 1.0
    floor = floor_ratio * ref
    if eigvals[0] >= floor:
        return m
    fixed = (eigvecs * np.maximum(eigvals, floor)) @ eigvecs.T
    return (fixed + fixed.T) / 2.0


def solve_spd(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``m @ x = b`` for symmetric positive definite ``m``.

    Propagates :class:`NotPositiveDefiniteError` from the factorization.
    """
    L = cholesky(m)
    return cho_solve((L, True), np.asarray(b, dtype=float))
