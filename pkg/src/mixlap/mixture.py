"""Weighted Gaussian mixtures parametrised by precision matrices.

Components carry non-normalised weights; the mixture value is
``sum_i w_i N(x | mu_i, Q_i)`` with ``Q_i`` a precision matrix.  Densities
are always computed through the log domain (log-sum-exp) so that far tails
in high dimension underflow to zero instead of producing NaNs.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .linalg import cholesky

__all__ = [
    "GaussianComponent",
    "GaussianMixture",
    "component_log_density",
    "prune",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component ``w * N(x | mean, precision)``.

    ``chol`` (lower factor of the precision) and ``log_norm_const`` are
    derived at construction; the precision must be positive definite.
    """

    mean: np.ndarray
    precision: np.ndarray
    weight: float = 1.0
    chol: np.ndarray = field(init=False, repr=False)
    log_norm_const: float = field(init=False, repr=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        precision = np.asarray(self.precision, dtype=float)
        if precision.shape != (mean.size, mean.size):
            raise ValueError(
                f"precision shape {precision.shape} does not match dim {mean.size}"
            )
        if self.weight < 0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")
        L = cholesky(precision)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "precision", precision)
        object.__setattr__(self, "chol", L)
        object.__setattr__(
            self,
            "log_norm_const",
            float(np.sum(np.log(np.diag(L))) - 0.5 * mean.size * _LOG_2PI),
        )

    @property
    def dim(self) -> int:
        return self.mean.size

    def log_density(self, x: np.ndarray) -> np.ndarray:
        """log N(x | mean, precision) for a point or an (n, d) batch."""
        x = np.asarray(x, dtype=float)
        diff = np.atleast_2d(x) - self.mean
        u = diff @ self.chol  # rows are L^T (x - mu)
        quad = np.einsum("ij,ij->i", u, u)
        out = self.log_norm_const - 0.5 * quad
        return out if x.ndim > 1 else float(out[0])


def component_log_density(c: GaussianComponent, x: np.ndarray) -> float:
    """Functional form of :meth:`GaussianComponent.log_density`."""
    return c.log_density(x)


class GaussianMixture:
    """Ordered, immutable collection of :class:`GaussianComponent`.

    Component order is creation order and is never resorted; weights are
    non-normalised.
    """

    def __init__(self, components, dim: int | None = None):
        comps = tuple(components)
        if comps:
            dims = {c.dim for c in comps}
            if len(dims) != 1:
                raise ValueError(f"components disagree on dimension: {sorted(dims)}")
            d = comps[0].dim
            if dim is not None and dim != d:
                raise ValueError(f"dim={dim} but components have dim {d}")
            dim = d
        elif dim is None:
            raise ValueError("empty mixture needs an explicit dim")
        self.components = comps
        self.dim = int(dim)
        n = len(comps)
        self._weights = np.array([c.weight for c in comps], dtype=float)
        self._means = (
            np.stack([c.mean for c in comps]) if n else np.empty((0, self.dim))
        )
        self._chols = (
            np.stack([c.chol for c in comps])
            if n
            else np.empty((0, self.dim, self.dim))
        )
        self._log_norms = np.array([c.log_norm_const for c in comps], dtype=float)

    def __len__(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return self._weights.copy()

    def with_weights(self, weights) -> "GaussianMixture":
        """New mixture with the same components but replaced weights."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(self),):
            raise ValueError(f"expected {len(self)} weights, got {weights.shape}")
        return GaussianMixture(
            [
                GaussianComponent(c.mean, c.precision, float(w))
                for c, w in zip(self.components, weights)
            ],
            dim=self.dim,
        )

    def component_log_densities(self, x: np.ndarray) -> np.ndarray:
        """Matrix of log N(x_k | mu_i, Q_i), shape (n_points, n_components).

        Accepts a single point (d,) or a batch (n, d); large batches are
        processed in chunks to bound temporary memory.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        n, nc = pts.shape[0], len(self)
        out = np.empty((n, nc))
        chunk = max(1, 2_000_000 // max(1, nc * self.dim))
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            diff = pts[lo:hi, None, :] - self._means[None, :, :]
            u = np.einsum("kij,nki->nkj", self._chols, diff)
            out[lo:hi] = self._log_norms - 0.5 * np.einsum("nkj,nkj->nk", u, u)
        return out[0] if single else out

    def value(self, x: np.ndarray) -> np.ndarray | float:
        """Mixture density ``sum_i w_i N(x | mu_i, Q_i)``, zero when empty."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if len(self) == 0:
            return 0.0 if single else np.zeros(np.atleast_2d(x).shape[0])
        logs = np.atleast_2d(self.component_log_densities(x))
        pos = self._weights > 0
        if not np.any(pos):
            return 0.0 if single else np.zeros(logs.shape[0])
        lw = np.log(self._weights[pos]) + logs[:, pos]
        m = np.max(lw, axis=1)
        vals = np.where(
            np.isfinite(m), np.exp(m) * np.sum(np.exp(lw - m[:, None]), axis=1), 0.0
        )
        return float(vals[0]) if single else vals

    def log_value(self, x: np.ndarray) -> np.ndarray | float:
        """log of :meth:`value`; -inf where the mixture underflows."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        npts = np.atleast_2d(x).shape[0]
        if len(self) == 0 or not np.any(self._weights > 0):
            out = np.full(npts, -np.inf)
            return float(out[0]) if single else out
        logs = np.atleast_2d(self.component_log_densities(x))
        pos = self._weights > 0
        lw = np.log(self._weights[pos]) + logs[:, pos]
        m = np.max(lw, axis=1)
        with np.errstate(invalid="ignore"):
            out = m + np.log(np.sum(np.exp(lw - m[:, None]), axis=1))
        out = np.where(np.isfinite(m), out, -np.inf)
        return float(out[0]) if single else out

    def sample(self, n: int, rng: np.random.Generator | int) -> np.ndarray:
        """Draw ``n`` points; component chosen with probability w_i / sum(w).

        Each draw is ``mu + L^{-T} z`` with ``z`` standard normal and ``L``
        the precision Cholesky factor.  Deterministic for a fixed seed.
        """
        if len(self) == 0:
            raise ValueError("cannot sample from an empty mixture")
        total = float(np.sum(self._weights))
        if not np.isfinite(total) or total <= 0:
            raise ValueError("mixture weights must be finite with positive sum")
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        idx = rng.choice(len(self), size=n, p=self._weights / total)
        z = rng.standard_normal((n, self.dim))
        out = np.empty((n, self.dim))
        for i in range(len(self)):
            sel = idx == i
            if not np.any(sel):
                continue
            c = self.components[i]
            out[sel] = c.mean + solve_triangular(
                c.chol, z[sel].T, lower=True, trans="T"
            ).T
        return out

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "components": [
                {
                    "weight": c.weight,
                    "mean": c.mean.tolist(),
                    "precision": c.precision.tolist(),
                }
                for c in self.components
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GaussianMixture":
        comps = [
            GaussianComponent(
                np.array(e["mean"], dtype=float),
                np.array(e["precision"], dtype=float),
                float(e["weight"]),
            )
            for e in doc["components"]
        ]
        return cls(comps, dim=int(doc["dim"]))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "GaussianMixture":
        return cls.from_dict(json.loads(text))


def prune(
    mix: GaussianMixture, min_normalised_weight: float
) -> tuple[GaussianMixture, bool]:
    """Drop components whose normalised weight falls below the threshold.

    Weights are normalised by the largest weight, so the threshold measures
    significance relative to the dominant component.  Remaining weights are
    left as-is (not renormalised) and order is preserved.  If every
    component falls below the threshold the single largest one is kept and
    the returned flag is True (degenerate prune); a warning is emitted in
    that case.
    """
    total = float(np.sum(mix.weights))
    if total <= 0:
        raise ValueError("prune requires a positive total weight")
    normalised = mix.weights / float(np.max(mix.weights))
    keep = normalised >= min_normalised_weight
    if not np.any(keep):
        warnings.warn(
            "all components below prune threshold; keeping the largest",
            RuntimeWarning,
            stacklevel=2,
        )
        keep = normalised == np.max(normalised)
        first = int(np.argmax(keep))
        keep[:] = False
        keep[first] = True
        return GaussianMixture(
            [c for c, k in zip(mix.components, keep) if k], dim=mix.dim
        ), True
    return GaussianMixture(
        [c for c, k in zip(mix.components, keep) if k], dim=mix.dim
    ), False
