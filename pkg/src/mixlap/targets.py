"""Benchmark target densities.

Seven targets used throughout the library's demos and tests: a banana-shaped
2D density, a skewed 1D density, two more 2D densities (one bimodal), two
higher-dimensional densities with non-linear block dependencies, and the
marginal posterior of the two precision parameters of a random-walk dynamic
linear model (DLM), evaluated in log-precision space.

All log densities are vectorized over an (n, d) batch and finite on their
documented reference boxes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .density import TargetDensity
from .optimize import OptimSettings, minimize, numerical_hessian

__all__ = [
    "DlmInstance",
    "dlm_generate",
    "dlm_log_marginal",
    "dlm_log_marginal_lambda",
    "dlm_target",
    "registry",
    "make_target",
    "target_intro_banana",
    "target_skewed_1d",
    "target_ex6",
    "target_ex7",
    "target_ex8",
    "target_ex9",
]

_LOG_2PI = math.log(2.0 * math.pi)


def _log_normal(x, mean, var):
    return -0.5 * (_LOG_2PI + np.log(var)) - 0.5 * (x - mean) ** 2 / var


def target_intro_banana() -> TargetDensity:
    """2D banana: x2 follows a quadratic curve in x1."""

    def log_q(x):
        x = np.atleast_2d(x)
        return _log_normal(x[..., 0], 0.0, 100.0) + _log_normal(
            x[..., 1], 0.03 * x[..., 0] ** 2, 1.0
        )

    return TargetDensity(
        2,
        log_q,
        name="intro_banana",
        reference_box=((-30.0, 30.0), (-6.0, 33.0)),
        vectorized=True,
    )


def target_skewed_1d() -> TargetDensity:
    """1D density with a cubic hinge that sharpens the tails beyond |x| = 0.5."""

    def log_q(x):
        x = np.atleast_2d(x)[..., 0]
        hinge = np.maximum(np.abs(x) - 0.5, 0.0)
        return -(x**2) / 50.0 - hinge**3 / 50.0

    return TargetDensity(
        1, log_q, name="skewed1d", reference_box=((-12.0, 12.0),), vectorized=True
    )


def target_ex6() -> TargetDensity:
    """2D density with a parabolic conditional mean for x_b."""

    def log_q(x):
        x = np.atleast_2d(x)
        return _log_normal(x[..., 0], 0.0, 100.0) + _log_normal(
            x[..., 1], 0.03 * (x[..., 0] - 3.0) ** 2 + 5.0, 1.0
        )

    return TargetDensity(
        2,
        log_q,
        name="ex6",
        reference_box=((-30.0, 30.0), (-1.0, 44.0)),
        vectorized=True,
    )


def target_ex7() -> TargetDensity:
    """Bimodal 2D mixture of two parabolic branches."""

    def log_q(x):
        x = np.atleast_2d(x)
        xa, xb = x[..., 0], x[..., 1]
        l1 = _log_normal(xa, -1.0, 6.0) + _log_normal(
            xb, -0.5 * (xa + 1.0) ** 2 + 3.0, 2.0
        )
        l2 = _log_normal(xa, 1.0, 6.0) + _log_normal(
            xb, 0.5 * (xa - 1.0) ** 2 - 3.0, 2.0
        )
        m = np.maximum(l1, l2)
        return m + np.log(0.5 * np.exp(l1 - m) + 0.5 * np.exp(l2 - m))

    return TargetDensity(
        2,
        log_q,
        name="ex7",
        reference_box=((-8.0, 8.0), (-33.0, 33.0)),
        vectorized=True,
    )


@dataclass(frozen=True)
class _BlockParams:
    mu_a: np.ndarray
    var_a: np.ndarray
    A: np.ndarray
    b: np.ndarray
    var_b: np.ndarray
    C: np.ndarray
    var_c: np.ndarray


def _block_target(name: str, p: _BlockParams) -> TargetDensity:
    """Three-block density: Gaussian x_a, linear x_b | x_a, and x_c Gaussian
    around a linear map of the elementwise squares of the centred (x_a, x_b)."""
    da, db, dc = p.mu_a.size, p.b.size, p.var_c.size

    def log_q(x):
        x = np.atleast_2d(x)
        xa = x[..., :da]
        xb = x[..., da : da + db]
        xc = x[..., da + db :]
        ra = xa - p.mu_a
        mu_b = ra @ p.A.T + p.b
        rb = xb - mu_b
        mu_c = np.concatenate([ra**2, rb**2], axis=-1) @ p.C.T
        out = np.sum(_log_normal(xa, p.mu_a, p.var_a), axis=-1)
        out += np.sum(_log_normal(xb, mu_b, p.var_b), axis=-1)
        out += np.sum(_log_normal(xc, mu_c, p.var_c), axis=-1)
        return out

    # Reference box at mode +/- 6 conditional sd per coordinate (the mode is
    # (mu_a, b, 0)).  Propagating the squared terms by interval arithmetic
    # instead blows the box up by orders of magnitude and leaves every
    # evaluation point in negligible-density territory.
    k = 6.0
    sa, sb, sc = np.sqrt(p.var_a), np.sqrt(p.var_b), np.sqrt(p.var_c)
    mode = np.concatenate([p.mu_a, p.b, np.zeros(dc)])
    half = k * np.concatenate([sa, sb, sc])
    box = list(zip(mode - half, mode + half))

    return TargetDensity(
        da + db + dc,
        log_q,
        name=name,
        reference_box=tuple((float(lo), float(hi)) for lo, hi in box),
        vectorized=True,
    )


def target_ex8() -> TargetDensity:
    """6D block density: scalar x_a, scalar x_b, 4D x_c."""
    return _block_target(
        "ex8",
        _BlockParams(
            mu_a=np.array([-0.5]),
            var_a=np.array([6.0]),
            A=np.array([[-2.0]]),
            b=np.array([-1.0]),
            var_b=np.array([0.2]),
            C=np.array([[0.9, 0.3], [-0.3, -1.1], [-0.5, -0.6], [0.3, 0.2]]),
            var_c=np.array([0.6, 0.7, 0.8, 0.9]) / 3.0,
        ),
    )


def target_ex9() -> TargetDensity:
    """9D block density: 2D x_a, 2D x_b, 5D x_c."""
    return _block_target(
        "ex9",
        _BlockParams(
            mu_a=np.array([-0.5, -1.0]),
            var_a=np.array([6.0, 7.0]),
            A=np.array([[0.5, -1.2], [-2.9, -1.3]]),
            b=np.array([-1.0, -1.5]),
            var_b=np.array([0.2, 0.3]),
            C=np.array(
                [
                    [0.9, -1.3, -0.3, 0.8],
                    [-0.7, 0.8, -0.1, 0.6],
                    [0.7, -0.6, 1.4, 1.5],
                    [1.2, -1.2, 0.3, 0.0],
                    [1.3, 1.4, 1.4, 0.0],
                ]
            ),
            var_c=np.array([0.8, 0.9, 1.0, 1.1, 1.2]) / 4.0,
        ),
    )


# ---------------------------------------------------------------------------
# Dynamic linear model: random-walk state, Gaussian observations, Gamma priors
# on the two precisions.  The state is marginalised in closed form, leaving a
# 2D posterior over (lambda_u, lambda_v), approximated in log-precision space
# (tau_u, tau_v) where the support is unconstrained.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DlmInstance:
    n: int = 100
    prior_a: float = 1.0
    prior_b: float = 0.5
    prior_c: float = 1.0
    prior_d: float = 0.5
    true_lambda_u: float = 0.25
    true_lambda_v: float = 1.0
    rng_seed: int = 0
    y_obs: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("series length must be >= 2")
        for name in ("prior_a", "prior_b", "prior_c", "prior_d"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    def to_dict(self) -> dict:
        doc = {
            "n": self.n,
            "seed": self.rng_seed,
            "a": self.prior_a,
            "b": self.prior_b,
            "c": self.prior_c,
            "d": self.prior_d,
            "lambda_u": self.true_lambda_u,
            "lambda_v": self.true_lambda_v,
        }
        if self.y_obs is not None:
            doc["y_obs"] = np.asarray(self.y_obs).tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "DlmInstance":
        return cls(
            n=int(doc["n"]),
            prior_a=float(doc["a"]),
            prior_b=float(doc["b"]),
            prior_c=float(doc["c"]),
            prior_d=float(doc["d"]),
            true_lambda_u=float(doc["lambda_u"]),
            true_lambda_v=float(doc["lambda_v"]),
            rng_seed=int(doc["seed"]),
            y_obs=None if doc.get("y_obs") is None else np.array(doc["y_obs"]),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "DlmInstance":
        return cls.from_dict(json.loads(text))


def dlm_generate(inst: DlmInstance) -> DlmInstance:
    """Simulate the observed series; diffuse N(0, 10^2) start for the level."""
    rng = np.random.default_rng(inst.rng_seed)
    sigma_u = inst.true_lambda_u**-0.5
    sigma_v = inst.true_lambda_v**-0.5
    x = np.empty(inst.n)
    x[0] = 10.0 * rng.standard_normal()
    x[1:] = sigma_u * rng.standard_normal(inst.n - 1)
    x = np.cumsum(x)
    y = x + sigma_v * rng.standard_normal(inst.n)
    return replace(inst, y_obs=y)


def _random_walk_structure(n: int) -> np.ndarray:
    """Second-difference structure matrix (the precision of the random walk
    is lambda_u times this; rank n-1)."""
    R = 2.0 * np.eye(n)
    R[0, 0] = R[-1, -1] = 1.0
    idx = np.arange(n - 1)
    R[idx, idx + 1] = -1.0
    R[idx + 1, idx] = -1.0
    return R


@lru_cache(maxsize=8)
def _rw_eigen(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached eigendecomposition of the random-walk structure matrix."""
    evals, V = np.linalg.eigh(_random_walk_structure(n))
    return np.clip(evals, 0.0, None), V  # R is PSD; clip eigen noise


def _gamma_logpdf(lam, a, b):
    return a * math.log(b) - gammaln(a) + (a - 1.0) * np.log(lam) - b * lam


def dlm_log_marginal_lambda(inst: DlmInstance, lam_u, lam_v) -> np.ndarray | float:
    """Log non-normalised posterior of the precisions with the state
    marginalised out.  Vectorized over broadcastable lam_u, lam_v."""
    if inst.y_obs is None:
        raise ValueError("instance has no observed series; call dlm_generate first")
    y = np.asarray(inst.y_obs, dtype=float)
    n = inst.n
    lam_u, lam_v = np.broadcast_arrays(
        np.asarray(lam_u, dtype=float), np.asarray(lam_v, dtype=float)
    )
    scalar = lam_u.ndim == 0
    lu = np.atleast_1d(lam_u).ravel()
    lv = np.atleast_1d(lam_v).ravel()
    out = np.full(lu.size, -np.inf)
    ok = (lu > 0) & (lv > 0) & np.isfinite(lu) & np.isfinite(lv)
    R = _random_walk_structure(n)
    eye = np.eye(n)
    yy = float(y @ y)
    idx = np.flatnonzero(ok)
    chunk = max(1, 50_000_000 // (n * n))
    for lo in range(0, idx.size, chunk):
        sel = idx[lo : lo + chunk]
        Qp = lu[sel, None, None] * R + lv[sel, None, None] * eye
        try:
            L = np.linalg.cholesky(Qp)
        except np.linalg.LinAlgError:
            # fall back to per-point handling so a single bad point only
            # poisons itself
            for i in sel:
                out[i] = _dlm_single(inst, R, yy, lu[i], lv[i])
            continue
        logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
        rhs = lv[sel, None] * y
        mu = np.linalg.solve(Qp, rhs[:, :, None])[:, :, 0]
        quad = np.einsum("ij,ij->i", rhs, mu)  # mu' Q' mu with Q' mu = rhs
        out[sel] = (
            _gamma_logpdf(lu[sel], inst.prior_a, inst.prior_b)
            + _gamma_logpdf(lv[sel], inst.prior_c, inst.prior_d)
            - 0.5 * (n - 1) * _LOG_2PI
            + 0.5 * (n - 1) * np.log(lu[sel])
            - 0.5 * logdet
            + 0.5 * n * np.log(lv[sel])
            + 0.5 * (quad - lv[sel] * yy)
        )
    out = out.reshape(lam_u.shape) if not scalar else float(out[0])
    return out


def _dlm_single(inst, R, yy, lu, lv):
    n = inst.n
    Qp = lu * R + lv * np.eye(n)
    try:
        L = np.linalg.cholesky(Qp)
    except np.linalg.LinAlgError:
        return -np.inf
    y = np.asarray(inst.y_obs, dtype=float)
    rhs = lv * y
    mu = np.linalg.solve(Qp, rhs)
    return float(
        _gamma_logpdf(lu, inst.prior_a, inst.prior_b)
        + _gamma_logpdf(lv, inst.prior_c, inst.prior_d)
        - 0.5 * (n - 1) * _LOG_2PI
        + 0.5 * (n - 1) * math.log(lu)
        - np.sum(np.log(np.diag(L)))
        + 0.5 * n * math.log(lv)
        + 0.5 * (rhs @ mu - lv * yy)
    )


def dlm_log_marginal(inst: DlmInstance, tau_u, tau_v) -> np.ndarray | float:
    """Log posterior in log-precision space, including the change-of-variable
    term tau_u + tau_v.

    Deliberately an independent code path from the lambda version: the
    structure matrix is diagonalised once (R = V diag(e) V'), so the log
    determinant and the quadratic form become sums over eigenvalues instead
    of per-point Cholesky factorisations.  The two implementations
    cross-check each other.
    """
    if inst.y_obs is None:
        raise ValueError("instance has no observed series; call dlm_generate first")
    tau_u, tau_v = np.broadcast_arrays(
        np.asarray(tau_u, dtype=float), np.asarray(tau_v, dtype=float)
    )
    scalar = tau_u.ndim == 0
    tu = np.atleast_1d(tau_u).ravel()
    tv = np.atleast_1d(tau_v).ravel()
    y = np.asarray(inst.y_obs, dtype=float)
    n = inst.n
    evals, V = _rw_eigen(n)
    vy2 = (V.T @ y) ** 2
    yy = float(y @ y)
    # eigenvalues of Q' = e^tu R + e^tv I are e^tu e_i + e^tv
    with np.errstate(over="ignore"):
        denom = np.exp(tu)[:, None] * evals[None, :] + np.exp(tv)[:, None]
    log_det = np.sum(np.log(denom), axis=1)
    quad = np.exp(2.0 * tv) * np.sum(vy2[None, :] / denom, axis=1)
    out = (
        inst.prior_a * math.log(inst.prior_b)
        - gammaln(inst.prior_a)
        + inst.prior_a * tu
        - inst.prior_b * np.exp(tu)
        + inst.prior_c * math.log(inst.prior_d)
        - gammaln(inst.prior_c)
        + inst.prior_c * tv
        - inst.prior_d * np.exp(tv)
        - 0.5 * (n - 1) * _LOG_2PI
        + 0.5 * (n - 1) * tu
        - 0.5 * log_det
        + 0.5 * n * tv
        + 0.5 * (quad - np.exp(tv) * yy)
    )
    out = np.where(np.isfinite(out), out, -np.inf)
    return float(out[0]) if scalar else out.reshape(tau_u.shape)


def dlm_target(inst: DlmInstance | None = None) -> TargetDensity:
    """The DLM precision posterior as a 2D target in (tau_u, tau_v).

    The reference box is centred on the posterior mode (found numerically)
    and extends 6 local standard deviations per axis.
    """
    if inst is None:
        inst = DlmInstance()
    if inst.y_obs is None:
        inst = dlm_generate(inst)

    def log_q(x):
        x = np.atleast_2d(x)
        return dlm_log_marginal(inst, x[..., 0], x[..., 1])

    neg = lambda t: -float(dlm_log_marginal(inst, t[0], t[1]))
    res = minimize(neg, np.zeros(2), OptimSettings(grad_tol=1e-8))
    H = numerical_hessian(neg, res.argmin)
    sd = np.sqrt(np.diag(np.linalg.inv(H)))
    box = tuple(
        (float(m - 6.0 * s), float(m + 6.0 * s)) for m, s in zip(res.argmin, sd)
    )
    target = TargetDensity(
        2, log_q, name="dlm", reference_box=box, vectorized=True
    )
    # stash the instance so callers (CLI, tests) can recover the data
    object.__setattr__(target, "dlm_instance", inst)
    return target


_REGISTRY = {
    "intro_banana": (target_intro_banana, 2),
    "skewed1d": (target_skewed_1d, 1),
    "ex6": (target_ex6, 2),
    "ex7": (target_ex7, 2),
    "ex8": (target_ex8, 6),
    "ex9": (target_ex9, 9),
    "dlm": (dlm_target, 2),
}


def registry() -> dict[str, int]:
    """Known target names mapped to their dimension."""
    return {name: dim for name, (_, dim) in _REGISTRY.items()}


def make_target(name: str, dlm_instance: DlmInstance | None = None) -> TargetDensity:
    """Build a catalogue target by name; 'dlm' accepts an instance spec."""
    if name not in _REGISTRY:
        valid = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown target {name!r}; valid names: {valid}")
    factory, _ = _REGISTRY[name]
    if name == "dlm":
        return factory(dlm_instance)
    return factory()
