"""Iterated Laplace approximation engine.

Builds a Gaussian mixture for a non-normalised target density by repeatedly
(1) fitting all component weights with non-negative least squares against
target evaluations at explored points and (2) adding one component at the
minimiser of a residual function of the current fit.

Two variants are supported:

* ``original``: one-sided residual (only underestimated regions attract new
  components), start selection by the density ratio, a stop rule on the
  stagnation of the summed weights, no pruning.
* ``modified``: two-sided residual, start selection by absolute difference,
  optional Hessian scaling and multiplicative scaling of duplicated
  component locations, weighted least squares, stagnation rule removed,
  final pruning of insignificant components.

Internally the target is shifted so its maximum found log value maps to a
density of about one; the residual bounds (``z_l``, ``epsilon_z``,
``delta_err``) are relative to that unit-height scale, which keeps the
algorithm usable for targets whose raw density values under- or overflow.
The shift is reported as ``log_shift`` and cancels in any standardised
comparison.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .density import TargetDensity
from .linalg import make_positive_definite
from .mixture import GaussianComponent, GaussianMixture, prune
from .nnls import NnlsProblem, solve_nnls
from .optimize import (
    NonFiniteObjectiveError,
    OptimSettings,
    minimize,
    numerical_hessian,
)

__all__ = [
    "TargetDensity",
    "IterLapConfig",
    "ExplorationState",
    "IterationRecord",
    "RunReport",
    "initial_components",
    "explore",
    "fit_weights",
    "residual_g_a",
    "residual_g_b",
    "select_starts_original",
    "select_starts_absdiff",
    "propose_component",
    "should_stop",
    "run",
]

_PD_FLOOR = 1e-8
_RUNAWAY_FACTOR = 1e6


@dataclass(frozen=True)
class IterLapConfig:
    """Every tunable of the engine; defaults follow the modified variant's
    published choices where one exists."""

    variant: str = "modified"
    n_c_max: int = 50
    n_starts_initial: int = 5
    n_x: int | None = None  # None -> 50 * dim
    z_l: float = 1e-4
    epsilon_z: float = math.exp(-10.0)
    alpha: float = 0.0
    kappa_a: float = 1.0
    kappa_b: float = 1.25
    n_dup: int = 1
    dup_radius: float = 1e-2  # in per-coordinate scale units
    delta_err: float = 0.0  # 0 disables the absolute-error stop
    delta_zeta: float = 0.01
    delta_lq: float = -10.0
    n_starts_per_iter: int = 5
    start_min_separation: float = 0.5  # in per-coordinate scale units
    prune_threshold: float = math.exp(-5.0)
    mean_point_weight: float = 10.0
    rng_seed: int = 0
    optim: OptimSettings = field(default_factory=OptimSettings)

    def __post_init__(self):
        if self.variant not in ("original", "modified"):
            raise ValueError(f"variant must be 'original' or 'modified', got {self.variant!r}")
        if self.n_c_max < 1 or self.n_starts_initial < 1 or self.n_starts_per_iter < 1:
            raise ValueError("counts must be positive")
        if self.n_dup < 1:
            raise ValueError("n_dup must be >= 1")
        if self.z_l <= 0 or self.epsilon_z <= 0 or self.kappa_a <= 0 or self.kappa_b <= 0:
            raise ValueError("z_l, epsilon_z, kappa_a, kappa_b must be > 0")
        if self.alpha < 0 or self.delta_err < 0:
            raise ValueError("alpha and delta_err must be >= 0")
        if self.delta_zeta <= 0 or self.dup_radius <= 0 or self.start_min_separation <= 0:
            raise ValueError("delta_zeta, dup_radius, start_min_separation must be > 0")
        if self.delta_lq >= 0:
            raise ValueError("delta_lq is a log-density cutoff and must be negative")
        if self.n_x is not None and self.n_x < 1:
            raise ValueError("n_x must be positive")

    def resolved_n_x(self, dim: int) -> int:
        return self.n_x if self.n_x is not None else 50 * dim


@dataclass
class ExplorationState:
    """Explored locations and the matrices driving each iteration.

    Rows of ``X``, entries of ``y``/``log_y``/``omega`` and rows of ``Z``
    stay index-aligned; ``Z`` has one column per mixture component.  ``y``
    holds shifted target densities ``exp(log q - log_shift)``.
    """

    dim: int
    scale: np.ndarray
    log_shift: float
    X: np.ndarray
    y: np.ndarray
    log_y: np.ndarray
    omega: np.ndarray
    Z: np.ndarray
    mixture: GaussianMixture
    lq_max: float = -np.inf
    zeta_history: list = field(default_factory=list)
    location_roots: list = field(default_factory=list)
    dup_counts: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, dim: int, scale: np.ndarray, log_shift: float) -> "ExplorationState":
        return cls(
            dim=dim,
            scale=np.asarray(scale, dtype=float),
            log_shift=float(log_shift),
            X=np.empty((0, dim)),
            y=np.empty(0),
            log_y=np.empty(0),
            omega=np.empty(0),
            Z=np.empty((0, 0)),
            mixture=GaussianMixture([], dim=dim),
        )

    def fitted_values(self) -> np.ndarray:
        """Current mixture values at every explored row (via Z)."""
        if len(self.mixture) == 0:
            return np.zeros(self.X.shape[0])
        return self.Z @ self.mixture._weights


def _scaled_distance(a: np.ndarray, b: np.ndarray, scale: np.ndarray) -> float:
    return float(np.linalg.norm((np.asarray(a) - np.asarray(b)) / scale))


def initial_components(
    t: TargetDensity, cfg: IterLapConfig, rng: np.random.Generator
) -> tuple[list[GaussianComponent], float]:
    """Multi-start mode search on -log q.

    Starts at the origin plus standard-normal draws, keeps distinct minima
    (separation measured with unit scale, since the curvature scale is not
    known yet) and pairs each with a repaired Hessian precision.  Returns
    the components and the best log density found (used as the run's shift).
    """
    d = t.dim

    def g(x):
        v = t.log_density(x)
        return np.inf if v == -np.inf else -v

    starts = [np.zeros(d)]
    if cfg.n_starts_initial > 1:
        starts += list(rng.standard_normal((cfg.n_starts_initial - 1, d)))
    results = []
    for s in starts:
        if not np.isfinite(g(s)):
            continue
        try:
            results.append(minimize(g, s, cfg.optim))
        except NonFiniteObjectiveError:
            continue
    if not results:
        raise ValueError("no starting point with a finite target density")
    results.sort(key=lambda r: r.value)
    kept = []
    for r in results:
        if all(
            _scaled_distance(r.argmin, k.argmin, np.ones(d)) >= cfg.start_min_separation
            for k in kept
        ):
            kept.append(r)
    comps = []
    for r in kept:
        try:
            H = numerical_hessian(g, r.argmin, cfg.optim.fd_step**0.5)
        except NonFiniteObjectiveError:
            continue
        if not np.all(np.isfinite(H)):
            continue
        # a saddle or ridge point can satisfy the gradient test without
        # being a mode; only curvature that is genuinely positive definite
        # yields a usable component
        eigs = np.linalg.eigvalsh(0.5 * (H + H.T))
        if eigs[0] <= 1e-8 * max(abs(eigs[-1]), 1.0):
            continue
        # the mode search minimises the residual of an empty mixture, so the
        # Hessian scale factor applies here exactly as it does to later
        # components
        Q = cfg.kappa_a * make_positive_definite(H, _PD_FLOOR)
        comps.append(GaussianComponent(r.argmin, Q, 1.0))
    if not comps:
        raise ValueError("all initial mode optimisations failed")
    log_shift = -min(r.value for r in results)
    return comps, log_shift


def explore(
    state: ExplorationState,
    new_component: GaussianComponent,
    t: TargetDensity,
    cfg: IterLapConfig,
    rng: np.random.Generator,
    root: int | None = None,
) -> None:
    """Add a component and extend the exploration matrices.

    Appends the component mean, ``n_x`` draws from it and any manual points
    the target supplies; evaluates the target there; extends ``Z`` with a new
    column (all rows) and new rows (all components).  The mean row gets the
    configured emphasis weight in the least-squares fit.
    """
    mu = new_component.mean
    draws = GaussianMixture([GaussianComponent(mu, new_component.precision, 1.0)]).sample(
        cfg.resolved_n_x(state.dim), rng
    )
    pts = [mu[None, :], draws]
    if t.manual_points is not None:
        extra = np.atleast_2d(np.asarray(t.manual_points(mu), dtype=float))
        if extra.size:
            pts.append(extra)
    new_pts = np.concatenate(pts, axis=0)

    lq = t.log_density_batch(new_pts) - state.log_shift
    with np.errstate(under="ignore"):
        y_new = np.exp(np.minimum(lq, 700.0))
    y_new = np.where(lq == -np.inf, 0.0, y_new)
    omega_new = np.ones(new_pts.shape[0])
    if cfg.variant == "modified":
        # point weighting in the least-squares fit is a modified-variant
        # feature; the original scheme solves the plain problem
        omega_new[0] = cfg.mean_point_weight

    # new column: the added component's density at all previously explored rows
    m_old = state.X.shape[0]
    if m_old:
        col = np.exp(np.minimum(new_component.log_density(state.X), 700.0))
    else:
        col = np.empty(0)

    new_index = len(state.mixture)
    state.mixture = GaussianMixture(
        list(state.mixture.components) + [new_component], dim=state.dim
    )
    # new rows: every component (including the new one) at the new points
    rows = np.exp(np.minimum(state.mixture.component_log_densities(new_pts), 700.0))

    if m_old:
        top = np.hstack([state.Z, col.reshape(m_old, 1)])
    else:
        top = np.empty((0, new_index + 1))
    state.Z = np.vstack([top, rows])
    state.X = np.vstack([state.X, new_pts])
    state.y = np.concatenate([state.y, y_new])
    state.log_y = np.concatenate([state.log_y, lq])
    state.omega = np.concatenate([state.omega, omega_new])
    finite = lq[np.isfinite(lq)]
    if finite.size:
        state.lq_max = max(state.lq_max, float(np.max(finite)))

    state.location_roots.append(new_index if root is None else root)
    key = state.location_roots[-1]
    state.dup_counts[key] = state.dup_counts.get(key, 0) + 1


def fit_weights(state: ExplorationState, cfg: IterLapConfig) -> bool:
    """Re-estimate all component weights by (weighted) NNLS; records the
    summed weight in the zeta history.  Returns the solver's convergence flag."""
    if len(state.mixture) == 0 or state.X.shape[0] == 0:
        raise ValueError("need at least one component and one explored point")
    res = solve_nnls(NnlsProblem(state.Z, state.y, state.omega))
    state.mixture = state.mixture.with_weights(res.x)
    state.zeta_history.append(float(np.sum(res.x)))
    return res.converged


def _shifted_q(state: ExplorationState, t: TargetDensity, x: np.ndarray) -> tuple[float, float]:
    """(log q - shift, shifted density) at a single point."""
    lq = t.log_density(x) - state.log_shift
    if lq == -np.inf:
        return -np.inf, 0.0
    return lq, math.exp(min(lq, 700.0))


def residual_g_a(x, state: ExplorationState, t: TargetDensity, cfg: IterLapConfig) -> float:
    """One-sided residual: -log of the underestimate, softened below z_l."""
    _, q = _shifted_q(state, t, x)
    z = q - float(state.mixture.value(np.asarray(x, dtype=float)))
    if z >= cfg.z_l:
        return -math.log(z)
    return cfg.z_l - z - math.log(cfg.z_l)


def residual_g_b(x, state: ExplorationState, t: TargetDensity, cfg: IterLapConfig) -> float:
    """Two-sided residual; the overestimate branch is optionally pulled
    toward high-density regions by alpha."""
    lq, q = _shifted_q(state, t, x)
    z = q - float(state.mixture.value(np.asarray(x, dtype=float)))
    if z >= 0.0:
        return -math.log(z + cfg.epsilon_z)
    if cfg.alpha > 0.0 and lq == -np.inf:
        return np.inf
    pull = cfg.alpha * (lq - state.lq_max) if cfg.alpha > 0.0 else 0.0
    return -(math.log(-z + cfg.epsilon_z) + pull) / (1.0 + cfg.alpha)


def _greedy_separated(
    X: np.ndarray, order: np.ndarray, scale: np.ndarray, min_sep: float, limit: int
) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for i in order:
        x = X[i]
        if all(_scaled_distance(x, k, scale) >= min_sep for k in kept):
            kept.append(x.copy())
            if len(kept) >= limit:
                break
    return kept


def select_starts_original(state: ExplorationState, cfg: IterLapConfig) -> list[np.ndarray]:
    """Rank explored rows by the ratio q / q_fit (rows with q_fit == 0 first)
    and keep up to n_starts_per_iter mutually separated points."""
    qt = state.fitted_values()
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            qt > 0.0, state.y / qt, np.where(state.y > 0.0, np.inf, 0.0)
        )
    order = np.argsort(-ratio, kind="stable")
    return _greedy_separated(
        state.X, order, state.scale, cfg.start_min_separation, cfg.n_starts_per_iter
    )


def select_starts_absdiff(state: ExplorationState, cfg: IterLapConfig) -> list[np.ndarray]:
    """Drop low-density rows, then greedily pick rows maximising the absolute
    fit error, enforcing the minimum separation."""
    keep = (state.log_y - state.lq_max) >= cfg.delta_lq
    if not np.any(keep):
        return []
    idx = np.flatnonzero(keep)
    qt = state.fitted_values()
    diffs = np.abs(state.y[idx] - qt[idx])
    order = idx[np.argsort(-diffs, kind="stable")]
    return _greedy_separated(
        state.X, order, state.scale, cfg.start_min_separation, cfg.n_starts_per_iter
    )


@dataclass(frozen=True)
class Proposal:
    component: GaussianComponent | None
    reason: str
    duplicate_root: int | None = None
    residual_value: float = np.inf


def propose_component(
    start: np.ndarray, state: ExplorationState, t: TargetDensity, cfg: IterLapConfig
) -> Proposal:
    """Minimise the variant's residual from a start and turn the minimiser
    into a component, or reject it.

    Rejections: runaway minimisers (optimisation escaped toward the tails),
    duplicates of an existing mean (always, for the original variant; past
    the n_dup budget for the modified one) and failed Hessian evaluation.
    A duplicate in the modified variant reuses the first precision at that
    location sharpened by kappa_b per prior duplicate; a fresh location gets
    kappa_a times the repaired residual Hessian.
    """
    residual = residual_g_a if cfg.variant == "original" else residual_g_b
    f = lambda x: residual(x, state, t, cfg)
    if not np.isfinite(f(np.asarray(start, dtype=float))):
        return Proposal(None, "nonfinite_start")
    try:
        res = minimize(f, start, cfg.optim)
    except NonFiniteObjectiveError:
        return Proposal(None, "nonfinite_start")
    mu = res.argmin
    if np.max(np.abs(mu) / state.scale) > _RUNAWAY_FACTOR:
        return Proposal(None, "runaway")

    dup_root = None
    for i, comp in enumerate(state.mixture.components):
        if _scaled_distance(mu, comp.mean, state.scale) < cfg.dup_radius:
            dup_root = state.location_roots[i]
            break
    if dup_root is not None:
        if cfg.variant == "original":
            return Proposal(None, "duplicate")
        j = state.dup_counts.get(dup_root, 0)
        if j >= cfg.n_dup:
            return Proposal(None, "duplicate_limit")
        q_first = state.mixture.components[dup_root].precision
        return Proposal(
            GaussianComponent(mu, cfg.kappa_b**j * q_first, 0.0),
            "duplicate",
            dup_root,
            res.value,
        )
    try:
        H = numerical_hessian(f, mu, cfg.optim.fd_step**0.5)
    except NonFiniteObjectiveError:
        return Proposal(None, "hessian_failed")
    if not np.all(np.isfinite(H)):
        return Proposal(None, "hessian_failed")
    Q = cfg.kappa_a * make_positive_definite(H, _PD_FLOOR)
    return Proposal(GaussianComponent(mu, Q, 0.0), "new", None, res.value)


def should_stop(
    state: ExplorationState, cfg: IterLapConfig, last_iteration_outcome: str | None
) -> str | None:
    """Stop reason, or None to continue.

    Reasons: component budget reached; absolute fit error below delta_err
    (when enabled); stagnation of the summed weights (original variant only);
    no acceptable new component in the last iteration.
    """
    if last_iteration_outcome == "rejected":
        return "no_new_component"
    if len(state.mixture) >= cfg.n_c_max:
        return "max_components"
    if cfg.delta_err > 0.0 and state.X.shape[0]:
        if float(np.max(np.abs(state.y - state.fitted_values()))) <= cfg.delta_err:
            return "error_threshold"
    if cfg.variant == "original" and len(state.zeta_history) >= 3:
        z2, z1, z0 = state.zeta_history[-3:]
        if z0 > 0 and abs(z0 - 0.5 * (z1 + z2)) / z0 < cfg.delta_zeta:
            return "zeta_stagnation"
    return None


@dataclass(frozen=True)
class IterationRecord:
    n_components: int
    zeta: float
    max_abs_residual: float
    start: tuple
    accepted_mean: tuple
    duplicate: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RunReport:
    mixture: GaussianMixture
    n_components: int
    iterations: tuple
    stop_reason: str
    wall_time: float
    log_shift: float
    variant: str
    pruned_degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "mixture": self.mixture.to_dict(),
            "n_components": self.n_components,
            "iterations": [it.to_dict() for it in self.iterations],
            "stop_reason": self.stop_reason,
            "wall_time_seconds": self.wall_time,
            "log_shift": self.log_shift,
            "variant": self.variant,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def run(t: TargetDensity, cfg: IterLapConfig) -> RunReport:
    """Build the full approximation: initial Laplace components, then the
    explore / fit / add-component loop until a stop rule fires, then a final
    weight re-estimation (and pruning, in the modified variant)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.rng_seed)
    comps, log_shift = initial_components(t, cfg, rng)
    comps = comps[: cfg.n_c_max]
    scale = np.mean(
        [1.0 / np.sqrt(np.diag(c.precision)) for c in comps], axis=0
    )
    scale = np.where(np.isfinite(scale) & (scale > 0), scale, 1.0)
    state = ExplorationState.empty(t.dim, scale, log_shift)
    for c in comps:
        explore(state, c, t, cfg, rng)
    fit_weights(state, cfg)

    iterations: list[IterationRecord] = []
    stop = should_stop(state, cfg, None)
    while stop is None:
        selector = (
            select_starts_original if cfg.variant == "original" else select_starts_absdiff
        )
        # The new location is the argmin of the residual; each start is a
        # separate descent and the best accepted minimiser wins.
        accepted = None
        chosen = None
        for s in selector(state, cfg):
            prop = propose_component(s, state, t, cfg)
            if prop.component is not None and (
                accepted is None or prop.residual_value < accepted.residual_value
            ):
                accepted, chosen = prop, s
        if accepted is None:
            stop = "no_new_component"
            break
        explore(state, accepted.component, t, cfg, rng, root=accepted.duplicate_root)
        fit_weights(state, cfg)
        iterations.append(
            IterationRecord(
                n_components=len(state.mixture),
                zeta=state.zeta_history[-1],
                max_abs_residual=float(
                    np.max(np.abs(state.y - state.fitted_values()))
                ),
                start=tuple(float(v) for v in chosen),
                accepted_mean=tuple(float(v) for v in accepted.component.mean),
                duplicate=accepted.duplicate_root is not None,
            )
        )
        stop = should_stop(state, cfg, "accepted")

    fit_weights(state, cfg)
    mixture = state.mixture
    # components assigned exactly zero weight by the final fit contribute
    # nothing to the density; dropping them is not pruning, just removal of
    # dead entries (the least-squares solve keeps them at zero anyway)
    if np.any(mixture.weights == 0.0) and np.any(mixture.weights > 0.0):
        mixture = GaussianMixture(
            [c for c in mixture.components if c.weight > 0.0], dim=state.dim
        )
    degenerate = False
    if cfg.variant == "modified":
        mixture, degenerate = prune(mixture, cfg.prune_threshold)
    return RunReport(
        mixture=mixture,
        n_components=len(mixture),
        iterations=tuple(iterations),
        stop_reason=stop,
        wall_time=time.perf_counter() - t0,
        log_shift=log_shift,
        variant=cfg.variant,
        pruned_degenerate=degenerate,
    )
