import math

import numpy as np
import pytest

from mixlap.density import TargetDensity
from mixlap.engine import (
    ExplorationState,
    IterLapConfig,
    explore,
    fit_weights,
    residual_g_a,
    residual_g_b,
    run,
    should_stop,
)
from mixlap.mixture import GaussianComponent, GaussianMixture


def constant_target(value, dim=1):
    """Target whose (shifted) density is the same everywhere."""
    return TargetDensity(dim=dim, log_q=lambda x: math.log(value))


def empty_state(dim=1):
    return ExplorationState.empty(dim, np.ones(dim), 0.0)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


def test_one_sided_residual_continuous_at_threshold():
    cfg = IterLapConfig(variant="original")
    state = empty_state()
    x = np.zeros(1)
    # at z exactly z_l the two branch formulas must coincide
    at = residual_g_a(x, state, constant_target(cfg.z_l), cfg)
    other_branch = cfg.z_l - cfg.z_l - math.log(cfg.z_l)
    assert abs(at - other_branch) < 1e-12
    # values just either side of the threshold stay within the local slope
    h = 1e-13
    above = residual_g_a(x, state, constant_target(cfg.z_l + h), cfg)
    below = residual_g_a(x, state, constant_target(cfg.z_l - h), cfg)
    assert abs(above - at) < 1e-8
    assert abs(below - at) < 1e-8


def test_one_sided_residual_branch_values():
    cfg = IterLapConfig(variant="original")
    state = empty_state()
    x = np.zeros(1)
    assert residual_g_a(x, state, constant_target(0.5), cfg) == pytest.approx(
        -math.log(0.5), abs=1e-14
    )
    # fully overestimated point (q = 0 against a fitted mixture of 0): linear branch
    t = TargetDensity(dim=1, log_q=lambda x: -np.inf)
    assert residual_g_a(x, state, t, cfg) == pytest.approx(
        cfg.z_l - 0.0 - math.log(cfg.z_l), abs=1e-14
    )


def overshooting_state(mix_value_target=3.0):
    """State whose one-component mixture evaluates to mix_value_target at 0."""
    w = mix_value_target * math.sqrt(2 * math.pi)
    state = empty_state()
    state.mixture = GaussianMixture([GaussianComponent([0.0], [[1.0]], w)])
    return state


def test_two_sided_residual_symmetric_when_alpha_zero():
    cfg = IterLapConfig(variant="modified", alpha=0.0)
    state = overshooting_state(3.0)
    c = 1.2
    over = residual_g_b(np.zeros(1), state, constant_target(3.0 + c), cfg)
    under = residual_g_b(np.zeros(1), state, constant_target(3.0 - c), cfg)
    assert abs(over - under) < 1e-12
    assert over == pytest.approx(-math.log(c + cfg.epsilon_z), abs=1e-12)


def test_two_sided_residual_alpha_pull_value():
    cfg = IterLapConfig(variant="modified", alpha=3.0)
    state = overshooting_state(3.0)
    # z = q - fitted = 2 - 3 = -1, and the point sits 2 log units below the peak
    state.lq_max = math.log(2.0) + 2.0
    got = residual_g_b(np.zeros(1), state, constant_target(2.0), cfg)
    want = -(math.log(1.0 + cfg.epsilon_z) + 3.0 * (-2.0)) / 4.0
    assert got == pytest.approx(want, abs=1e-12)
    assert got == pytest.approx(1.4999887, abs=1e-6)


def test_two_sided_residual_alpha_rejects_zero_density_overshoot():
    cfg = IterLapConfig(variant="modified", alpha=1.0)
    state = overshooting_state(3.0)
    t = TargetDensity(dim=1, log_q=lambda x: -np.inf)
    assert residual_g_b(np.zeros(1), state, t, cfg) == np.inf


# ---------------------------------------------------------------------------
# stop rules
# ---------------------------------------------------------------------------


def test_weight_sum_stagnation_rule():
    state = empty_state()
    cfg = IterLapConfig(variant="original", n_c_max=50)
    state.zeta_history = [1.0, 1.0, 1.0]
    assert should_stop(state, cfg, "accepted") == "zeta_stagnation"
    state.zeta_history = [1.0, 2.0, 4.0]  # |4 - 1.5| / 4 = 0.625, keep going
    assert should_stop(state, cfg, "accepted") is None


def test_modified_variant_ignores_stagnation():
    state = empty_state()
    state.zeta_history = [1.0, 1.0, 1.0]
    cfg = IterLapConfig(variant="modified", n_c_max=50)
    assert should_stop(state, cfg, "accepted") is None


def test_stop_on_component_budget_and_rejection():
    state = empty_state()
    state.mixture = GaussianMixture([GaussianComponent([0.0], [[1.0]], 1.0)])
    assert should_stop(state, IterLapConfig(n_c_max=1), "accepted") == "max_components"
    assert should_stop(state, IterLapConfig(), "rejected") == "no_new_component"


# ---------------------------------------------------------------------------
# exploration bookkeeping
# ---------------------------------------------------------------------------


def test_explore_row_count_and_emphasis():
    t = TargetDensity(dim=2, log_q=lambda x: float(-0.5 * np.sum(x**2)))
    comp = GaussianComponent(np.zeros(2), np.eye(2), 1.0)
    for variant, mean_w in (("modified", 10.0), ("original", 1.0)):
        cfg = IterLapConfig(variant=variant, n_x=10)
        state = ExplorationState.empty(2, np.ones(2), 0.0)
        explore(state, comp, t, cfg, np.random.default_rng(0))
        assert state.X.shape == (11, 2)  # the mean plus n_x draws
        assert state.Z.shape == (11, 1)
        assert state.omega[0] == mean_w
        assert np.all(state.omega[1:] == 1.0)
        assert np.allclose(state.X[0], comp.mean)


def test_explore_appends_manual_points():
    t = TargetDensity(
        dim=1,
        log_q=lambda x: float(-0.5 * np.sum(x**2)),
        manual_points=lambda mu: np.array([[5.0], [-5.0]]),
    )
    cfg = IterLapConfig(n_x=4)
    state = empty_state()
    explore(state, GaussianComponent([0.0], [[1.0]], 1.0), t, cfg, np.random.default_rng(0))
    assert state.X.shape[0] == 1 + 4 + 2
    assert 5.0 in state.X[:, 0] and -5.0 in state.X[:, 0]


def test_fit_weights_records_weight_sum():
    t = TargetDensity(dim=1, log_q=lambda x: float(-0.5 * np.sum(x**2)))
    cfg = IterLapConfig(n_x=30)
    state = empty_state()
    explore(state, GaussianComponent([0.0], [[1.0]], 1.0), t, cfg, np.random.default_rng(1))
    fit_weights(state, cfg)
    assert len(state.zeta_history) == 1
    assert state.zeta_history[0] == pytest.approx(np.sum(state.mixture.weights))
    assert state.zeta_history[0] > 0


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("variant", ["original", "modified"])
def test_standard_normal_recovered_with_one_component(variant):
    t = TargetDensity(dim=1, log_q=lambda x: float(-0.5 * np.sum(x**2)))
    rep = run(t, IterLapConfig(variant=variant, rng_seed=0))
    assert rep.n_components == 1
    c = rep.mixture.components[0]
    assert abs(c.mean[0]) < 1e-4
    assert c.precision[0, 0] == pytest.approx(1.0, abs=1e-3)
    assert rep.variant == variant
    assert rep.stop_reason in ("no_new_component", "zeta_stagnation", "error_threshold")


def test_run_deterministic_for_fixed_seed():
    t = TargetDensity(
        dim=1,
        log_q=lambda x: float(-(x[0] ** 2) / 50.0 - max(abs(x[0]) - 0.5, 0.0) ** 3 / 50.0),
    )
    cfg = IterLapConfig(variant="modified", n_c_max=5, rng_seed=3)
    a = run(t, cfg)
    b = run(t, cfg)
    assert a.mixture.to_json() == b.mixture.to_json()
    assert a.stop_reason == b.stop_reason


def test_run_respects_component_budget():
    t = TargetDensity(dim=1, log_q=lambda x: float(-(x[0] ** 2) / 50.0))
    rep = run(t, IterLapConfig(variant="original", n_c_max=3, rng_seed=0))
    assert rep.n_components <= 3


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        IterLapConfig(variant="fast")
    with pytest.raises(ValueError):
        IterLapConfig(n_c_max=0)
    with pytest.raises(ValueError):
        IterLapConfig(n_dup=0)
    with pytest.raises(ValueError):
        IterLapConfig(z_l=0.0)
    with pytest.raises(ValueError):
        IterLapConfig(alpha=-1.0)
    with pytest.raises(ValueError):
        IterLapConfig(delta_lq=1.0)
    with pytest.raises(ValueError):
        IterLapConfig(n_x=0)


def test_default_exploration_size_scales_with_dimension():
    assert IterLapConfig().resolved_n_x(3) == 150
    assert IterLapConfig(n_x=7).resolved_n_x(3) == 7
