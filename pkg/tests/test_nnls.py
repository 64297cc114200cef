import itertools

import numpy as np
import pytest

from mixlap.nnls import NnlsProblem, NnlsResult, solve_nnls


def brute_force_objective(design, response, weights):
    """Best objective over all sign supports (exhaustive active-set oracle)."""
    m, n = design.shape
    w = np.ones(m) if weights is None else weights
    sw = np.sqrt(w)
    A = design * sw[:, None]
    b = response * sw
    best = float(b @ b)  # x = 0 is always feasible
    for r in range(1, n + 1):
        for support in itertools.combinations(range(n), r):
            sub = A[:, support]
            x_sub, *_ = np.linalg.lstsq(sub, b, rcond=None)
            if np.any(x_sub < 0):
                continue
            resid = b - sub @ x_sub
            best = min(best, float(resid @ resid))
    return best


def objective(design, response, weights, x):
    w = np.ones(design.shape[0]) if weights is None else weights
    r = response - design @ x
    return float(r @ (w * r))


def test_matches_exhaustive_enumeration_on_200_problems():
    rng = np.random.default_rng(20130603)
    for k in range(200):
        m = int(rng.integers(3, 21))
        n = int(rng.integers(1, 6))
        design = rng.standard_normal((m, n))
        # mix of consistent and inconsistent systems
        if k % 2 == 0:
            response = design @ np.abs(rng.standard_normal(n)) + 0.1 * rng.standard_normal(m)
        else:
            response = rng.standard_normal(m)
        weights = np.abs(rng.standard_normal(m)) + 0.1 if k % 3 == 0 else None
        res = solve_nnls(NnlsProblem(design, response, weights))
        assert isinstance(res, NnlsResult)
        assert np.all(res.x >= 0)
        got = objective(design, response, weights, res.x)
        want = brute_force_objective(design, response, weights)
        assert got <= want + 1e-7, f"problem {k}: {got} vs {want}"


def test_exact_recovery_of_nonnegative_solution():
    rng = np.random.default_rng(1)
    design = rng.standard_normal((40, 4))
    truth = np.array([0.5, 0.0, 2.0, 0.1])
    res = solve_nnls(NnlsProblem(design, design @ truth))
    assert np.allclose(res.x, truth, atol=1e-8)


def test_all_negative_correlation_gives_zero():
    design = np.ones((5, 2))
    response = -np.ones(5)
    res = solve_nnls(NnlsProblem(design, response))
    assert np.array_equal(res.x, np.zeros(2))


def test_point_weights_match_row_scaling():
    rng = np.random.default_rng(2)
    design = rng.standard_normal((30, 3))
    response = rng.standard_normal(30)
    w = np.abs(rng.standard_normal(30)) + 0.05
    weighted = solve_nnls(NnlsProblem(design, response, w))
    sw = np.sqrt(w)
    scaled = solve_nnls(NnlsProblem(design * sw[:, None], response * sw))
    assert np.allclose(weighted.x, scaled.x, atol=1e-9)


def test_degenerate_column_gets_zero_weight():
    rng = np.random.default_rng(3)
    design = np.column_stack([rng.standard_normal(20), np.zeros(20)])
    response = design[:, 0] * 2.0
    res = solve_nnls(NnlsProblem(design, response))
    assert res.x[1] == 0.0
    assert res.x[0] == pytest.approx(2.0, abs=1e-9)
