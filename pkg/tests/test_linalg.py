import numpy as np
import pytest

from mixlap.linalg import (
    NotPositiveDefiniteError,
    cholesky,
    log_det_from_cholesky,
    make_positive_definite,
    solve_spd,
    try_cholesky,
)


def random_spd(rng, d, cond=10.0):
    """Random SPD matrix with a roughly controlled condition number."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eigs = np.geomspace(1.0, cond, d)
    return q @ np.diag(eigs) @ q.T


def test_cholesky_round_trip():
    rng = np.random.default_rng(0)
    for d in (1, 2, 5, 9):
        m = random_spd(rng, d)
        L = cholesky(m)
        assert np.allclose(L @ L.T, m, rtol=1e-12, atol=1e-12)
        assert np.allclose(np.triu(L, 1), 0.0)


def test_cholesky_rejects_indefinite():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(m)
    assert try_cholesky(m) is None


def test_try_cholesky_success():
    m = np.diag([4.0, 9.0])
    L = try_cholesky(m)
    assert L is not None
    assert np.allclose(np.diag(L), [2.0, 3.0])


def test_log_det_from_cholesky_matches_slogdet():
    rng = np.random.default_rng(1)
    for d in (2, 4, 7):
        m = random_spd(rng, d, cond=100.0)
        _, expected = np.linalg.slogdet(m)
        assert log_det_from_cholesky(cholesky(m)) == pytest.approx(expected, rel=1e-10)


def test_make_positive_definite_keeps_spd_input():
    rng = np.random.default_rng(2)
    m = random_spd(rng, 4)
    out = make_positive_definite(m)
    assert np.array_equal(out, m)


def test_make_positive_definite_repairs_indefinite():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])
    out = make_positive_definite(m)
    eigs = np.linalg.eigvalsh(out)
    assert np.all(eigs > 0)
    # idempotent: repairing the repaired matrix changes nothing
    again = make_positive_definite(out)
    assert np.allclose(again, out, rtol=0, atol=1e-15)


def test_make_positive_definite_zero_matrix():
    out = make_positive_definite(np.zeros((3, 3)), floor_ratio=1e-8)
    assert np.allclose(out, 1e-8 * np.eye(3))


def test_solve_spd_round_trip():
    rng = np.random.default_rng(3)
    for cond in (10.0, 1e4, 1e8):
        m = random_spd(rng, 6, cond=cond)
        b = rng.standard_normal(6)
        x = solve_spd(m, b)
        assert np.allclose(m @ x, b, rtol=1e-8, atol=1e-8 * np.linalg.norm(b))
