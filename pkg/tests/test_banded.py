import numpy as np
import pytest

from stfe.banded import (
    CyclicPentaSolver,
    LinearSolveError,
    condition_estimate,
    cyclic_matvec,
    solve_cyclic_penta,
    to_dense,
)


def _random_diags(n, seed=0, dominance=6.0):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(5, n))
    d[2] = dominance + np.abs(d[2])
    return d


def test_to_dense_places_corners():
    d = np.arange(1.0, 31.0).reshape(5, 6)
    A = to_dense(d)
    assert A[0, 4] == d[0, 0] and A[0, 5] == d[1, 0]
    assert A[5, 0] == d[3, 5] and A[5, 1] == d[4, 5]
    assert A[2, 2] == d[2, 2]


def test_matvec_matches_dense():
    d = _random_diags(11)
    x = np.random.default_rng(1).normal(size=11)
    assert np.allclose(cyclic_matvec(d, x), to_dense(d) @ x, atol=1e-13)


@pytest.mark.parametrize("n", [5, 6, 17, 128])
def test_woodbury_matches_dense(n):
    d = _random_diags(n, seed=n)
    b = np.random.default_rng(n + 1).normal(size=n)
    x = solve_cyclic_penta(d, b)
    assert np.allclose(x, solve_cyclic_penta(d, b, method="dense"), atol=1e-12)


def test_solver_reuses_factorization():
    d = _random_diags(32, seed=3)
    s = CyclicPentaSolver(d)
    rng = np.random.default_rng(4)
    for _ in range(3):
        b = rng.normal(size=32)
        x = s.solve(b)
        assert s.backward_error(x, b) <= 1e-14


def test_biharmonic_system_is_solved_to_tolerance():
    # I + s * D^4 with the periodic stencil (1, -4, 6, -4, 1)
    n, s = 256, 50.0
    d = np.array([[s] * n, [-4 * s] * n, [1 + 6 * s] * n, [-4 * s] * n, [s] * n])
    b = np.cos(2 * np.pi * np.arange(n) / n)
    x = solve_cyclic_penta(d, b)
    lam = 16 * np.sin(np.pi / n) ** 4
    assert np.allclose(x, b / (1 + s * lam), atol=1e-12)


def test_singular_system_reported():
    # pure stencil (1, -4, 6, -4, 1) annihilates constants
    n = 16
    d = np.array([[1.0] * n, [-4.0] * n, [6.0] * n, [-4.0] * n, [1.0] * n])
    with pytest.raises(LinearSolveError) as exc:
        solve_cyclic_penta(d, np.ones(n))
    assert "condition" in str(exc.value)
    assert condition_estimate(d) > 1e12


def test_rejects_bad_shape():
    with pytest.raises(ValueError):
        CyclicPentaSolver(np.ones((4, 10)))
