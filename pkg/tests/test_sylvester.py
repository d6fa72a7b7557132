import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commfactor.errors import ContourError, DimensionError, QuadratureError, SpectraOverlapError
from commfactor.lattice import lambda_set, lattice_points
from commfactor.sylvester import (Contour, rect_contour, solve_diag, solve_rosenblum,
                                  solve_same_diag)
from conftest import crandn, svd_norm


def test_solve_diag_scalar():
    sol = solve_diag([1], [-1], [[1]])
    assert sol.X[0, 0] == 0.5 and sol.residual == 0


def test_solve_diag_overlap():
    with pytest.raises(SpectraOverlapError) as ei:
        solve_diag([1, 2], [3, 2], np.ones((2, 2)))
    assert (ei.value.i, ei.value.j) == (1, 1)


def test_solve_diag_quadrant_bound(rng):
    g = lambda_set(2, 0.5).groups
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            A = crandn(rng, 4, 4)
            sol = solve_diag(g[a], g[b], A)
            assert sol.residual <= 1e-12
            assert svd_norm(sol.X) <= 2 / 0.5 ** 2 * svd_norm(A)


def test_solve_diag_batched(rng):
    A = crandn(rng, 3, 2, 5)
    b, d = crandn(rng, 2), crandn(rng, 5) + 5
    X = solve_diag(b, d, A).X
    for k in range(3):
        assert np.array_equal(X[k], solve_diag(b, d, A[k]).X)


def test_solve_diag_rosenblum_bound_recorded(rng):
    A = crandn(rng, 3, 3)
    sol = solve_diag([-1, -1.1, -0.9], [1, 1.2, 0.8], A, margin=0.5)
    assert sol.rosenblum_bound is not None
    assert svd_norm(sol.X) <= sol.bound


def test_solve_same_diag_examples():
    sol = solve_same_diag([1, -1], [[0, 1], [0, 0]])
    assert np.array_equal(sol.X, [[0, 0.5], [0, 0]])
    assert np.all(solve_same_diag([1, 2, 3], np.zeros((3, 3))).X == 0)
    b = lattice_points(1)
    A = np.ones((4, 4)) - np.eye(4)
    X = solve_same_diag(b, A).X
    for i in range(4):
        for j in range(4):
            assert X[i, j] == (0 if i == j else 1 / (b[i] - b[j]))
    R = np.diag(b) @ X - X @ np.diag(b) - A
    assert np.linalg.norm(R) <= 1e-14


def test_solve_same_diag_errors():
    with pytest.raises(DimensionError):
        solve_same_diag([1, 2], np.ones((2, 2)))
    with pytest.raises(SpectraOverlapError):
        solve_same_diag([1, 1], [[0, 1], [1, 0]])


def test_rect_contour_examples():
    c = rect_contour([-1], [1], 0.5)
    x1 = c.corners[2].real
    assert x1 == -0.5 and 1 - x1 >= 0.5
    g = lambda_set(3, 0.25).groups
    for a in range(4):
        rest = np.concatenate([g[b] for b in range(4) if b != a])
        rect_contour(g[a], rest, 0.25)
    with pytest.raises(ContourError):
        rect_contour([0, 2], [1, 3], 0.4)
    with pytest.raises(ContourError):
        rect_contour([0], [1], 0.0)


def test_rosenblum_scalar_converges():
    c = rect_contour([-1], [1], 0.5)
    errs = []
    for N in (16, 32, 64, 128):
        X = solve_rosenblum([-1], [1], [[1]], c.with_nodes(N)).X[0, 0]
        errs.append(abs(X + 0.5))
    assert errs[-1] < 1e-9
    assert all(e2 <= e1 for e1, e2 in zip(errs, errs[1:]))


def test_rosenblum_zero_and_errors():
    c = rect_contour([-1], [1], 0.5)
    assert np.all(solve_rosenblum([-1], [1], [[0]], c).X == 0)
    bad = Contour(0j, 1.0, 1.0, 0.5)
    with pytest.raises(ContourError):
        solve_rosenblum([0.9], [5], [[1]], bad)
    with pytest.raises(QuadratureError):
        solve_rosenblum([-1], [1], [[1]], c.with_nodes(8), refine=True, rtol=1e-30, max_nodes=64)


def test_rosenblum_refine(rng):
    g = lambda_set(2, 0.3).groups
    rest = np.concatenate(g[1:])
    c = rect_contour(g[0], rest, 0.3, nodes_per_edge=32)
    A = crandn(rng, 4, 12)
    sol = solve_rosenblum(g[0], rest, A, c, refine=True, rtol=1e-10)
    ref = solve_diag(g[0], rest, A).X
    assert np.linalg.norm(sol.X - ref) <= 1e-8 * np.linalg.norm(ref)
    assert svd_norm(ref) <= sol.rosenblum_bound


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_solve_diag_residual_property(p, q, seed):
    r = np.random.default_rng(seed)
    b, d = crandn(r, p), crandn(r, q) + 4
    A = crandn(r, p, q)
    sol = solve_diag(b, d, A)
    R = np.diag(b) @ sol.X - sol.X @ np.diag(d) - A
    assert np.linalg.norm(R) <= 1e-13 * np.linalg.norm(A)
