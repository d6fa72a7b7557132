import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commfactor.errors import DimensionError, NonUnitaryError
from commfactor.matcore import (as_matrix, commutator, diag_commutator, frobnorm, opnorm, opnorms,
                                pad_to, random_trace_zero, random_zero_diag, unitary_conjugate)
from conftest import crandn, svd_norm


def test_opnorm_small_cases():
    assert abs(opnorm(np.eye(3)).op_norm - 1.0) < 1e-12
    assert abs(opnorm(np.array([[0, 2], [0, 0]])).op_norm - 2.0) < 1e-12
    assert opnorm(np.zeros((3, 3))).op_norm == 0.0


def test_opnorm_matches_svd(rng):
    for _ in range(20):
        n = int(rng.integers(1, 40))
        A = crandn(rng, n, n)
        rep = opnorm(A)
        assert rep.converged
        assert abs(rep.op_norm - svd_norm(A)) <= 1e-8 * svd_norm(A)


def test_opnorm_rectangular_and_batched(rng):
    A = crandn(rng, 5, 7, 3)
    norms, iters, conv = opnorms(A)
    assert conv.all()
    for k in range(5):
        assert abs(norms[k] - svd_norm(A[k])) <= 1e-8 * svd_norm(A[k])


def test_opnorm_reports_nonconvergence():
    # two nearly equal top singular values: convergence is slow
    A = np.diag([1.0, 1.0 - 1e-9, 0.5]) + 0j
    rep = opnorm(A, tol=1e-15, max_iter=3)
    assert rep.iterations <= 3
    assert not rep.converged


def test_frobnorm():
    assert frobnorm(np.zeros((2, 2))) == 0
    assert frobnorm(np.eye(4)) == 2
    assert frobnorm(np.array([[3, 4], [0, 0]])) == 5


def test_commutator_examples(rng):
    B = np.diag([1.0, -1.0])
    C = np.array([[0, 0.5], [0, 0]])
    assert np.allclose(commutator(B, C), [[0, 1], [0, 0]])
    X = crandn(rng, 4, 4)
    assert np.all(commutator(X, X) == 0)
    B, C = crandn(rng, 5, 5), crandn(rng, 5, 5)
    assert abs(np.trace(commutator(B, C))) <= 1e-12 * np.linalg.norm(B @ C)
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_diag_commutator_matches_dense(rng):
    b = crandn(rng, 6)
    C = crandn(rng, 6, 6)
    assert np.allclose(diag_commutator(b, C), commutator(np.diag(b), C))


def test_unitary_conjugate(rng):
    A = crandn(rng, 4, 4)
    assert np.allclose(unitary_conjugate(np.eye(4), A), A)
    P = np.eye(4)[[2, 0, 3, 1]]
    perm = np.argmax(P, axis=0)
    assert np.array_equal(unitary_conjugate(P, A), A[np.ix_(perm, perm)])
    v = crandn(rng, 4)
    H = np.eye(4) - 2 * np.outer(v, v.conj()) / np.vdot(v, v)
    assert abs(np.trace(unitary_conjugate(H, A)) - np.trace(A)) <= 1e-12 * np.linalg.norm(A)
    with pytest.raises(NonUnitaryError):
        unitary_conjugate(2 * np.eye(4), A)


def test_pad_to(rng):
    assert np.array_equal(pad_to(np.array([[5.0]]), 2), [[5, 0], [0, 0]])
    A = crandn(rng, 3, 3)
    assert np.array_equal(pad_to(A, 3), A)
    assert abs(opnorm(pad_to(A, 7)).op_norm - opnorm(A).op_norm) < 1e-10
    with pytest.raises(DimensionError):
        pad_to(A, 2)


def test_random_generators():
    assert np.array_equal(random_zero_diag(1, 3), [[0]])
    assert np.array_equal(random_zero_diag(16, 9), random_zero_diag(16, 9))
    A = random_zero_diag(16, 4)
    assert np.abs(np.diagonal(A)).max() == 0.0
    assert abs(svd_norm(A) - 1) < 1e-9
    T = random_trace_zero(10, 2)
    assert abs(np.trace(T)) <= 1e-12


def test_as_matrix_rejects_bad_input():
    with pytest.raises(DimensionError):
        as_matrix(np.ones(3))
    with pytest.raises(DimensionError):
        as_matrix(np.ones((2, 3)), square=True)
    with pytest.raises((DimensionError, ValueError)):
        as_matrix(np.array([[np.nan]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1), st.floats(0.1, 10))
def test_opnorm_homogeneous(n, seed, alpha):
    A = crandn(np.random.default_rng(seed), n, n)
    a = opnorm(A).op_norm
    assert abs(opnorm(alpha * A).op_norm - alpha * a) <= 1e-8 * alpha * a
