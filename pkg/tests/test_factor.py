import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commfactor.errors import DimensionError, NotTraceZeroError, SeparationError
from commfactor.factor import (Claim1Certificate, FactorResult, ZeroInputError, choose_schedule,
                               factor_any, factor_claim1, factor_theorem2, fixed_schedule,
                               iter_claim1_nodes, merge_claim2, recheck_certificate)
from commfactor.lattice import lambda_set, lattice_points
from commfactor.matcore import random_trace_zero, random_zero_diag
from commfactor.sylvester import solve_same_diag
from conftest import crandn, svd_norm


def _in_square(b, slack=1e-12):
    return np.all(np.abs(b.real) <= 1 + slack) and np.all(np.abs(b.imag) <= 1 + slack)


def test_choose_schedule_examples():
    assert choose_schedule(4).per_level_eps == (0.5,)
    assert choose_schedule(256).per_level_eps == (0.25,) * 3
    assert choose_schedule(4 ** 6).per_level_eps == (1 / 6,) * 5
    with pytest.raises(DimensionError):
        choose_schedule(8)


def test_claim1_zero_matrix():
    F = factor_claim1(np.zeros((16, 16)), fixed_schedule(0.3, 16))
    assert np.all(F.C == 0)
    assert np.array_equal(F.B_diag, lambda_set(2, 0.3).points)


def test_claim1_base_case():
    A = np.ones((4, 4)) - np.eye(4)
    F = factor_claim1(A)
    b = lattice_points(1)
    assert np.array_equal(F.B_diag, b)
    for i in range(4):
        for j in range(4):
            if i != j:
                assert F.C[i, j] == 1 / (b[i] - b[j])
    assert F.residual <= 1e-14


def test_claim1_one_by_one():
    F = factor_claim1(np.zeros((1, 1)))
    assert F.C.shape == (1, 1) and F.norm_C == 0


def test_claim1_16_half():
    A = random_zero_diag(16, 11)
    F = factor_claim1(A, fixed_schedule(0.5, 16))
    assert F.residual <= 1e-10
    nodes = list(iter_claim1_nodes(F.certificate))
    assert len(nodes) == 1 and nodes[0].ok
    assert recheck_certificate(F.certificate, A, F.C, svd_norm) <= 1e-8


def test_claim1_final_c_is_direct_solution():
    A = random_zero_diag(64, 2)
    F = factor_claim1(A)
    X = solve_same_diag(F.B_diag, A).X
    assert np.abs(X - F.C).max() <= 1e-12 * np.abs(X).max()


def test_claim1_b_independent_of_a():
    s = choose_schedule(64)
    b1 = factor_claim1(random_zero_diag(64, 1), s).B_diag
    b2 = factor_claim1(random_zero_diag(64, 2), s).B_diag
    assert np.array_equal(b1, b2)
    assert np.array_equal(b1, lattice_points(3, s.per_level_eps))


def test_claim1_homogeneous():
    A = random_zero_diag(16, 3)
    F1, F2 = factor_claim1(A), factor_claim1(2.5 * A)
    assert np.array_equal(F1.B_diag, F2.B_diag)
    assert np.allclose(F2.C, 2.5 * F1.C, rtol=1e-14, atol=0)


def test_claim1_errors():
    with pytest.raises(DimensionError):
        factor_claim1(np.zeros((8, 8)))
    A = random_zero_diag(16, 0)
    A[3, 3] = 1e-20
    with pytest.raises(DimensionError):
        factor_claim1(A)
    with pytest.raises(DimensionError):
        factor_claim1(random_zero_diag(64, 0), fixed_schedule(0.5, 16))


def test_claim1_certificate_bounds_various_eps():
    A = random_zero_diag(256, 5)
    for eps in (0.1, 0.3, 0.7):
        F = factor_claim1(A, fixed_schedule(eps, 256))
        for c in iter_claim1_nodes(F.certificate):
            assert isinstance(c, Claim1Certificate) and c.ok
            assert c.contour_factor <= c.offdiag_factor
            for cn, an in zip(c.offdiag_norms, c.offdiag_a_norms):
                assert cn <= 2 / eps ** 2 * an + 1e-9


def _claim1_pair(seed, m=16):
    A = random_zero_diag(2 * m, seed)
    F11 = factor_claim1(A[:m, :m])
    F22 = factor_claim1(A[m:, m:])
    return A, F11, F22


def test_merge_random():
    A, F11, F22 = _claim1_pair(4)
    F = merge_claim2(A, F11, F22)
    cert = F.certificate
    assert F.residual <= 1e-9
    small = cert.small
    bs = [F.B_diag[:16], F.B_diag[16:]]
    assert bs[1 - small].real.min() - bs[small].real.max() >= 2 * cert.delta - 1e-12
    assert cert.ok and np.isfinite(cert.k_meas)
    assert cert.c1 <= cert.c2 and cert.delta >= cert.c1 / cert.c2 and cert.delta < 0.5
    assert _in_square(F.B_diag)
    assert recheck_certificate(cert, A, F.C, svd_norm) <= 1e-8


def test_merge_block_diagonal():
    A, F11, F22 = _claim1_pair(5)
    A[:16, 16:] = 0
    A[16:, :16] = 0
    F = merge_claim2(A, F11, F22)
    assert np.all(F.C[:16, 16:] == 0) and np.all(F.C[16:, :16] == 0)
    c = F.certificate
    s = c.child_scales
    assert abs(F.norm_C - max(F11.norm_C / s[0], F22.norm_C / s[1])) <= 1e-9 * F.norm_C


def _fake(b, c_norm):
    m = b.size
    return FactorResult(np.asarray(b, dtype=complex), np.zeros((m, m), complex), None, 1.0, c_norm, 0.0)


def test_merge_delta_quarter():
    b = lattice_points(1)
    F = merge_claim2(np.zeros((8, 8)), _fake(b, 1.0), _fake(b, 16.0))
    assert F.certificate.delta == 0.25
    assert F.B_diag[:4].real.max() <= -0.5


def test_merge_swaps_roles():
    b = lattice_points(1)
    F = merge_claim2(np.zeros((8, 8)), _fake(b, 16.0), _fake(b, 1.0))
    assert F.certificate.small == 1
    assert F.B_diag[4:].real.max() <= -0.5


def test_merge_equal_norms_inflates():
    b = lattice_points(1)
    F = merge_claim2(np.zeros((8, 8)), _fake(b, 1.0), _fake(b, 1.0))
    c = F.certificate
    assert c.c2_inflated and c.c1 / c.c2 < 0.25
    assert abs(c.delta - (c.c1 / c.c2) ** 0.5) < 1e-12


def test_merge_rejects_outside_square():
    b = lattice_points(1) * 3
    with pytest.raises(SeparationError):
        merge_claim2(np.zeros((8, 8)), _fake(b, 1.0), _fake(b, 16.0))


def test_theorem2_small():
    for m in (8, 32):
        A = random_zero_diag(m, 1)
        F = factor_theorem2(A)
        assert F.residual <= 1e-9
        assert _in_square(F.B_diag)
        assert recheck_certificate(F.certificate, A, F.C, svd_norm) <= 1e-8
        perm = F.certificate.perm
        assert sorted(perm.tolist()) == list(range(m))


def test_theorem2_paved_support():
    # A supported on the paved half: the complement gets A'' = 0
    A = random_zero_diag(32, 2)
    F0 = factor_theorem2(A)
    paved = np.concatenate(F0.certificate.paving.sigma)
    B = np.zeros_like(A)
    B[np.ix_(paved, paved)] = A[np.ix_(paved, paved)]
    F = factor_theorem2(B)
    assert F.residual <= 1e-9


def test_theorem2_rounds():
    A = random_zero_diag(128, 3)
    F = factor_theorem2(A, rounds=2)
    assert F.residual <= 1e-9
    assert recheck_certificate(F.certificate, A, F.C, svd_norm) <= 1e-8


def test_theorem2_deterministic():
    A = random_zero_diag(32, 4)
    F1, F2 = factor_theorem2(A, seed=3), factor_theorem2(A, seed=3)
    assert np.array_equal(F1.C, F2.C) and np.array_equal(F1.B_diag, F2.B_diag)


def test_theorem2_errors():
    with pytest.raises(DimensionError):
        factor_theorem2(random_zero_diag(16, 0))
    with pytest.raises(DimensionError):
        factor_theorem2(np.zeros((2, 2)))


def _check_any(A, F):
    B = F.B
    R = A - (B @ F.C - F.C @ B)
    assert np.linalg.norm(R) <= 1e-9 * np.linalg.norm(A)
    assert np.linalg.norm(B @ B.conj().T - B.conj().T @ B) <= 1e-12 * A.shape[0]
    assert _in_square(np.linalg.eigvals(B), 1e-10)


def test_factor_any_diag():
    A = np.diag([1.0, -1.0])
    for method in ("claim1", "theorem2"):
        F = factor_any(A, method)
        _check_any(A, F)


def test_factor_any_bypass():
    A = random_zero_diag(16, 2)
    F = factor_any(A)
    assert F.U is None and not F.meta["reduced"]
    assert np.array_equal(F.B, np.diag(F.B_diag))


def test_factor_any_commutator_input(rng):
    B0, C0 = crandn(rng, 7, 7), crandn(rng, 7, 7)
    A = B0 @ C0 - C0 @ B0
    for method in ("claim1", "theorem2"):
        _check_any(A, factor_any(A, method))


def test_factor_any_errors():
    with pytest.raises(ZeroInputError):
        factor_any(np.zeros((4, 4)))
    with pytest.raises(NotTraceZeroError):
        factor_any(np.eye(3))
    with pytest.raises(ValueError):
        factor_any(np.diag([1.0, -1.0]), "other")


def test_factor_any_homogeneous():
    A = random_trace_zero(10, 6)
    F1, F2 = factor_any(A), factor_any(3.0 * A)
    assert np.allclose(F2.B, F1.B, atol=1e-12)
    assert np.allclose(F2.C, 3.0 * F1.C, atol=1e-10 * np.abs(F1.C).max())


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2 ** 32 - 1), st.sampled_from(["claim1", "theorem2"]))
def test_factor_any_property(m, seed, method):
    A = random_trace_zero(m, seed)
    _check_any(A, factor_any(A, method, seed=seed % 7))
