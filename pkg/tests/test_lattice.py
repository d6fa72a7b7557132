import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commfactor.errors import LatticeError
from commfactor.lattice import (lambda_set, lattice_points, quadrant_offsets,
                                separation_certificate)


def test_quadrant_offsets():
    assert np.allclose(quadrant_offsets(0.5), [-0.75 - 0.75j, -0.75 + 0.75j, 0.75 - 0.75j, 0.75 + 0.75j])
    assert np.allclose(quadrant_offsets(1 / 3), np.array([-1 - 1j, -1 + 1j, 1 - 1j, 1 + 1j]) * 2 / 3)
    assert np.allclose(quadrant_offsets(1 - 1e-12), [-1 - 1j, -1 + 1j, 1 - 1j, 1 + 1j])
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(LatticeError):
            quadrant_offsets(bad)


def test_lambda_1_order():
    for eps in (0.1, 0.5, 0.9):
        assert np.array_equal(lambda_set(1, eps).points, [-1 - 1j, -1 + 1j, 1 - 1j, 1 + 1j])


def test_lambda_2_last_quadrant():
    pts = lambda_set(2, 0.5).points[12:]
    assert sorted(pts.tolist(), key=lambda z: (z.real, z.imag)) == [0.5 + 0.5j, 0.5 + 1j, 1 + 0.5j, 1 + 1j]


def test_lambda_3_in_square():
    pts = lambda_set(3, 0.2).points
    assert len(set(pts.tolist())) == 64
    assert np.all(np.abs(pts.real) <= 1) and np.all(np.abs(pts.imag) <= 1)


def test_separation_examples():
    cert = separation_certificate(lambda_set(1, 0.3))
    assert all(p.gap == 2.0 for p in cert.pairs)
    cert = separation_certificate(lambda_set(2, 0.5))
    pair = [p for p in cert.pairs if p.groups == (0, 2)][0]
    assert pair.axis == "real" and abs(pair.gap - 1.0) < 1e-15
    cert = separation_certificate(lambda_set(4, 0.1))
    assert len(cert.pairs) == 6 and cert.min_gap >= 0.2 - 1e-12


def test_schedule_needs_enough_levels():
    with pytest.raises(LatticeError):
        lattice_points(3, [0.5])
    with pytest.raises(LatticeError):
        lattice_points(0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.lists(st.floats(0.01, 0.99), min_size=4, max_size=4))
def test_lattice_properties(n, eps):
    pts = lattice_points(n, eps)
    assert pts.size == 4 ** n
    assert np.all(np.abs(pts.real) <= 1 + 1e-12) and np.all(np.abs(pts.imag) <= 1 + 1e-12)
    assert len(np.unique(pts)) == pts.size
    if n >= 2:
        # the four quarter-runs are the quadrants of the outermost level
        q = 4 ** (n - 1)
        for k, (sr, si) in enumerate(((-1, -1), (-1, 1), (1, -1), (1, 1))):
            blk = pts[k * q:(k + 1) * q]
            assert np.all(sr * blk.real >= eps[0] - 1e-12)
            assert np.all(si * blk.imag >= eps[0] - 1e-12)
