"""Unitary reduction of a trace-zero matrix to zero diagonal.

Each deflation step finds a unit vector ``x`` with ``x^* A x = 0`` inside the
span of at most three coordinate vectors, rotates it to the first basis
vector with a Householder reflection, and continues on the trailing block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IsotropicVectorError, NotTraceZeroError
from .matcore import as_matrix

__all__ = ["ZeroDiagReduction", "isotropic_vector", "reduce", "caratheodory_indices"]

MAX_BISECT = 200


@dataclass(frozen=True)
class ZeroDiagReduction:
    U: np.ndarray
    A0: np.ndarray
    achieved_tol: float


def caratheodory_indices(d: np.ndarray) -> tuple[int, ...]:
    """Pick at most three diagonal entries whose convex hull contains 0.

    The pivot is the entry of largest modulus (lowest index on ties).  With
    angles measured from the pivot, the entries turning furthest
    counter-clockwise and clockwise span 0 together with the pivot whenever
    any triple does.  Returns one index if some entry is exactly 0, two if a
    pair is collinear through 0.
    """
    d = np.asarray(d, dtype=np.complex128)
    zeros = np.flatnonzero(d == 0)
    if zeros.size:
        return (int(zeros[0]),)
    a = int(np.argmax(np.abs(d)))
    phi = np.angle(d / d[a])
    phi[a] = 0.0
    pos = np.flatnonzero(phi > 0)
    neg = np.flatnonzero(phi < 0)
    opposite = np.flatnonzero(np.abs(phi) == np.pi)
    if opposite.size:
        return (a, int(opposite[0]))
    if pos.size == 0 and neg.size == 0:
        # all entries on the pivot's ray: 0 is not in the hull
        return (a,)
    if neg.size == 0:
        return (a, int(pos[np.argmax(phi[pos])]))
    if pos.size == 0:
        return (a, int(neg[np.argmin(phi[neg])]))
    b = int(pos[np.argmax(phi[pos])])
    c = int(neg[np.argmin(phi[neg])])
    return (a, b, c)


def _pair_root(M: np.ndarray) -> np.ndarray:
    """Unit ``z`` in C^2 with ``z^* M z`` on the line through ``M00, M11`` at 0.

    With the phase chosen so the cross term is parallel to ``M00 - M11``, the
    Rayleigh quotient of ``(cos θ, e^{iφ} sin θ)`` moves along that line, from
    ``M00`` at θ=0 to ``M11`` at θ=π/2, and bisection finds where it meets 0.
    """
    m0, m1 = M[0, 0], M[1, 1]
    u = m0 - m1
    if u == 0:
        return np.array([1.0, 0.0], dtype=np.complex128)
    u /= abs(u)
    p = M[0, 1] * np.conj(u)
    q = M[1, 0] * np.conj(u)
    phi = -np.angle(p - np.conj(q))
    e = np.exp(1j * phi)

    def h(theta):
        c, s = np.cos(theta), np.sin(theta)
        z = np.array([c, e * s])
        return np.real(np.conj(u) * (np.conj(z) @ M @ z)), z

    lo, hi = 0.0, np.pi / 2
    hlo, zlo = h(lo)
    if hlo <= 0:
        return zlo
    hhi, zhi = h(hi)
    if hhi >= 0:
        return zhi
    z = zlo
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        hm, z = h(mid)
        if hm == 0:
            break
        if hm > 0:
            lo = mid
        else:
            hi = mid
    return z


def _segment_point(a: complex, b: complex, c: complex) -> complex:
    """Where the ray from `a` through 0 meets the segment ``[b, c]``."""
    # solve -r a = s b + (1 - s) c for real r, s
    M = np.array([[a.real, b.real - c.real], [a.imag, b.imag - c.imag]])
    rhs = -np.array([c.real, c.imag])
    try:
        r, s = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        s = 0.5
    s = min(max(s, 0.0), 1.0)
    return s * b + (1.0 - s) * c


def _isotropic(A: np.ndarray, atol: float) -> np.ndarray:
    m = A.shape[0]
    d = np.diagonal(A).copy()
    small = np.flatnonzero(np.abs(d) <= atol)
    if small.size:
        x = np.zeros(m, dtype=np.complex128)
        x[small[0]] = 1.0
        return x
    idx = caratheodory_indices(d)
    x = np.zeros(m, dtype=np.complex128)
    if len(idx) == 1:
        x[idx[0]] = 1.0
    elif len(idx) == 2:
        i, j = idx
        z = _pair_root(A[np.ix_([i, j], [i, j])])
        x[i], x[j] = z
    else:
        a, b, c = idx
        q = _segment_point(d[a], d[b], d[c])
        # unit y in span{e_b, e_c} with y^* A y = q, then pair it with e_a
        sub = A[np.ix_([b, c], [b, c])] - q * np.eye(2)
        yb, yc = _pair_root(sub)
        W = np.zeros((m, 2), dtype=np.complex128)
        W[a, 0] = 1.0
        W[b, 1], W[c, 1] = yb, yc
        z = _pair_root(W.conj().T @ A @ W)
        x = W @ z
    x /= np.linalg.norm(x)
    val = abs(np.conj(x) @ A @ x)
    if val > atol:
        raise IsotropicVectorError(
            f"|x*Ax| = {val:.3e} exceeds tolerance {atol:.3e}; input may not be trace-zero"
        )
    return x


def isotropic_vector(A, tol: float = 1e-11) -> np.ndarray:
    """Unit vector ``x`` with ``|x^* A x| <= tol * ||A||_F``.

    Raises
    ------
    NotTraceZeroError
        If ``|trace(A)| > tol * ||A||_F``.
    IsotropicVectorError
        If the bisection cannot reach the tolerance.
    """
    A = as_matrix(A, square=True)
    fro = np.linalg.norm(A)
    if abs(np.trace(A)) > tol * fro:
        raise NotTraceZeroError(f"|trace(A)| = {abs(np.trace(A)):.3e} is not within tolerance")
    return _isotropic(A, tol * fro)


def _householder_to_e1(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Reflector ``H = I - beta w w^*`` with ``H e_1`` a unimodular multiple of `x`.

    ``H`` is Hermitian and unitary; returns ``(w, beta)``, ``beta = 0`` for ``H = I``.
    """
    x0 = x[0]
    phase = x0 / abs(x0) if x0 != 0 else 1.0
    w = x.copy()
    w[0] += phase * np.linalg.norm(x)
    ww = np.vdot(w, w).real
    return w, (2.0 / ww if ww > 0 else 0.0)


def reduce(A, tol: float = 1e-11) -> ZeroDiagReduction:
    """Find unitary ``U`` with ``U^* A U`` zero-diagonal up to ``tol * ||A||_F``.

    Raises
    ------
    NotTraceZeroError
        If ``|trace(A)| > 1e-10 * ||A||_F``.
    """
    A = as_matrix(A, square=True)
    m = A.shape[0]
    fro = np.linalg.norm(A)
    if abs(np.trace(A)) > 1e-10 * fro:
        raise NotTraceZeroError(f"|trace(A)| = {abs(np.trace(A)):.3e} relative to ||A||_F = {fro:.3e}")
    atol = tol * fro
    U = np.eye(m, dtype=np.complex128)
    if fro == 0 or np.all(np.abs(np.diagonal(A)) <= atol):
        return ZeroDiagReduction(U, A.copy(), _achieved(A))
    T = A.copy()
    for k in range(m - 1):
        blk = T[k:, k:]
        if np.all(np.abs(np.diagonal(blk)) <= atol):
            break
        x = _isotropic(blk, atol)
        w, beta = _householder_to_e1(x)
        wc = beta * w.conj()
        T[k:, k:] -= np.outer(w, wc @ T[k:, k:])
        T[k:, k:] -= np.outer(T[k:, k:] @ w, wc)
        U[:, k:] -= np.outer(U[:, k:] @ w, wc)
    A0 = U.conj().T @ A @ U
    if abs(A0[-1, -1]) > atol or np.abs(np.diagonal(A0)).max() > atol:
        raise IsotropicVectorError("deflation left a diagonal entry above tolerance")
    return ZeroDiagReduction(U, A0, _achieved(A0))


def _achieved(A0: np.ndarray) -> float:
    fro = np.linalg.norm(A0)
    return float(np.abs(np.diagonal(A0)).max() / fro) if fro > 0 else 0.0
