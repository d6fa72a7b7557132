"""Dense complex matrix helpers shared by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` (C order, i.e.
row-major).  The helpers here validate that layout, estimate operator norms
by power iteration and generate reproducible random test inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NonUnitaryError

__all__ = [
    "NormReport",
    "as_matrix",
    "opnorm",
    "opnorms",
    "frobnorm",
    "commutator",
    "diag_commutator",
    "unitary_conjugate",
    "pad_to",
    "random_zero_diag",
    "random_trace_zero",
]

# fraction of ``tol`` the per-step relative change must drop below
_STOP_FACTOR = 1e-2
_MAX_RESTARTS = 3
_RESTART_WEIGHT = 1e-3


@dataclass(frozen=True)
class NormReport:
    """Operator-norm estimate returned by :func:`opnorm`."""

    op_norm: float
    fro_norm: float
    iterations: int
    converged: bool


def as_matrix(A, *, square: bool = False, name: str = "A") -> np.ndarray:
    """Return `A` as a finite, C-ordered ``complex128`` 2-D array."""
    M = np.ascontiguousarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.size == 0:
        raise DimensionError(f"{name} must be a nonempty 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _restart_vector(n: int) -> np.ndarray:
    # fixed irrational frequencies: deterministic and generic
    j = np.arange(1, n + 1)
    v = np.cos(0.7548776662466927 * j) + 1j * np.sin(0.5698402909980532 * j * j)
    return v / np.linalg.norm(v)


def opnorms(stack, tol: float = 1e-10, max_iter: int = 20000):
    """Batched power iteration on ``A^H A`` for a stack of equal-shape matrices.

    Parameters
    ----------
    stack : array_like, shape (k, m, n)
    tol : float
        Target relative accuracy.  A run settles once the relative change of
        the estimate per step drops below ``1e-2 * tol``.
    max_iter : int
        Iteration cap per matrix, restarts included.

    Returns
    -------
    norms, iterations, converged : ndarray
        One entry per matrix in the stack.
    """
    S = np.asarray(stack, dtype=np.complex128)
    if S.ndim != 3:
        raise DimensionError("opnorms expects a 3-D stack")
    k, _, n = S.shape
    norms = np.zeros(k)
    iters = np.zeros(k, dtype=np.int64)
    conv = np.zeros(k, dtype=bool)
    if k == 0 or S.shape[1] == 0 or n == 0:
        conv[:] = True
        return norms, iters, conv

    stop = _STOP_FACTOR * tol
    x = np.full((k, n), 1.0 / np.sqrt(n), dtype=np.complex128)
    kick = _RESTART_WEIGHT * _restart_vector(n)
    prev = np.full(k, -1.0)
    at_restart = np.full(k, -1.0)
    restarts = np.zeros(k, dtype=np.int64)
    active = np.arange(k)

    A = S
    while active.size:
        if A.shape[0] != active.size:
            A = S[active]
        y = np.matmul(A, x[active][:, :, None])[:, :, 0]
        est = np.linalg.norm(y, axis=1)
        # z = A^H y without materializing A^H
        z = np.matmul(y.conj()[:, None, :], A)[:, 0, :].conj()
        znorm = np.linalg.norm(z, axis=1)
        iters[active] += 1
        norms[active] = np.maximum(norms[active], est)

        p = prev[active]
        dead = znorm == 0.0
        settled = dead | ((p >= 0) & (np.abs(est - p) <= stop * est))
        # every run is re-checked once from a perturbed iterate; later
        # restarts happen only while they keep raising the estimate
        gained = norms[active] > at_restart[active] * (1.0 + stop)
        restart = settled & gained & (restarts[active] < _MAX_RESTARTS)
        finish = settled & ~restart

        safe = np.where(dead, 1.0, znorm)
        xa = z / safe[:, None]
        if np.any(restart):
            r = np.flatnonzero(restart)
            xa[r] += kick
            xa[r] /= np.linalg.norm(xa[r], axis=1)[:, None]
            at_restart[active[r]] = norms[active[r]]
            restarts[active[r]] += 1
            est[r] = -1.0
        x[active] = xa
        prev[active] = est

        conv[active[finish]] = True
        active = active[~finish & (iters[active] < max_iter)]
    return norms, iters, conv


def opnorm(A, tol: float = 1e-10, max_iter: int = 20000) -> NormReport:
    """Estimate the largest singular value of `A` by power iteration.

    The start vector is the normalized all-ones vector.  On stagnation the
    iterate is perturbed by a fixed deterministic vector and the iteration
    resumes; this catches start vectors orthogonal to the top singular
    vector.  The result is bit-reproducible.

    Examples
    --------
    >>> opnorm(np.eye(3)).op_norm
    1.0
    """
    M = as_matrix(A)
    norms, iters, conv = opnorms(M[None], tol=tol, max_iter=max_iter)
    return NormReport(float(norms[0]), frobnorm(M), int(iters[0]), bool(conv[0]))


def frobnorm(A) -> float:
    return float(np.linalg.norm(np.asarray(A, dtype=np.complex128)))


def commutator(B, C) -> np.ndarray:
    """Return ``BC - CB``."""
    B = as_matrix(B, square=True, name="B")
    C = as_matrix(C, square=True, name="C")
    if B.shape != C.shape:
        raise DimensionError(f"shape mismatch {B.shape} vs {C.shape}")
    return B @ C - C @ B


def diag_commutator(b, C) -> np.ndarray:
    """``[diag(b), C]`` computed entrywise as ``(b_i - b_j) C_ij``."""
    b = np.asarray(b, dtype=np.complex128)
    return (b[:, None] - b[None, :]) * C


def unitary_conjugate(U, A, *, tol: float = 1e-10) -> np.ndarray:
    """Return ``U^* A U`` after checking that `U` is unitary."""
    U = as_matrix(U, square=True, name="U")
    A = as_matrix(A, square=True)
    if U.shape != A.shape:
        raise DimensionError(f"shape mismatch {U.shape} vs {A.shape}")
    defect = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if defect > tol:
        raise NonUnitaryError(f"U is not unitary: ||U*U - I||_F = {defect:.3e}")
    return U.conj().T @ A @ U


def pad_to(A, M: int) -> np.ndarray:
    """Embed `A` in the top-left corner of an ``M x M`` zero matrix."""
    A = as_matrix(A, square=True)
    m = A.shape[0]
    if M < m:
        raise DimensionError(f"cannot pad a {m}x{m} matrix to {M}x{M}")
    out = np.zeros((M, M), dtype=np.complex128)
    out[:m, :m] = A
    return out


def _gaussian(m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return G / np.sqrt(2.0)


def random_zero_diag(m: int, seed: int) -> np.ndarray:
    """Complex Gaussian ``m x m`` matrix with exact zero diagonal and norm one.

    The 1x1 case is the zero matrix and is returned unnormalized.
    """
    if m < 1:
        raise DimensionError("m must be positive")
    A = _gaussian(m, seed)
    np.fill_diagonal(A, 0.0)
    if m == 1:
        return A
    return A / opnorm(A, tol=1e-12).op_norm


def random_trace_zero(m: int, seed: int) -> np.ndarray:
    """Complex Gaussian ``m x m`` matrix shifted to zero trace, norm one."""
    if m < 1:
        raise DimensionError("m must be positive")
    A = _gaussian(m, seed)
    A -= (np.trace(A) / m) * np.eye(m)
    if m == 1:
        return np.zeros((1, 1), dtype=np.complex128)
    return A / opnorm(A, tol=1e-12).op_norm
