"""Commutator factorizations ``A = [B, C]`` with ``B`` normal, spectrum in the unit square.

The building blocks are

* :func:`factor_claim1` -- 4-way block recursion for ``4^n x 4^n`` zero-diagonal
  matrices with ``B`` the lattice ``Λ_n`` (independent of ``A``);
* :func:`merge_claim2` -- combines factorizations of the two diagonal halves
  of a ``2m x 2m`` matrix by squeezing their spectra into separated strips;
* :func:`factor_theorem2` -- pave half the indices into small-norm blocks,
  factor that half by the block recursion, factor the rest, merge;
* :func:`factor_any` -- arbitrary trace-zero input via unitary reduction to
  zero diagonal, normalization and zero padding.

Every construction carries a certificate tree of measured operator norms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, sqrt
from typing import Optional, Union

import numpy as np

from . import zerodiag
from .errors import CommutatorError, DimensionError, NotTraceZeroError, SeparationError
from .lattice import lattice_points, quadrant_offsets
from .matcore import as_matrix, diag_commutator, opnorm, opnorms, pad_to
from .paving import PavingPartition, search_paving
from .sylvester import rect_contour, solve_diag, solve_same_diag

__all__ = [
    "EpsSchedule",
    "BaseCertificate",
    "Claim1Certificate",
    "MergeParams",
    "Theorem2Certificate",
    "FactorResult",
    "ZeroInputError",
    "choose_schedule",
    "fixed_schedule",
    "factor_claim1",
    "merge_claim2",
    "factor_theorem2",
    "factor_any",
    "recheck_certificate",
    "iter_claim1_nodes",
]

NORM_TOL = 1e-11
BOUND_RTOL = 1e-8
# offdiagonal block order inside a recursion node
OFFDIAG_PAIRS = tuple((i, j) for i in range(4) for j in range(4) if i != j)


class ZeroInputError(CommutatorError, ValueError):
    pass


@dataclass(frozen=True)
class EpsSchedule:
    per_level_eps: tuple[float, ...]
    rule: str = "fixed"

    @property
    def eps(self) -> Optional[float]:
        return self.per_level_eps[0] if self.per_level_eps else None


def _log4(m: int) -> int:
    n = 0
    while 4 ** n < m:
        n += 1
    if 4 ** n != m:
        raise DimensionError(f"dimension {m} is not a power of 4")
    return n


def choose_schedule(m: int) -> EpsSchedule:
    """Constant ``eps = 1/k`` with ``k = max(2, log4 m)`` for a ``4^n`` matrix."""
    n = _log4(m)
    k = max(2, n)
    return EpsSchedule((1.0 / k,) * max(n - 1, 1), "one_over_k")


def fixed_schedule(eps: float, m: int) -> EpsSchedule:
    n = _log4(m)
    return EpsSchedule((float(eps),) * max(n - 1, 1), "fixed")


@dataclass(frozen=True)
class BaseCertificate:
    """Leaf of the recursion: a 4x4 block (``B = Λ_1``) or the 1x1 zero."""

    offset: int
    size: int
    a_norm: float
    measured_norm: float


@dataclass(frozen=True)
class Claim1Certificate:
    """One level of the 4-way block recursion.

    ``children[i]`` covers rows ``offset + i*size/4`` onward and its ``C`` is
    ``child_scale`` times the matching diagonal block of this level's ``C``.
    """

    level: int
    eps: float
    offset: int
    size: int
    a_norm: float
    child_norms: tuple[float, ...]
    offdiag_norms: tuple[float, ...]
    offdiag_a_norms: tuple[float, ...]
    level_bound: float
    measured_norm: float
    contour_factor: float
    children: tuple = field(repr=False)

    @property
    def child_scale(self) -> float:
        return (1.0 - self.eps) / 2.0

    @property
    def offdiag_factor(self) -> float:
        return 2.0 / self.eps ** 2

    @property
    def ok(self) -> bool:
        return self.measured_norm <= self.level_bound * (1.0 + BOUND_RTOL)


@dataclass(frozen=True)
class MergeParams:
    """Record of one two-block merge.

    ``small`` is the block (0 or 1) whose spectrum goes to the left strip.
    ``c2`` may exceed the measured larger norm (see ``c2_inflated``).
    """

    delta: float
    c1: float
    c2: float
    offdiag_bound: float
    combined_bound: float
    k_meas: float
    measured_norm: float
    a_norm: float
    offdiag_norms: tuple[float, float]
    separation: float
    small: int
    sizes: tuple[int, int]
    c2_inflated: bool
    children: tuple = field(repr=False)

    @property
    def child_scales(self) -> tuple[float, float]:
        s = [0.0, 0.0]
        s[self.small] = self.delta
        s[1 - self.small] = 1.0 - 2.0 * self.delta
        return tuple(s)

    @property
    def ok(self) -> bool:
        return self.measured_norm <= self.combined_bound * (1.0 + BOUND_RTOL)


@dataclass(frozen=True)
class Theorem2Certificate:
    """Paving-based factorization of a ``2·4^n`` matrix.

    ``perm`` lists the paved indices (block by block) followed by the rest;
    ``merge`` certifies the factorization of ``A[perm][:, perm]``.
    """

    n: int
    l: int
    eps: float
    rounds: int
    perm: np.ndarray = field(repr=False)
    paving: PavingPartition = field(repr=False)
    merge: MergeParams = field(repr=False)


Certificate = Union[BaseCertificate, Claim1Certificate, MergeParams, Theorem2Certificate]


@dataclass
class FactorResult:
    """``A = [B, C]`` with ``B = U diag(B_diag) U^*`` (``U = I`` when ``None``)."""

    B_diag: np.ndarray
    C: np.ndarray
    certificate: Certificate
    norm_B: float
    norm_C: float
    residual: float
    U: Optional[np.ndarray] = None
    schedule: Optional[EpsSchedule] = None
    meta: dict = field(default_factory=dict)

    @property
    def B(self) -> np.ndarray:
        D = np.diag(self.B_diag)
        if self.U is None:
            return D
        return (self.U * self.B_diag[None, :]) @ self.U.conj().T


def _relative_residual(A, b, C) -> float:
    fro = np.linalg.norm(A)
    r = np.linalg.norm(A - diag_commutator(b, C))
    return float(r / fro) if fro > 0 else float(r)


def _diag_blocks(A: np.ndarray, s: int) -> np.ndarray:
    N = A.shape[0] // s
    return A.reshape(N, s, N, s)[np.arange(N), :, np.arange(N), :]


def _require_zero_diag(A: np.ndarray):
    if np.any(np.diagonal(A) != 0):
        raise DimensionError("A must have an exactly zero diagonal")


def _norms(stack, tol=NORM_TOL):
    return opnorms(stack, tol=tol)[0]


def factor_claim1(A, schedule: Optional[EpsSchedule] = None) -> FactorResult:
    """Factor a ``4^n x 4^n`` zero-diagonal matrix with ``B = diag(Λ_n)``.

    Bottom-up over levels: the 4x4 leaves use ``B = diag(±1 ± i)`` and the
    entrywise solution; each coarser level squeezes the four child spectra by
    ``(1-eps)/2`` into the four quadrants, rescales the child ``C`` by
    ``2/(1-eps)`` and fills the twelve off-diagonal blocks from the Sylvester
    equations between quadrants.  ``B_diag`` depends on the schedule only.

    Parameters
    ----------
    A : (4^n, 4^n) array_like
        Exactly zero diagonal.
    schedule : EpsSchedule, optional
        Contraction per level, outermost first; needs ``n - 1`` entries.
        Defaults to :func:`choose_schedule`.
    """
    A = as_matrix(A, square=True)
    m = A.shape[0]
    n = _log4(m)
    _require_zero_diag(A)
    if schedule is None:
        schedule = choose_schedule(m)
    if len(schedule.per_level_eps) < n - 1:
        raise DimensionError(f"schedule has {len(schedule.per_level_eps)} levels, need {n - 1}")

    if m == 1:
        cert = BaseCertificate(0, 1, 0.0, 0.0)
        return FactorResult(np.zeros(1, dtype=np.complex128), np.zeros((1, 1), dtype=np.complex128),
                            cert, 0.0, 0.0, 0.0, schedule=schedule)

    b = lattice_points(1)
    leaves = _diag_blocks(A, 4)
    C_nodes = solve_same_diag(b, leaves).X
    a_norms = _norms(leaves)
    c_norms = _norms(C_nodes)
    certs = [BaseCertificate(4 * k, 4, float(a_norms[k]), float(c_norms[k]))
             for k in range(m // 4)]

    eps_levels = list(schedule.per_level_eps[: n - 1])
    for depth, eps in enumerate(reversed(eps_levels)):
        level = depth + 2
        sc = b.size
        s = 4 * sc
        N = m // s
        offsets = quadrant_offsets(eps)
        shrink = (1.0 - eps) / 2.0
        quads = [shrink * b + off for off in offsets]
        A_nodes = _diag_blocks(A, s)
        Ablk = A_nodes.reshape(N, 4, sc, 4, sc).transpose(0, 1, 3, 2, 4)
        children = C_nodes.reshape(N, 4, sc, sc)
        Cblk = np.zeros_like(Ablk)
        for i in range(4):
            Cblk[:, i, i] = children[:, i] / shrink
        for i, j in OFFDIAG_PAIRS:
            Cblk[:, i, j] = solve_diag(quads[i], quads[j], Ablk[:, i, j]).X
        C_nodes = np.ascontiguousarray(Cblk.transpose(0, 1, 3, 2, 4)).reshape(N, s, s)

        off_c = np.stack([Cblk[:, i, j] for i, j in OFFDIAG_PAIRS], axis=1).reshape(-1, sc, sc)
        off_a = np.stack([Ablk[:, i, j] for i, j in OFFDIAG_PAIRS], axis=1).reshape(-1, sc, sc)
        off_norms = _norms(np.concatenate([off_c, off_a])).reshape(2, N, 12)
        big = _norms(np.concatenate([A_nodes, C_nodes]))
        a_lvl, c_lvl = big[:N], big[N:]
        contour = max(rect_contour(quads[i], np.concatenate([quads[j] for j in range(4) if j != i]),
                                   eps).rosenblum_factor() for i in range(4))
        new = []
        for p in range(N):
            kids = tuple(certs[4 * p:4 * p + 4])
            child_norms = tuple(float(c.measured_norm) for c in kids)
            bound = (2.0 / (1.0 - eps)) * max(child_norms) + (6.0 / eps ** 2) * float(a_lvl[p])
            new.append(Claim1Certificate(
                level, float(eps), p * s, s, float(a_lvl[p]), child_norms,
                tuple(float(x) for x in off_norms[0, p]), tuple(float(x) for x in off_norms[1, p]),
                bound, float(c_lvl[p]), contour, kids))
        certs = new
        b = np.concatenate(quads)

    C = C_nodes[0]
    cert = certs[0]
    return FactorResult(b, C, cert, float(np.abs(b).max()), float(cert.measured_norm),
                        _relative_residual(A, b, C), schedule=schedule)


def _merge_delta(c1: float, c2: float) -> tuple[float, float, bool]:
    """Return ``(delta, c2_effective, inflated)`` for norms ``c1 <= c2``."""
    if c1 == 0.0 or c2 == 0.0:
        return 0.25, max(c2, 4.0 * c1), c2 < 4.0 * c1
    ratio = c1 / c2
    if ratio < 0.25:
        delta = min(max(sqrt(ratio), ratio), 0.5 - 1e-6)
        return delta, c2, False
    # outside the small-ratio regime: balance c1/delta against c2/(1-2 delta)
    # and inflate c2 so that delta = sqrt(c1/c2) still holds
    delta = c1 / (c2 + 2.0 * c1)
    return delta, c1 / delta ** 2, True


def merge_claim2(A, F11: FactorResult, F22: FactorResult) -> FactorResult:
    """Combine factorizations of the diagonal blocks of a zero-diagonal ``A``.

    The block with the smaller ``||C||`` (``c1``) gets ``B' = (-1+δ)I + δB``
    and ``C' = C/δ``; the other gets ``B' = 2δI + (1-2δ)B``, ``C' = C/(1-2δ)``,
    with ``δ = sqrt(c1/c2)``.  The two spectra then sit left of ``Re z = -1+2δ``
    and right of ``Re z = -1+4δ``, and the off-diagonal blocks of ``C`` solve
    Sylvester equations across that strip.

    Raises
    ------
    SeparationError
        If the squeezed spectra are not ``2δ`` apart (inputs outside the square).
    """
    A = as_matrix(A, square=True)
    if F11.U is not None or F22.U is not None:
        raise DimensionError("merge needs factorizations with diagonal B")
    m1, m2 = F11.B_diag.size, F22.B_diag.size
    if A.shape[0] != m1 + m2:
        raise DimensionError(f"A is {A.shape[0]}x{A.shape[0]}, blocks are {m1} and {m2}")
    norms = (F11.norm_C, F22.norm_C)
    small = 0 if norms[0] <= norms[1] else 1
    c1, c2 = norms[small], norms[1 - small]
    delta, c2_eff, inflated = _merge_delta(c1, c2)

    bs = [F11.B_diag, F22.B_diag]
    Cs = [F11.C, F22.C]
    bnew = [None, None]
    Cnew = [None, None]
    bnew[small] = (-1.0 + delta) + delta * bs[small]
    Cnew[small] = Cs[small] / delta
    big = 1 - small
    bnew[big] = 2.0 * delta + (1.0 - 2.0 * delta) * bs[big]
    Cnew[big] = Cs[big] / (1.0 - 2.0 * delta)
    separation = float(bnew[big].real.min() - bnew[small].real.max())
    if separation < 2.0 * delta - 1e-12:
        raise SeparationError(f"strip separation {separation:.3e} < 2*delta = {2 * delta:.3e}")

    C = np.zeros_like(A)
    C[:m1, :m1] = Cnew[0]
    C[m1:, m1:] = Cnew[1]
    X12 = solve_diag(bnew[0], bnew[1], A[:m1, m1:]).X
    X21 = solve_diag(bnew[1], bnew[0], A[m1:, :m1]).X
    C[:m1, m1:] = X12
    C[m1:, :m1] = X21
    b = np.concatenate(bnew)

    off = (opnorm(X12, tol=NORM_TOL).op_norm, opnorm(X21, tol=NORM_TOL).op_norm)
    a_norm = opnorm(A, tol=NORM_TOL).op_norm
    c_norm = opnorm(C, tol=NORM_TOL).op_norm
    k_meas = max(off) * delta ** 2 / a_norm if a_norm > 0 else 0.0
    offdiag_bound = k_meas * a_norm / delta ** 2 if a_norm > 0 else 0.0
    combined = c2_eff / (1.0 - 2.0 * delta) + offdiag_bound
    cert = MergeParams(delta, c1, c2_eff, offdiag_bound, combined, k_meas, c_norm, a_norm, off,
                       separation, small, (m1, m2), inflated, (F11.certificate, F22.certificate))
    return FactorResult(b, C, cert, float(np.abs(b).max()), c_norm, _relative_residual(A, b, C))


def _theorem2_schedule(n: int, l: int, eps: float) -> EpsSchedule:
    top = min(l, n - 1)
    inner = choose_schedule(4 ** (n - l)).per_level_eps if n - l >= 1 else ()
    levels = (eps,) * top + tuple(inner)[: n - 1 - top]
    return EpsSchedule(levels, "theorem2")


def factor_theorem2(A, *, trials: int = 4, seed: int = 0, rounds: int = 1) -> FactorResult:
    """Factor a ``2·4^n x 2·4^n`` zero-diagonal matrix through a paving.

    1. Search ``4^l`` disjoint blocks of size ``4^(n-l)``, ``l = ceil(n/2)``,
       with small central norms; their union ``A'`` is half of ``A``.
    2. Factor ``A'`` (blocks concatenated in order) by the block recursion:
       the top ``l`` levels group blocks four at a time with
       ``eps = 1/max(l, 2)``, the blocks themselves use :func:`choose_schedule`.
    3. Factor the complement ``A''``: by the block recursion when
       ``rounds == 1``; otherwise split it into two ``2·4^(n-1)`` halves,
       factor each with ``rounds - 1`` and merge.
    4. Merge ``A'`` and ``A''`` with :func:`merge_claim2`.
    """
    A = as_matrix(A, square=True)
    M = A.shape[0]
    if M % 2:
        raise DimensionError(f"dimension {M} is not of the form 2*4^n")
    n = _log4(M // 2)
    if n < 1:
        raise DimensionError("factor_theorem2 needs dimension at least 8")
    _require_zero_diag(A)
    if rounds < 1:
        raise ValueError("rounds must be positive")
    l = ceil(n / 2)
    eps = 1.0 / max(l, 2)

    paving = search_paving(A, 4 ** l, 4 ** (n - l), trials=trials, seed=seed)
    paved = np.concatenate(paving.sigma)
    rest = np.setdiff1d(np.arange(M), paved)
    perm = np.concatenate([paved, rest])
    Ap = A[np.ix_(perm, perm)]
    h = paved.size

    F1 = factor_claim1(Ap[:h, :h], _theorem2_schedule(n, l, eps))
    A2 = Ap[h:, h:]
    if rounds == 1 or n < 2:
        F2 = factor_claim1(A2)
    else:
        q = A2.shape[0] // 2
        Fa = factor_theorem2(A2[:q, :q], trials=trials, seed=seed + 1, rounds=rounds - 1)
        Fb = factor_theorem2(A2[q:, q:], trials=trials, seed=seed + 2, rounds=rounds - 1)
        F2 = merge_claim2(A2, Fa, Fb)
    Fm = merge_claim2(Ap, F1, F2)

    b = np.empty(M, dtype=np.complex128)
    b[perm] = Fm.B_diag
    C = np.empty_like(A)
    C[np.ix_(perm, perm)] = Fm.C
    cert = Theorem2Certificate(n, l, eps, rounds, perm, paving, Fm.certificate)
    return FactorResult(b, C, cert, float(np.abs(b).max()), Fm.norm_C,
                        _relative_residual(A, b, C), schedule=F1.schedule)


def _next_size(m: int, method: str) -> int:
    if method == "claim1":
        M = 1
        while M < m:
            M *= 4
        return M
    M = 8
    while M < m:
        M *= 4
    return M


def factor_any(A, method: str = "claim1", *, eps: Optional[float] = None, trials: int = 4,
               seed: int = 0, rounds: int = 1, reduce_tol: float = 1e-11) -> FactorResult:
    """Factor any nonzero trace-zero square matrix as ``A = [B, C]``.

    ``A`` is scaled to norm one, unitarily reduced to zero diagonal (skipped
    when the diagonal is already exactly zero), zero-padded to the next
    admissible size, factored, truncated back (``B`` is diagonal, so the
    leading block of ``C`` already solves the leading block of the
    equation) and conjugated back.  The returned ``B`` is normal.

    Parameters
    ----------
    method : {"claim1", "theorem2"}
    eps : float, optional
        Fixed contraction for ``claim1`` instead of :func:`choose_schedule`.
    """
    A = as_matrix(A, square=True)
    m = A.shape[0]
    if method not in ("claim1", "theorem2"):
        raise ValueError(f"unknown method {method!r}")
    fro = np.linalg.norm(A)
    if fro == 0:
        raise ZeroInputError("A is the zero matrix")
    if abs(np.trace(A)) > 1e-10 * fro:
        raise NotTraceZeroError(f"|trace(A)| = {abs(np.trace(A)):.3e} exceeds 1e-10 * ||A||_F")
    scale = opnorm(A, tol=1e-12).op_norm
    An = A / scale

    U = None
    if np.any(np.diagonal(An) != 0):
        red = zerodiag.reduce(An, tol=reduce_tol)
        U = red.U
        A0 = red.A0.copy()
        # drop the sub-tolerance residue; the final residual is measured on A
        np.fill_diagonal(A0, 0.0)
    else:
        A0 = An

    M = _next_size(m, method)
    Ap = pad_to(A0, M)
    if method == "claim1":
        schedule = fixed_schedule(eps, M) if eps is not None else choose_schedule(M)
        F = factor_claim1(Ap, schedule)
    else:
        F = factor_theorem2(Ap, trials=trials, seed=seed, rounds=rounds)
    b = F.B_diag[:m].copy()
    C = F.C[:m, :m] * scale
    if U is not None:
        C = U @ C @ U.conj().T
        Bfull = (U * b[None, :]) @ U.conj().T
        resid = np.linalg.norm(A - (Bfull @ C - C @ Bfull)) / fro
    else:
        resid = _relative_residual(A, b, C)
    meta = {"method": method, "m": m, "padded": M, "norm_A": scale, "reduced": U is not None}
    return FactorResult(b, C, F.certificate, float(np.abs(b).max()),
                        opnorm(C, tol=NORM_TOL).op_norm, float(resid), U=U,
                        schedule=F.schedule, meta=meta)


def iter_claim1_nodes(cert):
    """Yield every :class:`Claim1Certificate` in a certificate tree."""
    if isinstance(cert, Claim1Certificate):
        yield cert
        for c in cert.children:
            yield from iter_claim1_nodes(c)
    elif isinstance(cert, MergeParams):
        for c in cert.children:
            yield from iter_claim1_nodes(c)
    elif isinstance(cert, Theorem2Certificate):
        yield from iter_claim1_nodes(cert.merge)


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def recheck_certificate(cert, A, C, norm=None) -> float:
    """Recompute every norm recorded in `cert` from the final ``A`` and ``C``.

    Returns the largest relative discrepancy.  `norm` defaults to
    :func:`~commfactor.matcore.opnorm`; pass an independent routine (e.g. an
    SVD) for an external check.
    """
    if norm is None:
        def norm(X):
            return opnorm(X, tol=1e-10).op_norm
    A = np.asarray(A, dtype=np.complex128)
    C = np.asarray(C, dtype=np.complex128)
    return _recheck(cert, A, C, 1.0, norm)


def _recheck(cert, A, C, scale, norm) -> float:
    worst = 0.0
    if isinstance(cert, Theorem2Certificate):
        p = cert.perm
        return _recheck(cert.merge, A[np.ix_(p, p)], C[np.ix_(p, p)], scale, norm)
    if isinstance(cert, BaseCertificate):
        sl = slice(cert.offset, cert.offset + cert.size)
        worst = max(worst, _rel(cert.a_norm, norm(A[sl, sl])))
        worst = max(worst, _rel(cert.measured_norm, scale * norm(C[sl, sl])))
        return worst
    if isinstance(cert, Claim1Certificate):
        o, s = cert.offset, cert.size
        q = s // 4
        worst = max(worst, _rel(cert.a_norm, norm(A[o:o + s, o:o + s])))
        worst = max(worst, _rel(cert.measured_norm, scale * norm(C[o:o + s, o:o + s])))
        for k, (i, j) in enumerate(OFFDIAG_PAIRS):
            ri, rj = slice(o + i * q, o + (i + 1) * q), slice(o + j * q, o + (j + 1) * q)
            worst = max(worst, _rel(cert.offdiag_norms[k], scale * norm(C[ri, rj])))
            worst = max(worst, _rel(cert.offdiag_a_norms[k], norm(A[ri, rj])))
        for k, child in enumerate(cert.children):
            worst = max(worst, _rel(cert.child_norms[k], child.measured_norm))
            worst = max(worst, _recheck(child, A, C, scale * cert.child_scale, norm))
        return worst
    if isinstance(cert, MergeParams):
        m1, m2 = cert.sizes
        worst = max(worst, _rel(cert.a_norm, norm(A)))
        worst = max(worst, _rel(cert.measured_norm, scale * norm(C)))
        worst = max(worst, _rel(cert.offdiag_norms[0], scale * norm(C[:m1, m1:])))
        worst = max(worst, _rel(cert.offdiag_norms[1], scale * norm(C[m1:, :m1])))
        blocks = (slice(0, m1), slice(m1, m1 + m2))
        for k, child in enumerate(cert.children):
            sl = blocks[k]
            worst = max(worst, _recheck(child, A[sl, sl], C[sl, sl],
                                        scale * cert.child_scales[k], norm))
        return worst
    raise TypeError(f"unknown certificate type {type(cert).__name__}")
