"""Pavings: small-norm central submatrices and the spacing lower bound.

* :func:`search_paving` looks for disjoint index blocks whose central
  submatrices have small operator norm (randomized restarts plus greedy
  swaps; no norm guarantee).
* :func:`claim3_pave` turns a factorization ``A = [diag(b), C]`` into a
  paving of ``A`` by bucketing the ``b_k`` on a square grid.
* :func:`gap_witness` finds the closest pair of spectral points, which forces
  a large entry in any ``C`` solving ``[diag(b), C] = e_i e_j^T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import floor, isqrt, sqrt
from typing import Optional

import numpy as np

from .errors import PavingError
from .matcore import as_matrix, diag_commutator, opnorm, opnorms

__all__ = [
    "PavingPartition",
    "Claim3Paving",
    "GapWitness",
    "search_paving",
    "nested_grouping",
    "claim3_pave",
    "gap_witness",
    "witness_matrix",
    "central_norms",
]

SQUARE_SLACK = 1e-12
# swap candidates tried per step: strongest-coupled inside x weakest-coupled outside
INSIDE_CANDIDATES = 4
MAX_CANDIDATES = 32


@dataclass(frozen=True)
class PavingPartition:
    sigma: tuple[np.ndarray, ...]
    block_norms: np.ndarray
    covered: np.ndarray
    target_ratio: float
    trial: int = 0

    @property
    def max_norm(self) -> float:
        return float(self.block_norms.max()) if len(self.block_norms) else 0.0


def central_norms(A: np.ndarray, blocks) -> np.ndarray:
    """Operator norms of the central submatrices ``A[σ, σ]`` (power iteration)."""
    out = np.zeros(len(blocks))
    by_size: dict[int, list[int]] = {}
    for k, blk in enumerate(blocks):
        by_size.setdefault(len(blk), []).append(k)
    for size, ks in by_size.items():
        if size == 0:
            continue
        stack = np.stack([A[np.ix_(blocks[k], blocks[k])] for k in ks])
        out[ks] = opnorms(stack, tol=1e-10)[0]
    return out


def _snorm(A: np.ndarray, idx) -> float:
    if len(idx) < 2:
        return abs(A[idx[0], idx[0]]) if len(idx) else 0.0
    return float(np.linalg.norm(A[np.ix_(idx, idx)], 2))


def _local_search(A: np.ndarray, blocks: list[list[int]], pool: list[int], max_steps: int,
                  width: int = MAX_CANDIDATES):
    m = A.shape[0]
    P = np.abs(A) ** 2
    P = P + P.T
    where = np.full(m, -1)
    for k, blk in enumerate(blocks):
        where[blk] = k
    norms = [_snorm(A, blk) for blk in blocks]
    for _ in range(max_steps):
        w = int(np.argmax(norms))
        cur = norms[w]
        if cur == 0.0:
            break
        blk = blocks[w]
        inside = np.asarray(blk)
        contrib = P[np.ix_(inside, inside)].sum(axis=1)
        outside = np.flatnonzero(where != w)
        coupling = P[np.ix_(outside, inside)].sum(axis=1)
        outside = outside[np.argsort(coupling, kind="stable")][:width]
        done = False
        for pos in np.argsort(-contrib, kind="stable")[:INSIDE_CANDIDATES]:
            i = blk[pos]
            for j in outside:
                j = int(j)
                trial = blk[:pos] + [j] + blk[pos + 1:]
                nw = _snorm(A, trial)
                if nw >= cur:
                    continue
                v = int(where[j])
                if v >= 0:
                    other = blocks[v]
                    other_trial = [i if x == j else x for x in other]
                    nv = _snorm(A, other_trial)
                    if nv >= cur:
                        continue
                    blocks[v] = other_trial
                    norms[v] = nv
                else:
                    pool[pool.index(j)] = i
                blocks[w] = trial
                norms[w] = nw
                where[i], where[j] = v, w
                done = True
                break
            if done:
                break
        if not done:
            break
    return blocks, pool


def search_paving(A, num_blocks: int, block_size: int, trials: int = 4, seed: int = 0,
                  *, max_steps: Optional[int] = None) -> PavingPartition:
    """Search for `num_blocks` disjoint blocks of `block_size` indices with small norms.

    Each trial draws a random balanced partition and then greedily swaps an
    index of the currently worst block with an index outside it (in another
    block or unused) while that strictly lowers the worst norm.  Only the few
    most strongly coupled inside indices and the most weakly coupled outside
    indices are tried, and at most `max_steps` (default ``2m``) swaps are made.  The best
    trial wins; ties go to the lowest trial index.  Per-trial generators are
    spawned from `seed`, so the result is deterministic.

    The recorded ``block_norms`` are power-iteration norms of ``A[σ_i, σ_i]``.
    """
    A = as_matrix(A, square=True)
    m = A.shape[0]
    if num_blocks < 1 or block_size < 1:
        raise PavingError("num_blocks and block_size must be positive")
    if num_blocks * block_size > m:
        raise PavingError(f"{num_blocks} blocks of size {block_size} do not fit in {m} indices")
    if trials < 1:
        raise PavingError("trials must be positive")
    if max_steps is None:
        max_steps = 2 * m
    best = None
    best_val = np.inf
    for t, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(ss)
        perm = [int(k) for k in rng.permutation(m)]
        blocks = [perm[k * block_size:(k + 1) * block_size] for k in range(num_blocks)]
        pool = perm[num_blocks * block_size:]
        blocks, pool = _local_search(A, blocks, pool, max_steps)
        val = max(_snorm(A, blk) for blk in blocks)
        if val < best_val:
            best, best_val = (t, blocks), val
    t, blocks = best
    sigma = [np.sort(np.asarray(blk, dtype=np.int64)) for blk in blocks]
    sigma.sort(key=lambda s: int(s[0]))
    norms = central_norms(A, sigma)
    covered = np.sort(np.concatenate(sigma))
    return PavingPartition(tuple(sigma), norms, covered, num_blocks ** -0.5, t)


def nested_grouping(partition: PavingPartition, arity: int = 4) -> list[list[np.ndarray]]:
    """Group the blocks `arity` at a time, in order, up to their full union.

    Returns levels ``0..l``: level ``s`` has ``arity**s`` groups, each the
    union of `arity` consecutive groups of level ``s + 1``; level ``l`` is
    the blocks themselves.
    """
    nb = len(partition.sigma)
    l = 0
    while arity ** l < nb:
        l += 1
    if arity ** l != nb:
        raise PavingError(f"{nb} blocks is not a power of {arity}")
    levels = [list(partition.sigma)]
    while len(levels[0]) > 1:
        prev = levels[0]
        levels.insert(0, [np.concatenate(prev[k:k + arity]) for k in range(0, len(prev), arity)])
    return levels


def _check_square(b: np.ndarray):
    bad = np.flatnonzero((np.abs(b.real) > 1 + SQUARE_SLACK) | (np.abs(b.imag) > 1 + SQUARE_SLACK))
    if bad.size:
        k = int(bad[0])
        raise PavingError(f"spectral point b[{k}] = {b[k]} lies outside the unit square")


@dataclass(frozen=True)
class Claim3Paving:
    eps: float
    intervals: int
    cells: tuple[tuple[tuple[int, int], np.ndarray], ...]
    block_norms: np.ndarray
    c_norm: float
    bound: float
    guaranteed_bound: float

    @property
    def ok(self) -> bool:
        return bool(np.all(self.block_norms <= self.bound + 1e-9))


def _interval_index(x: np.ndarray, k: int) -> np.ndarray:
    # k equal half-open intervals of [-1, 1]; the last one is closed
    idx = np.floor((x + 1.0) * (k / 2.0)).astype(np.int64)
    return np.clip(idx, 0, k - 1)


def claim3_pave(B_diag, C, eps: float) -> Claim3Paving:
    """Pave ``A = [diag(B_diag), C]`` by a ``⌊2/eps⌋ x ⌊2/eps⌋`` grid on the spectrum.

    Index ``k`` goes to the cell containing ``(Re b_k, Im b_k)``.  Each cell's
    central block equals ``[D - cI, C_cell]`` for the cell centre ``c``, so
    its norm is at most ``2 * halfdiag * ||C||``; ``guaranteed_bound`` is that
    value, and ``bound = sqrt(2) eps ||C||`` coincides with it when ``2/eps``
    is an integer.
    """
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise PavingError(f"eps must lie in (0, 1], got {eps}")
    b = np.atleast_1d(np.asarray(B_diag, dtype=np.complex128))
    C = as_matrix(C, square=True, name="C")
    if C.shape[0] != b.size:
        raise PavingError(f"C is {C.shape[0]}x{C.shape[0]} but B_diag has {b.size} entries")
    _check_square(b)
    k = int(floor(2.0 / eps + 1e-12))
    ri = _interval_index(b.real, k)
    ii = _interval_index(b.imag, k)
    cells = {}
    for idx in range(b.size):
        cells.setdefault((int(ri[idx]), int(ii[idx])), []).append(idx)
    keys = sorted(cells)
    members = [np.asarray(cells[key], dtype=np.int64) for key in keys]
    A = diag_commutator(b, C)
    norms = central_norms(A, members)
    c_norm = opnorm(C).op_norm
    return Claim3Paving(eps, k, tuple(zip(keys, members)), norms, c_norm,
                        sqrt(2.0) * eps * c_norm, 2.0 * sqrt(2.0) / k * c_norm)


@dataclass(frozen=True)
class GapWitness:
    i: int
    j: int
    gap: float
    c_entry_lower_bound: float
    pigeonhole_bound: float
    m: int = field(default=0)

    @property
    def asymptotic_bound(self) -> float:
        """``sqrt(m/8)``, the large-m form of the forced entry size."""
        return sqrt(self.m / 8.0)


def gap_witness(B_diag) -> GapWitness:
    """Closest pair of spectral points (exact all-pairs scan).

    The ``⌊sqrt(m-1)⌋²`` grid cells of side ``2/⌊sqrt(m-1)⌋`` cannot hold
    ``m`` points separately, so some pair is within ``2 sqrt(2)/⌊sqrt(m-1)⌋``.
    """
    b = np.atleast_1d(np.asarray(B_diag, dtype=np.complex128))
    m = b.size
    if m < 2:
        raise PavingError("need at least two spectral points")
    _check_square(b)
    iu, ju = np.triu_indices(m, 1)
    dist = np.abs(b[iu] - b[ju])
    k = int(np.argmin(dist))
    gap = float(dist[k])
    lower = 1.0 / gap if gap > 0 else np.inf
    return GapWitness(int(iu[k]), int(ju[k]), gap, lower, 2.0 * sqrt(2.0) / isqrt(m - 1), m)


def witness_matrix(w: GapWitness, m: int) -> np.ndarray:
    """The matrix unit ``e_i e_j^T``; any ``C`` with ``[diag(b), C]`` equal to it has ``|C_ij| = 1/gap``."""
    if w.i == w.j:
        raise PavingError("witness indices must differ")
    if not (0 <= w.i < m and 0 <= w.j < m):
        raise PavingError("witness indices out of range")
    A = np.zeros((m, m), dtype=np.complex128)
    A[w.i, w.j] = 1.0
    return A
