"""Self-similar 4^n-point spectra in the unit square.

``Λ_1 = {±1 ± i}`` and ``Λ_n = (1 - eps)/2 · Λ_{n-1} + {±(1+eps)/2 ± i(1+eps)/2}``.
Point ``k`` of ``Λ_n`` is addressed by the base-4 digits of ``k``; the most
significant digit picks the outermost quadrant offset, so consecutive runs of
``4^(n-1)`` points are the four translated copies of ``Λ_{n-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import LatticeError

__all__ = [
    "QUADRANT_SIGNS",
    "LatticeSpec",
    "PairSeparation",
    "SeparationCertificate",
    "quadrant_offsets",
    "lattice_points",
    "lambda_set",
    "separation_certificate",
]

# (sign of Re, sign of Im) in the fixed quadrant order --, -+, +-, ++
QUADRANT_SIGNS = ((-1, -1), (-1, 1), (1, -1), (1, 1))


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise LatticeError(f"eps must lie in (0, 1), got {eps}")
    return eps


def quadrant_offsets(eps: float) -> np.ndarray:
    """The four translates ``±(1+eps)/2 ± i(1+eps)/2`` in --, -+, +-, ++ order."""
    h = (1.0 + _check_eps(eps)) / 2.0
    return np.array([complex(sr * h, si * h) for sr, si in QUADRANT_SIGNS])


def lattice_points(n: int, eps_levels: Sequence[float] = ()) -> np.ndarray:
    """Points of the ``n``-level lattice with a per-level contraction schedule.

    Parameters
    ----------
    n : int
        Depth, ``n >= 1``.
    eps_levels : sequence of float
        ``eps`` for levels ``n, n-1, ..., 2`` (outermost first).  Only the
        first ``n - 1`` entries are used.
    """
    if n < 1:
        raise LatticeError("lattice depth must be at least 1")
    eps_levels = [_check_eps(e) for e in eps_levels]
    if len(eps_levels) < n - 1:
        raise LatticeError(f"need {n - 1} eps values for depth {n}, got {len(eps_levels)}")
    pts = np.array([complex(sr, si) for sr, si in QUADRANT_SIGNS])
    # innermost level first
    for eps in reversed(eps_levels[: n - 1]):
        scale = (1.0 - eps) / 2.0
        pts = np.concatenate([scale * pts + off for off in quadrant_offsets(eps)])
    return pts


@dataclass(frozen=True)
class LatticeSpec:
    n: int
    eps: float
    points: np.ndarray = field(repr=False)

    @property
    def groups(self) -> list[np.ndarray]:
        """The four quadrant groups, each of ``4^(n-1)`` points."""
        q = len(self.points) // 4
        return [self.points[k * q:(k + 1) * q] for k in range(4)]


def lambda_set(n: int, eps: float) -> LatticeSpec:
    """``Λ_n`` for a constant contraction parameter `eps`."""
    eps = _check_eps(eps)
    return LatticeSpec(n, eps, lattice_points(n, [eps] * max(n - 1, 0)))


@dataclass(frozen=True)
class PairSeparation:
    groups: tuple[int, int]
    axis: str  # "real" or "imag"
    gap: float


@dataclass(frozen=True)
class SeparationCertificate:
    n: int
    eps: float
    pairs: tuple[PairSeparation, ...]

    @property
    def min_gap(self) -> float:
        return min(p.gap for p in self.pairs)


def _projection_gap(u: np.ndarray, v: np.ndarray) -> float:
    return max(v.min() - u.max(), u.min() - v.max())


def separation_certificate(spec: LatticeSpec, *, slack: float = 1e-12) -> SeparationCertificate:
    """Measure, for each pair of quadrant groups, the axis projection gap.

    Raises
    ------
    LatticeError
        If some pair is separated by less than ``2 * eps - slack`` on both axes.
    """
    groups = spec.groups
    pairs = []
    for a, b in combinations(range(4), 2):
        gr = _projection_gap(groups[a].real, groups[b].real)
        gi = _projection_gap(groups[a].imag, groups[b].imag)
        axis, gap = ("real", gr) if gr >= gi else ("imag", gi)
        if gap < 2.0 * spec.eps - slack:
            raise LatticeError(
                f"groups {a} and {b} separated by {gap:.3e} < 2*eps = {2 * spec.eps:.3e}"
            )
        pairs.append(PairSeparation((a, b), axis, float(gap)))
    return SeparationCertificate(spec.n, spec.eps, tuple(pairs))
