"""Growth sweeps of ``||C||`` against the dimension."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from math import log

import numpy as np

from .factor import factor_any
from .matcore import random_zero_diag

__all__ = ["CSV_HEADER", "BenchRow", "run_cell", "sweep", "rows_to_csv", "parse_csv", "fit_growth"]

CSV_HEADER = ("m", "seed", "method", "norm_C", "product_ratio", "residual", "wall_time_s")


@dataclass(frozen=True)
class BenchRow:
    m: int
    seed: int
    method: str
    norm_C: float
    product_ratio: float
    residual: float
    wall_time_s: float
    error: str = ""


def run_cell(m: int, seed: int, method: str, *, trials: int = 4) -> BenchRow:
    """Factor ``random_zero_diag(m, seed)``; failures are recorded, not raised."""
    t0 = time.perf_counter()
    try:
        A = random_zero_diag(m, seed)
        F = factor_any(A, method, trials=trials, seed=seed)
        ratio = F.norm_B * F.norm_C / F.meta["norm_A"]
        row = BenchRow(m, seed, method, F.norm_C, ratio, F.residual, 0.0)
    except Exception as exc:  # keep the sweep going
        nan = float("nan")
        row = BenchRow(m, seed, method, nan, nan, nan, 0.0, f"{type(exc).__name__}: {exc}")
    wall = time.perf_counter() - t0
    return BenchRow(row.m, row.seed, row.method, row.norm_C, row.product_ratio,
                    row.residual, wall, row.error)


def sweep(ms, seeds, methods, *, trials: int = 4) -> list[BenchRow]:
    rows = []
    for method in methods:
        for m in ms:
            for seed in seeds:
                rows.append(run_cell(int(m), int(seed), method, trials=trials))
    return rows


def _f(x: float) -> str:
    return repr(float(x))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.m, r.seed, r.method, _f(r.norm_C), _f(r.product_ratio),
                    _f(r.residual), _f(r.wall_time_s)])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    rd = csv.DictReader(io.StringIO(text))
    if tuple(rd.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected header {rd.fieldnames}")
    out = []
    for rec in rd:
        out.append({
            "m": int(rec["m"]), "seed": int(rec["seed"]), "method": rec["method"],
            **{k: float(rec[k]) for k in CSV_HEADER[3:]},
        })
    return out


def fit_growth(rows, method: str) -> dict:
    """Least-squares fit of ``log median ||C||`` against ``log m``.

    Also reports the constant ``K`` of ``median ||C|| ~ K (log m)^3 sqrt(m)``
    as the largest ratio over the swept sizes.
    """
    by_m: dict[int, list[float]] = {}
    for r in rows:
        rm, rmeth, c = (r.m, r.method, r.norm_C) if isinstance(r, BenchRow) else (r["m"], r["method"], r["norm_C"])
        if rmeth == method and np.isfinite(c):
            by_m.setdefault(int(rm), []).append(float(c))
    ms = sorted(by_m)
    med = [float(np.median(by_m[m])) for m in ms]
    out = {"method": method, "m": ms, "median_norm_C": med, "exponent": None, "log_log_K": None}
    if len(ms) >= 2:
        x = np.log(np.asarray(ms, dtype=float))
        y = np.log(np.asarray(med))
        slope, icept = np.polyfit(x, y, 1)
        out["exponent"] = float(slope)
        out["prefactor"] = float(np.exp(icept))
    ks = [c / (log(m) ** 3 * m ** 0.5) for m, c in zip(ms, med) if m > 1]
    if ks:
        out["log_log_K"] = float(max(ks))
    return out
