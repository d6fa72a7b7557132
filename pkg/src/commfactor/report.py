"""JSON certificate reports.

Floats are emitted with Python's shortest round-trip repr, so parsing a
report gives back the exact doubles that were measured.  Keys are sorted
and no timestamps are recorded, which keeps reports byte-stable.
"""
from __future__ import annotations

import json
import math
from dataclasses import fields, is_dataclass

import numpy as np

from . import __version__
from .factor import (BaseCertificate, Claim1Certificate, FactorResult, MergeParams,
                     Theorem2Certificate)
from .paving import PavingPartition

__all__ = ["SCHEMA", "to_jsonable", "certificate_tree", "factor_report", "dumps", "write_json"]

SCHEMA = 1


def to_jsonable(obj):
    """Plain-JSON view of numpy scalars/arrays, complex numbers and dataclasses."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _paving_summary(p: PavingPartition) -> dict:
    return {
        "blocks": [blk for blk in p.sigma],
        "block_norms": p.block_norms,
        "max_norm": p.max_norm,
        "target_ratio": p.target_ratio,
        "trial": p.trial,
    }


def certificate_tree(cert) -> dict:
    if isinstance(cert, BaseCertificate):
        return {"kind": "base", "offset": cert.offset, "size": cert.size,
                "a_norm": cert.a_norm, "measured_norm": cert.measured_norm}
    if isinstance(cert, Claim1Certificate):
        return {
            "kind": "claim1",
            "level": cert.level,
            "eps": cert.eps,
            "offset": cert.offset,
            "size": cert.size,
            "a_norm": cert.a_norm,
            "child_norms": cert.child_norms,
            "offdiag_norms": cert.offdiag_norms,
            "offdiag_a_norms": cert.offdiag_a_norms,
            "level_bound": cert.level_bound,
            "measured_norm": cert.measured_norm,
            "contour_factor": cert.contour_factor,
            "ok": cert.ok,
            "children": [certificate_tree(c) for c in cert.children],
        }
    if isinstance(cert, MergeParams):
        return {
            "kind": "merge",
            "delta": cert.delta,
            "c1": cert.c1,
            "c2": cert.c2,
            "c2_inflated": cert.c2_inflated,
            "offdiag_bound": cert.offdiag_bound,
            "combined_bound": cert.combined_bound,
            "k_meas": cert.k_meas,
            "measured_norm": cert.measured_norm,
            "a_norm": cert.a_norm,
            "offdiag_norms": cert.offdiag_norms,
            "separation": cert.separation,
            "small": cert.small,
            "sizes": cert.sizes,
            "ok": cert.ok,
            "children": [certificate_tree(c) for c in cert.children],
        }
    if isinstance(cert, Theorem2Certificate):
        return {
            "kind": "theorem2",
            "n": cert.n,
            "l": cert.l,
            "eps": cert.eps,
            "rounds": cert.rounds,
            "perm": cert.perm,
            "paving": _paving_summary(cert.paving),
            "merge": certificate_tree(cert.merge),
        }
    raise TypeError(f"unknown certificate type {type(cert).__name__}")


def factor_report(F: FactorResult, *, seed: int, verified: bool, tol: float) -> dict:
    norm_A = F.meta.get("norm_A", float("nan"))
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "m": F.meta.get("m", F.B_diag.size),
        "padded": F.meta.get("padded", F.B_diag.size),
        "method": F.meta.get("method"),
        "eps_schedule": list(F.schedule.per_level_eps) if F.schedule else None,
        "schedule_rule": F.schedule.rule if F.schedule else None,
        "norm_A": norm_A,
        "norm_B": F.norm_B,
        "norm_C": F.norm_C,
        "product_ratio": F.norm_B * F.norm_C / norm_A,
        "residual_rel": F.residual,
        "tol": tol,
        "verified": verified,
        "reduced": F.meta.get("reduced", False),
        "seed": seed,
        "b_diag": F.B_diag,
        "certificate_tree": certificate_tree(F.certificate),
    }
    if isinstance(F.certificate, Theorem2Certificate):
        report["paving"] = _paving_summary(F.certificate.paving)
    return report


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
