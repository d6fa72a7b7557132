"""Command line front end: ``commfactor {gen,factor,verify,pave,witness,bench}``.

Exit codes: 0 success/verified, 2 invalid input, 3 solver or verification
failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, bench, mmio, report
from .errors import CommutatorError
from .factor import factor_any
from .matcore import random_trace_zero, random_zero_diag
from .paving import claim3_pave, gap_witness, search_paving, witness_matrix
from .sylvester import solve_same_diag

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_IO = 4


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


# --- file helpers -------------------------------------------------------

def _read(path) -> np.ndarray:
    try:
        with open(path, "r", encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    except UnicodeDecodeError:
        raise CliError(f"{path}: not a text matrix file", EXIT_INPUT) from None
    try:
        if text.lstrip().startswith("{"):
            d = json.loads(text)
            return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        return mmio.parse_matrix(text, path)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None


def _matrix_text(A, fmt: str) -> str:
    if fmt == "json":
        return report.dumps({"schema": report.SCHEMA, "re": A.real, "im": A.imag})
    return mmio.format_matrix(A)


def _write_text(path, text: str):
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from None


def _emit(obj, path):
    text = report.dumps(obj)
    if path:
        _write_text(path, text)
    else:
        sys.stdout.write(text)


def _ext(fmt):
    return ".json" if fmt == "json" else ".mtx"


# --- commands -----------------------------------------------------------

def cmd_gen(args) -> int:
    if args.m < 1:
        raise CliError("m must be positive", EXIT_INPUT)
    A = random_zero_diag(args.m, args.seed) if args.kind == "zero-diag" else random_trace_zero(args.m, args.seed)
    text = _matrix_text(A, args.format)
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _spectrum_ok(B, slack):
    ev = np.linalg.eigvals(B)
    bad = np.flatnonzero((np.abs(ev.real) > 1 + slack) | (np.abs(ev.imag) > 1 + slack))
    return ev, bad


def cmd_factor(args) -> int:
    A = _read(args.input)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.size == 0:
        raise CliError(f"{args.input}: expected a nonempty square matrix, got {A.shape}", EXIT_INPUT)
    try:
        F = factor_any(A, args.method, eps=args.eps, trials=args.trials, seed=args.seed,
                       rounds=args.rounds)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    except (CommutatorError, RuntimeError, np.linalg.LinAlgError) as exc:
        raise CliError(f"solver failure: {exc}", EXIT_SOLVER) from None
    in_square = bool(np.all(np.abs(F.B_diag.real) <= 1 + 1e-12) and np.all(np.abs(F.B_diag.imag) <= 1 + 1e-12))
    verified = bool(F.residual <= args.tol and in_square)
    prefix = args.output or os.path.splitext(args.input)[0]
    ext = _ext(args.format)
    _write_text(prefix + "_B" + ext, _matrix_text(F.B, args.format))
    _write_text(prefix + "_C" + ext, _matrix_text(F.C, args.format))
    if F.U is not None:
        _write_text(prefix + "_U" + ext, _matrix_text(F.U, args.format))
    rep = report.factor_report(F, seed=args.seed, verified=verified, tol=args.tol)
    _write_text(prefix + "_report.json", report.dumps(rep))
    print(f"m={F.meta['m']} method={args.method} norm_C={F.norm_C!r} "
          f"residual={F.residual!r} verified={verified}")
    return EXIT_OK if verified else EXIT_SOLVER


def cmd_verify(args) -> int:
    A, B, C = _read(args.A), _read(args.B), _read(args.C)
    shapes = {A.shape, B.shape, C.shape}
    if len(shapes) != 1 or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise CliError(f"dimension mismatch: A{A.shape} B{B.shape} C{C.shape}", EXIT_INPUT)
    fro = np.linalg.norm(A)
    R = A - (B @ C - C @ B)
    residual = float(np.linalg.norm(R) / fro) if fro > 0 else float(np.linalg.norm(R))
    normal_defect = float(np.linalg.norm(B @ B.conj().T - B.conj().T @ B))
    nB = float(np.linalg.norm(B, 2))
    ev, bad = _spectrum_ok(B, args.spectrum_slack)
    failures = []
    if not residual <= args.tol:
        failures.append(f"residual {residual:.3e} > {args.tol:.1e}")
    if bad.size:
        failures.append(f"{bad.size} eigenvalue(s) of B outside the unit square, e.g. {ev[bad[0]]}")
    if normal_defect > 1e-8 * max(nB * nB, 1.0):
        failures.append(f"B is not normal: ||BB*-B*B||_F = {normal_defect:.3e}")
    summary = {
        "schema": report.SCHEMA,
        "tool_version": __version__,
        "m": A.shape[0],
        "residual_rel": residual,
        "norm_A": float(np.linalg.norm(A, 2)),
        "norm_B": nB,
        "norm_C": float(np.linalg.norm(C, 2)),
        "normal_defect": normal_defect,
        "max_abs_re": float(np.abs(ev.real).max()),
        "max_abs_im": float(np.abs(ev.imag).max()),
        "verified": not failures,
        "failures": failures,
    }
    _emit(summary, args.output)
    for f in failures:
        print("FAILED:", f, file=sys.stderr)
    return EXIT_OK if not failures else EXIT_SOLVER


def _diag_frame(B, C, U):
    """Spectral points and ``C`` in the basis where ``B`` is diagonal."""
    if U is not None:
        if U.shape != B.shape:
            raise CliError("U and B dimensions differ", EXIT_INPUT)
        B = U.conj().T @ B @ U
        C = U.conj().T @ C @ U
    off = B - np.diag(np.diagonal(B))
    if np.linalg.norm(off) > 1e-10 * max(np.linalg.norm(B), 1.0):
        raise CliError("B is not diagonal in the given basis; pass --U", EXIT_INPUT)
    return np.diagonal(B).copy(), C


def cmd_pave(args) -> int:
    try:
        if args.mode == "claim3":
            if args.B is None or args.C is None:
                raise CliError("claim3 mode needs --B and --C", EXIT_INPUT)
            B, C = _read(args.B), _read(args.C)
            U = _read(args.U) if args.U else None
            b, Cd = _diag_frame(B, C, U)
            eps = 0.5 if args.eps is None else args.eps
            P = claim3_pave(b, Cd, eps)
            out = {
                "schema": report.SCHEMA, "tool_version": __version__, "mode": "claim3",
                "eps": P.eps, "intervals": P.intervals, "max_cells": P.intervals ** 2,
                "cells": [{"cell": key, "indices": idx, "norm": float(nrm)}
                          for (key, idx), nrm in zip(P.cells, P.block_norms)],
                "c_norm": P.c_norm, "bound": P.bound, "guaranteed_bound": P.guaranteed_bound,
                "ok": P.ok,
            }
            _emit(out, args.output)
            return EXIT_OK if P.ok else EXIT_SOLVER
        if args.input is None:
            raise CliError("search mode needs -i/--input", EXIT_INPUT)
        A = _read(args.input)
        m = A.shape[0]
        k = args.blocks
        size = args.block_size or m // k
        P = search_paving(A, k, size, trials=args.trials, seed=args.seed)
        out = {
            "schema": report.SCHEMA, "tool_version": __version__, "mode": "search",
            "m": m, "blocks": P.sigma, "block_norms": P.block_norms, "max_norm": P.max_norm,
            "target_ratio": P.target_ratio, "norm_A": float(np.linalg.norm(A, 2)),
            "trials": args.trials, "seed": args.seed, "trial": P.trial,
        }
        _emit(out, args.output)
        return EXIT_OK
    except CommutatorError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None


def cmd_witness(args) -> int:
    B = _read(args.B)
    U = _read(args.U) if args.U else None
    b, _ = _diag_frame(B, np.zeros_like(B), U)
    try:
        w = gap_witness(b)
    except CommutatorError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    out = {"schema": report.SCHEMA, "tool_version": __version__, "witness": w,
           "asymptotic_bound": w.asymptotic_bound, "solved_entry": None}
    if w.gap > 0:
        sol = solve_same_diag(b, witness_matrix(w, b.size))
        out["solved_entry"] = float(abs(sol.X[w.i, w.j]))
    _emit(out, args.output)
    return EXIT_OK


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_bench(args) -> int:
    methods = [t.strip() for t in args.methods.split(",") if t.strip()]
    for meth in methods:
        if meth not in ("claim1", "theorem2"):
            raise CliError(f"unknown method {meth!r}", EXIT_INPUT)
    seeds = range(args.seed, args.seed + args.seeds)
    rows = bench.sweep(args.m_list, seeds, methods, trials=args.trials)
    text = bench.rows_to_csv(rows)
    fits = [bench.fit_growth(rows, meth) for meth in methods]
    errors = [{"m": r.m, "seed": r.seed, "method": r.method, "error": r.error} for r in rows if r.error]
    if args.output:
        _write_text(args.output, text)
        _write_text(args.output + ".fit.json", report.dumps(
            {"schema": report.SCHEMA, "tool_version": __version__, "fits": fits, "errors": errors}))
    else:
        sys.stdout.write(text)
    for fit in fits:
        print(f"fit method={fit['method']} exponent={fit['exponent']!r} "
              f"log_log_K={fit['log_log_K']!r}", file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK if not errors else EXIT_SOLVER


# --- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commfactor", description="Commutator factorizations A = [B, C].")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random test matrix")
    g.add_argument("m", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--kind", choices=("zero-diag", "trace-zero"), default="zero-diag")
    g.add_argument("-o", "--output")
    g.add_argument("--format", choices=("mm", "json"), default="mm")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("factor", help="factor a trace-zero matrix")
    f.add_argument("-i", "--input", required=True)
    f.add_argument("-o", "--output", help="output prefix (default: input path without extension)")
    f.add_argument("--method", choices=("claim1", "theorem2"), default="claim1")
    f.add_argument("--eps", type=float, help="fixed contraction for claim1")
    f.add_argument("--rounds", type=int, default=1)
    f.add_argument("--trials", type=int, default=4)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--tol", type=float, default=1e-9)
    f.add_argument("--format", choices=("mm", "json"), default="mm")
    f.set_defaults(func=cmd_factor)

    v = sub.add_parser("verify", help="independently check A = BC - CB")
    v.add_argument("A")
    v.add_argument("B")
    v.add_argument("C")
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--spectrum-slack", type=float, default=1e-10)
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    pv = sub.add_parser("pave", help="grid paving from a factorization, or paving search")
    pv.add_argument("--mode", choices=("claim3", "search"), default="claim3")
    pv.add_argument("-i", "--input", help="matrix to pave (search mode)")
    pv.add_argument("--B")
    pv.add_argument("--C")
    pv.add_argument("--U", help="unitary with U*BU diagonal (from factor)")
    pv.add_argument("--eps", type=float)
    pv.add_argument("--blocks", type=int, default=4)
    pv.add_argument("--block-size", type=int)
    pv.add_argument("--trials", type=int, default=4)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("-o", "--output")
    pv.set_defaults(func=cmd_pave)

    w = sub.add_parser("witness", help="closest spectral pair and the forced entry of C")
    w.add_argument("--B", required=True)
    w.add_argument("--U")
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_witness)

    b = sub.add_parser("bench", help="sweep ||C|| against m")
    b.add_argument("--m-list", type=_int_list, default=[4, 16, 64])
    b.add_argument("--seeds", type=int, default=5, help="number of seeds")
    b.add_argument("--seed", type=int, default=0, help="first seed")
    b.add_argument("--methods", default="claim1")
    b.add_argument("--trials", type=int, default=4)
    b.add_argument("-o", "--output", help="CSV path; fit goes to <path>.fit.json")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"commfactor: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
