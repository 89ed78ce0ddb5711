"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 inconclusive
(resource limit hit or a truncated run that did not stabilize).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional

from . import c2_poisson, vertex, zhu
from .fock import AlgebraConfig, Sector, basis_bits, basis_cache_io, fermion_count_series
from .reports import Report

log = logging.getLogger("symfer")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


@dataclass
class RunConfig:
    d: int
    max_weight: int = 12
    cap_weight: Optional[int] = None
    suite: Optional[str] = None
    method: str = "reps"
    cache_dir: Optional[str] = None
    out: Optional[str] = None
    threads: int = 1


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _check_report(name: str, d: int, chk: vertex.CheckReport, params: dict) -> Report:
    rep = Report(name, d, params)
    rep.add("holds", True, chk.passed)
    rep.metadata["checked"] = chk.checked
    if chk.witness:
        rep.notes.append(chk.witness)
    return rep


def suite_relations(cfg: RunConfig) -> Report:
    return c2_poisson.relation_suite(cfg.d, max_weight=cfg.max_weight)


def suite_bd_basis(cfg: RunConfig) -> Report:
    return c2_poisson.verify_bd_basis(cfg.d)


def suite_nilpotency(cfg: RunConfig) -> Report:
    if cfg.d >= 5:
        return c2_poisson.omega_power_identity_high_d(cfg.d)
    return c2_poisson.nilpotency_degree(cfg.d)


def suite_coprimality(cfg: RunConfig) -> Report:
    return zhu.coprimality_check(cfg.d)


def suite_center(cfg: RunConfig) -> Report:
    A = zhu.build_Ad(cfg.d)
    rep = Report("center", cfg.d)
    rep.add("dim center", 2 ** (2 * cfg.d - 1) + 3, zhu.center_dim(A)[0])
    return rep


def suite_functionals(cfg: RunConfig) -> Report:
    A = zhu.build_Ad(cfg.d)
    rep = Report("functionals", cfg.d)
    rep.add("dim symmetric functionals", 2 ** (2 * cfg.d - 1) + 3, zhu.symmetric_functionals_dim(A))
    return rep


def suite_invariants(cfg: RunConfig) -> Report:
    inv = zhu.sp_invariants_dim(cfg.d)
    rep = Report("invariants", cfg.d)
    rep.add("dim invariants", cfg.d + 4, inv.dim)
    for k, v in sorted(inv.per_degree.items()):
        rep.add(f"Lambda^{k} invariant dim", 1, v)
    rep.add("invariants lie in C[omega]", True, inv.in_omega_span)
    return rep


def suite_j4(cfg: RunConfig) -> Report:
    if cfg.d != 2:
        raise UsageError("the j4 suite requires --d 2")
    rep = zhu.verify_j4(2)
    if cfg.cap_weight is not None:
        ctx = zhu.ZhuContext(2, cfg.cap_weight)
        rep.add(f"J4 - p(omega) in O(V) at cap {cfg.cap_weight}", True, zhu.j4_membership(ctx))
        fit = zhu.j4_polynomial_mod_O(ctx)
        rep.metadata["polynomial mod O(V)"] = fit
    return rep


def suite_oracle_reps(cfg: RunConfig) -> Report:
    rep = Report("oracle-reps", cfg.d)
    for m in zhu.UNTWISTED_MODULES:
        sub = zhu.oracle_rep_check(cfg.d, m)
        rep.items.extend(sub.items)
        rep.notes.extend(sub.notes)
    return rep


def suite_lambda_bracket(cfg: RunConfig) -> Report:
    chk = vertex.lambda_bracket_check(AlgebraConfig(cfg.d), max_weight=min(cfg.max_weight, 6))
    return _check_report("lambda-bracket", cfg.d, chk, {"max_weight": min(cfg.max_weight, 6)})


def suite_virasoro(cfg: RunConfig) -> Report:
    w = min(cfg.max_weight, 6)
    return _check_report("virasoro", cfg.d, vertex.virasoro_closure_check(cfg.d, max_weight=w), {"max_weight": w})


def suite_skew_symmetry(cfg: RunConfig) -> Report:
    return _check_report("skew-symmetry", cfg.d, vertex.skew_symmetry_check(cfg.d), {})


def suite_commutator(cfg: RunConfig) -> Report:
    return _check_report("commutator", cfg.d, vertex.commutator_formula_check(cfg.d), {})


def suite_basis_counts(cfg: RunConfig) -> Report:
    rep = Report("basis-counts", cfg.d, {"max_weight": cfg.max_weight})
    series = fermion_count_series(cfg.d, cfg.max_weight)
    for w in range(cfg.max_weight + 1):
        if cfg.cache_dir:
            n = len(basis_cache_io(AlgebraConfig(cfg.d), Sector.UNTWISTED, w, False, cfg.cache_dir))
        else:
            n = len(basis_bits(cfg.d, Sector.UNTWISTED, 2 * w, False))
        rep.add(f"weight {w}", series[w], n)
    return rep


SUITES: Dict[str, Callable[[RunConfig], Report]] = {
    "relations": suite_relations,
    "bd-basis": suite_bd_basis,
    "nilpotency": suite_nilpotency,
    "coprimality": suite_coprimality,
    "center": suite_center,
    "functionals": suite_functionals,
    "invariants": suite_invariants,
    "j4": suite_j4,
    "oracle-reps": suite_oracle_reps,
    "lambda-bracket": suite_lambda_bracket,
    "virasoro": suite_virasoro,
    "skew-symmetry": suite_skew_symmetry,
    "commutator": suite_commutator,
    "basis-counts": suite_basis_counts,
}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_c2_dims(cfg: RunConfig) -> Report:
    return c2_poisson.c2_quotient_dims(cfg.d, cfg.max_weight, threads=cfg.threads).to_report()


def cmd_verify(cfg: RunConfig) -> Report:
    return SUITES[cfg.suite](cfg)


def cmd_zhu(cfg: RunConfig) -> Report:
    d = cfg.d
    if cfg.method == "reps":
        A = zhu.build_Ad(d, strict=False)
        rep = Report("zhu-reps", d, {"method": "reps"})
        rep.add("dim A_d", c2_poisson.n_d(d), A.dim)
        cop = zhu.coprimality_check(d, A)
        rep.items.extend(cop.items)
        expected = 2 ** (2 * d - 1) + 3
        rep.add("dim center", expected, zhu.center_dim(A)[0])
        rep.add("dim symmetric functionals", expected, zhu.symmetric_functionals_dim(A))
        return rep
    cap = 12 if cfg.cap_weight is None else cfg.cap_weight
    ctx = zhu.ZhuContext(d, cap)
    rep = zhu.direct_zhu_dim(d, cap, ctx=ctx).to_report()
    if d == 2 and cap >= 12:
        # informational: the weight-four identity modulo O(V)
        rep.metadata["j4 identity in O(V)"] = zhu.j4_membership(ctx)
        rep.metadata["j4 polynomial mod O(V)"] = zhu.j4_polynomial_mod_O(ctx)
    return rep


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, required=True, help="rank (number of fermion pairs)")
    common.add_argument("--max-weight", type=int, default=12)
    common.add_argument("--cap", type=int, default=None, help="cap weight for truncated O(V) spans")
    common.add_argument("--cache-dir", default=os.environ.get("SYMFER_CACHE"))
    common.add_argument("--out", default=None, help="write the JSON report here (default stdout)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="symfer", description="Exact checks for symplectic fermion vertex algebras.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("c2-dims", parents=[common], help="graded dimensions of the C2 quotient")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    z = sub.add_parser("zhu", parents=[common], help="the Zhu algebra from representations or directly")
    z.add_argument("--method", choices=("reps", "direct"), default="reps")
    return p


def _config(ns) -> RunConfig:
    if ns.d < 1:
        raise UsageError("--d must be at least 1")
    if ns.max_weight < 0 or (ns.cap is not None and ns.cap < 0):
        raise UsageError("weights must be nonnegative")
    if ns.threads < 1:
        raise UsageError("--threads must be at least 1")
    return RunConfig(
        d=ns.d,
        max_weight=ns.max_weight,
        cap_weight=ns.cap,
        suite=getattr(ns, "suite", None),
        method=getattr(ns, "method", "reps"),
        cache_dir=ns.cache_dir,
        out=ns.out,
        threads=ns.threads,
    )


COMMANDS = {"c2-dims": cmd_c2_dims, "verify": cmd_verify, "zhu": cmd_zhu}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(ns)
    except UsageError as exc:
        parser.error(str(exc))
    if cfg.cache_dir:
        os.environ["SYMFER_CACHE"] = cfg.cache_dir
    t0 = time.perf_counter()
    try:
        rep = COMMANDS[ns.command](cfg)
    except UsageError as exc:
        print(f"symfer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except c2_poisson.ResourceLimit as exc:
        rep = Report(ns.command if ns.command != "verify" else cfg.suite, cfg.d)
        rep.inconclusive = True
        rep.notes.append(f"resource limit: {exc}")
    if not rep.elapsed_ms:
        rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    text = rep.dumps()
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
    else:
        print(text)
    print(rep.summary(), file=sys.stderr)
    return rep.exit_code()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
