"""Command-line entry point: ``minabc {search,analyze,bounds,verify}``.

Exit codes: 0 success, 1 usage or input error, 2 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from dataclasses import asdict, dataclass

from . import bounds
from .branches import CHECKS, analyze, check_theorems
from .errors import MinAbcError, StoreCorrupt, UnknownExpression
from .graph import decode_graph6, to_dot
from .greedy import SequenceFilter
from .search import (
    TIE_TOL,
    SearchRecord,
    agreement,
    export_csv,
    greedy_sequence_min,
    load_store,
    sweep,
    witness_violations,
)

OK, INPUT_ERROR, MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; this CLI reserves 2 for mismatches."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(INPUT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    workers: int = 1
    store: str | None = None
    seed: int = 0
    tol: float = TIE_TOL
    as_json: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.7f}"


def _orders(args) -> tuple[int, int]:
    if args.n is not None:
        if args.n_from is not None or args.n_to is not None:
            raise UsageError("use either --n or --from/--to")
        return args.n, args.n
    if args.n_from is None or args.n_to is None:
        raise UsageError("give --n or both --from and --to")
    if args.n_from > args.n_to:
        raise UsageError(f"empty range {args.n_from}..{args.n_to}")
    return args.n_from, args.n_to


def _filters(spec: str) -> SequenceFilter:
    try:
        return SequenceFilter.parse(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _record_dict(rec: SearchRecord) -> dict:
    d = asdict(rec)
    d.pop("wall_time")  # keeps reruns byte-identical
    return d


def _compact(ds: list[int]) -> str:
    out, i = [], 0
    while i < len(ds):
        j = i
        while j < len(ds) and ds[j] == ds[i]:
            j += 1
        out.append(f"{ds[i]}^{j - i}" if j - i > 1 else str(ds[i]))
        i = j
    return " ".join(out)


# ------------------------------------------------------------------ search


def cmd_search(args, cfg: RunConfig) -> int:
    lo, hi = _orders(args)
    records = sweep(lo, hi, args.method, _filters(args.filters), store=cfg.store,
                    force=args.force, workers=cfg.workers)
    disagree = agreement(records, cfg.tol)
    broken = witness_violations(records, cfg.tol)
    if cfg.as_json:
        print(json.dumps({"records": [_record_dict(r) for r in records],
                          "disagreements": disagree, "witness_mismatches": broken}, sort_keys=True))
    else:
        print(f"{'n':>4}  {'method':<16}  {'abc':>12}  {'ties':>4}  degree sequence")
        by_n: dict[int, list[SearchRecord]] = {}
        for r in records:
            by_n.setdefault(r.n, []).append(r)
        for n, group in by_n.items():
            # agreeing methods share a row; a disagreement shows every record
            rows = [group] if n not in disagree else [[r] for r in group]
            for g in rows:
                r = g[0]
                methods = "+".join(x.method for x in g)
                print(f"{n:>4}  {methods:<16}  {_fmt(r.abc):>12}  {r.ties:>4}  "
                      f"{_compact(r.degree_sequence)}")
        if args.csv:
            with open(args.csv, "w", encoding="utf-8") as fh:
                fh.write(export_csv(records))
        for n in disagree:
            print(f"MISMATCH n={n}: methods disagree", file=sys.stderr)
        for n in broken:
            print(f"MISMATCH n={n}: witness does not reproduce its abc", file=sys.stderr)
    return MISMATCH if disagree or broken else OK


# ----------------------------------------------------------------- analyze


def _read_inputs(source: str) -> list[str]:
    if os.path.isfile(source):
        with open(source, encoding="ascii") as fh:
            return [ln.strip() for ln in fh if ln.strip()]
    return [source.strip()]


def cmd_analyze(args, cfg: RunConfig) -> int:
    for text in _read_inputs(args.input):
        t = decode_graph6(text)
        if args.dot:
            print(to_dot(t), end="")
            continue
        prof = analyze(t)
        report = check_theorems(t, prof)
        print(json.dumps({"graph6": text, "profile": prof.to_dict(), "theorems": report.to_dict(),
                          "all_asserted_pass": report.all_asserted_pass}, sort_keys=True))
    return OK


# ------------------------------------------------------------------ bounds

THRESHOLD_TARGETS = (
    ("change-20-20", "du", 14),
    ("change-70", "du", 12),
    ("change-20-2", "du", 9),
    ("change-70-2", "du", 7),
)


def cmd_bounds(args, cfg: RunConfig) -> int:
    if args.action == "list":
        rows = [{"id": e.id, "domain": e.domain(), "formula": e.formula, "note": e.note}
                for e in bounds.REGISTRY.values()]
        if cfg.as_json:
            print(json.dumps(rows, sort_keys=True))
        else:
            for r in rows:
                print(f"{r['id']:<28} {r['domain']}")
        return OK

    if args.action == "eval":
        if not args.rest:
            raise UsageError("bounds eval needs an expression id")
        expr_id, *assignments = args.rest
        try:
            params = bounds.parse_assignments(assignments)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        value = bounds.evaluate(expr_id, params)
        print(json.dumps({"id": expr_id, "params": params, "value": value}) if cfg.as_json
              else _fmt(value))
        return OK

    if args.action == "golden":
        rows, elapsed = bounds.golden_suite(args.tol_golden)
        if args.csv:
            with open(args.csv, "w", encoding="utf-8") as fh:
                fh.write(bounds.golden_csv(rows))
        failed = [r for r in rows if not r.passed]
        if cfg.as_json:
            print(json.dumps({"rows": [asdict(r) for r in rows], "failed": len(failed)}, sort_keys=True))
        else:
            for r in rows:
                mark = "pass" if r.passed else "FAIL"
                print(f"{mark}  {r.id:<26} {r.params:<28} expected {_fmt(r.expected)}  "
                      f"actual {_fmt(r.actual)}")
            print(f"{len(rows) - len(failed)}/{len(rows)} rows within {args.tol_golden:g}")
        print(f"golden suite time: {elapsed:.3f}s", file=sys.stderr)
        return MISMATCH if failed else OK

    # thresholds
    if args.rest:
        expr_id, param, *assignments = args.rest + [""] * (2 - len(args.rest[:2]))
        if not param:
            raise UsageError("bounds thresholds needs ID PARAM [k=v ...]")
        fixed = bounds.parse_assignments([a for a in assignments if a])
        targets = [(expr_id, param, None)]
    else:
        fixed, targets = {}, THRESHOLD_TARGETS
    results, bad = [], False
    for expr_id, param, expected in targets:
        mins = {p.name: p.minimum for p in bounds.get(expr_id).params}
        if param not in mins:
            raise UsageError(f"{expr_id} has no parameter {param!r}")
        found = bounds.smallest_negative_threshold(expr_id, param, range(max(int(mins[param]), 3), 201), fixed)
        ok = expected is None or found == expected
        bad |= not ok
        results.append({"id": expr_id, "param": param, "threshold": found, "expected": expected, "ok": ok})
    if cfg.as_json:
        print(json.dumps(results, sort_keys=True))
    else:
        for r in results:
            exp = "" if r["expected"] is None else f"  expected {r['expected']}  {'ok' if r['ok'] else 'MISMATCH'}"
            print(f"{r['id']:<16} {r['param']}={r['threshold']}{exp}")
    return MISMATCH if bad else OK


# ------------------------------------------------------------------ verify


def cmd_verify(args, cfg: RunConfig) -> int:
    lo, hi = _orders(args)
    flt = _filters(args.filters)
    try:
        stored = sweep(lo, hi, args.method, flt, store=cfg.store, workers=cfg.workers)
        if cfg.store:
            # every stored record in range is checked, whatever method wrote it
            seen = {r.key for r in stored}
            stored += [r for r in load_store(cfg.store) if lo <= r.n <= hi and r.key not in seen]
            stored.sort(key=lambda r: (r.n, r.method))
    except StoreCorrupt as exc:
        print(f"MISMATCH: {exc}", file=sys.stderr)
        return MISMATCH
    problems: list[str] = []
    problems += [f"n={n}: stored witness does not reproduce its abc" for n in witness_violations(stored, cfg.tol)]
    problems += [f"n={n}: methods disagree" for n in agreement(stored, cfg.tol)]
    matrix = []
    for n in range(lo, hi + 1):
        fresh = greedy_sequence_min(n, SequenceFilter.none() if n <= 40 else flt, cfg.workers)
        for rec in (r for r in stored if r.n == n):
            if abs(rec.abc - fresh.abc) > cfg.tol:
                problems.append(f"n={n}: stored {rec.method} minimum {rec.abc!r} differs from "
                                f"recomputed {fresh.abc!r}")
            report = check_theorems(rec.tree())
            problems += [f"n={n}: {rec.method} witness fails {c}" for c in report.failures()]
            matrix.append((n, rec.method, report))
    samples = args.transform_samples
    if samples:
        problems += _transform_spot_check(samples, cfg.seed, cfg.tol)
    if cfg.as_json:
        print(json.dumps({"rows": [{"n": n, "method": m, **r.to_dict()} for n, m, r in matrix],
                          "problems": problems}, sort_keys=True))
    else:
        short = {c: c[:10] for c in CHECKS}
        print(f"{'n':>4} {'method':<10} " + " ".join(f"{short[c]:<10}" for c in CHECKS))
        for n, m, rep in matrix:
            cells = []
            for c in CHECKS:
                v = rep.verdicts[c]
                cell = ("pass" if v.passed else "FAIL") if v.asserted else ("yes" if v.passed else "no")
                if v.passed and v.note and v.asserted:
                    cell += "*"
                cells.append(f"{cell:<10}")
            print(f"{n:>4} {m:<10} " + " ".join(cells))
        print("* pass with note (vacuous or below the theorem's order); conjecture columns are informational")
        for p in problems:
            print(f"MISMATCH {p}", file=sys.stderr)
    return MISMATCH if problems else OK


def _transform_spot_check(samples: int, seed: int, tol: float) -> list[str]:
    from .metric import abc_index
    from .transforms import RULES, apply_transformation, sample_instance

    rng = random.Random(seed)
    bad = []
    for name in RULES:
        for _ in range(samples):
            t, spec = sample_instance(name, rng)
            after, predicted = apply_transformation(t, spec)
            err = abs(predicted - (abc_index(after) - abc_index(t)))
            if err > max(tol, 1e-12):
                bad.append(f"{name}: predicted change off by {err:.3e}")
    return bad


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--store", help="JSON-lines result store")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=TIE_TOL, help="agreement tolerance")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    orders = _Parser(add_help=False)
    orders.add_argument("--n", type=int)
    orders.add_argument("--from", dest="n_from", type=int)
    orders.add_argument("--to", dest="n_to", type=int)
    orders.add_argument("--method", choices=("brute", "greedy-seq", "both"), default="greedy-seq")
    orders.add_argument("--filters", default="none", help="none, all, or a comma list")

    p = _Parser(prog="minabc", description="Minimal-ABC tree search and analysis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("search", parents=[common, orders], help="minimum ABC per order")
    s.add_argument("--force", action="store_true", help="recompute orders already stored")
    s.add_argument("--csv", help="also write n, abc, tree_g6, method as CSV")

    a = sub.add_parser("analyze", parents=[common], help="branch census and theorem checks")
    a.add_argument("input", help="graph6 string or a file with one graph6 per line")
    a.add_argument("--dot", action="store_true", help="print Graphviz DOT instead")

    b = sub.add_parser("bounds", parents=[common], help="bound catalogue")
    b.add_argument("action", choices=("list", "eval", "golden", "thresholds"))
    b.add_argument("rest", nargs="*", help="ID [k=v ...] for eval; ID PARAM [k=v ...] for thresholds")
    b.add_argument("--csv", help="golden: write the comparison CSV here")
    b.add_argument("--tol-golden", type=float, default=bounds.GOLDEN_TOL)

    v = sub.add_parser("verify", parents=[common, orders], help="recompute minima and check theorems")
    v.add_argument("--transform-samples", type=int, default=0,
                   help="also spot-check this many random instances per transformation")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.workers, args.store, args.seed, args.tol, args.json)
        handler = {"search": cmd_search, "analyze": cmd_analyze,
                   "bounds": cmd_bounds, "verify": cmd_verify}[args.command]
        return handler(args, cfg)
    except UnknownExpression as exc:
        print(f"minabc: UnknownExpression: {exc.args[0]}", file=sys.stderr)
        return INPUT_ERROR
    except (UsageError, MinAbcError, ValueError, OSError) as exc:
        print(f"minabc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
