"""Minimal-ABC searches per order, the JSON-lines result store and the
consistency checks run over stored results."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .enumeration import DEFAULT_CAP, _check_order, level_sequences, parents_from_levels
from .errors import StoreCorrupt
from .graph import Tree, canonical_graph6, decode_graph6, from_parents, validate_tree
from .greedy import (
    SequenceFilter,
    enumerate_degree_sequences,
    greedy_abc,
    greedy_tree,
    shard_keys,
)
from .metric import abc_from_parents, abc_index

SCHEMA_VERSION = 1
TIE_TOL = 1e-12
METHODS = ("brute", "greedy-seq")


@dataclass
class SearchRecord:
    n: int
    abc: float
    tree_g6: str
    degree_sequence: list[int]
    method: str
    wall_time: float
    ties: int
    filters: list[str] = field(default_factory=list)
    schema: int = SCHEMA_VERSION

    @property
    def key(self) -> tuple[int, str, tuple[str, ...]]:
        return (self.n, self.method, tuple(self.filters))

    def tree(self) -> Tree:
        return decode_graph6(self.tree_g6)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SearchRecord":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StoreCorrupt(f"unparseable store line: {exc}") from exc
        return cls.from_dict(obj)

    @classmethod
    def from_dict(cls, obj: dict) -> "SearchRecord":
        expected = {f for f in cls.__dataclass_fields__}
        if not isinstance(obj, dict) or set(obj) != expected:
            raise StoreCorrupt(f"store record fields {sorted(obj) if isinstance(obj, dict) else obj!r}"
                               f" differ from {sorted(expected)}")
        if obj["schema"] != SCHEMA_VERSION:
            raise StoreCorrupt(f"unsupported schema version {obj['schema']!r}")
        types = {"n": int, "abc": (int, float), "tree_g6": str, "degree_sequence": list,
                 "method": str, "wall_time": (int, float), "ties": int, "filters": list}
        for name, ty in types.items():
            if not isinstance(obj[name], ty) or isinstance(obj[name], bool):
                raise StoreCorrupt(f"field {name!r} has the wrong type")
        if obj["method"] not in METHODS:
            raise StoreCorrupt(f"unknown method {obj['method']!r}")
        return cls(**obj)


def _record(n: int, method: str, witness: Tree, ties: int, started: float,
            flt: SequenceFilter | None = None) -> SearchRecord:
    canon = decode_graph6(canonical_graph6(witness))
    return SearchRecord(
        n=n,
        abc=abc_index(canon),
        tree_g6=canonical_graph6(witness).decode("ascii"),
        degree_sequence=sorted(canon.degrees, reverse=True),
        method=method,
        wall_time=round(time.perf_counter() - started, 6),
        ties=ties,
        filters=flt.names() if flt is not None else [],
    )


class _MinFold:
    """Running minimum that keeps every candidate within TIE_TOL of it."""

    def __init__(self):
        self.best = math.inf
        self.items: list = []

    def add(self, value: float, item) -> None:
        if value < self.best - TIE_TOL:
            self.best = value
            self.items = [(value, item)]
        elif value <= self.best + TIE_TOL:
            self.items.append((value, item))
            if value < self.best:
                self.best = value
                self.items = [(v, i) for v, i in self.items if v <= value + TIE_TOL]

    def merge(self, best: float, items: Iterable) -> None:
        for value, item in items:
            self.add(value, item)


def _pick(trees: Iterable[Tree]) -> tuple[Tree, int]:
    """Witness with the least canonical graph6, and the count of distinct classes."""
    keyed = {canonical_graph6(t): t for t in trees}
    smallest = min(keyed)
    return keyed[smallest], len(keyed)


def brute_force_min(n: int, cap: int = DEFAULT_CAP) -> SearchRecord:
    """Exhaustive minimum over all free trees of order n."""
    _check_order(n, cap)
    started = time.perf_counter()
    fold = _MinFold()
    for seq in level_sequences(n, cap):
        parents = parents_from_levels(seq)
        deg = [1 if p >= 0 else 0 for p in parents]
        for p in parents:
            if p >= 0:
                deg[p] += 1
        fold.add(abc_from_parents(parents, deg), parents)
    witness, ties = _pick(from_parents(p) for _, p in fold.items)
    return _record(n, "brute", witness, ties, started)


def _shard_min(args: tuple[int, SequenceFilter, int | None]) -> tuple[float, list]:
    n, flt, largest = args
    fold = _MinFold()
    for ds in enumerate_degree_sequences(n, flt, largest=largest):
        fold.add(greedy_abc(ds), ds.degrees)
    return fold.best, fold.items


def greedy_sequence_min(n: int, flt: SequenceFilter | None = None, workers: int = 1) -> SearchRecord:
    """Minimum of the greedy-tree ABC over the (filtered) degree sequences of order n.

    With workers > 1 the sequences are sharded by maximum degree and the
    shard results are folded in shard order, so the outcome never depends on
    scheduling.
    """
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    flt = flt or SequenceFilter.none()
    started = time.perf_counter()
    if n == 1:
        return _record(1, "greedy-seq", validate_tree(1, []), 1, started, flt)
    fold = _MinFold()
    if workers > 1:
        jobs = [(n, flt, k) for k in shard_keys(n)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for best, items in pool.map(_shard_min, jobs):
                fold.merge(best, items)
    else:
        fold.merge(*_shard_min((n, flt, None)))
    witness, ties = _pick(greedy_tree(d) for _, d in fold.items)
    return _record(n, "greedy-seq", witness, ties, started, flt)


# ------------------------------------------------------------ result store


def load_store(path: str | os.PathLike) -> list[SearchRecord]:
    if not os.path.exists(path):
        return []
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = SearchRecord.from_json(line)
                t = rec.tree()
            except StoreCorrupt as exc:
                raise StoreCorrupt(f"{path}:{lineno}: {exc}") from exc
            except Exception as exc:  # malformed graph6 and friends
                raise StoreCorrupt(f"{path}:{lineno}: bad witness: {exc}") from exc
            if t.n != rec.n or sorted(t.degrees, reverse=True) != rec.degree_sequence:
                raise StoreCorrupt(f"{path}:{lineno}: witness does not match n/degree_sequence")
            out.append(rec)
    return out


def _write_store(path: str | os.PathLike, records: Sequence[SearchRecord]) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
    os.replace(tmp, path)


def sweep(
    n_from: int,
    n_to: int,
    method: str = "brute",
    flt: SequenceFilter | None = None,
    store: str | os.PathLike | None = None,
    force: bool = False,
    workers: int = 1,
    cap: int = DEFAULT_CAP,
) -> list[SearchRecord]:
    """One record per order and method; stored results are reused unless forced.

    ``method`` is "brute", "greedy-seq" or "both". Brute-force records are
    stored without filters, greedy-seq records carry the filter names.
    """
    if n_from > n_to:
        raise ValueError(f"empty range {n_from}..{n_to}")
    methods = METHODS if method == "both" else (method,)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    flt = flt or SequenceFilter.none()
    if "brute" in methods:
        _check_order(n_to, cap)
    existing = load_store(store) if store is not None else []
    index = {rec.key: i for i, rec in enumerate(existing)}
    out, fresh, replaced = [], [], False
    for n in range(n_from, n_to + 1):
        for m in methods:
            key = (n, m, tuple(flt.names()) if m == "greedy-seq" else ())
            if key in index and not force:
                out.append(existing[index[key]])
                continue
            rec = brute_force_min(n, cap) if m == "brute" else greedy_sequence_min(n, flt, workers)
            if key in index:
                existing[index[key]] = rec
                replaced = True
            else:
                index[key] = len(existing)
                existing.append(rec)
                fresh.append(rec)
            out.append(rec)
    if store is not None:
        if replaced:
            _write_store(store, existing)
        elif fresh:
            with open(store, "a", encoding="utf-8") as fh:
                for rec in fresh:
                    fh.write(rec.to_json() + "\n")
    return out


def export_csv(records: Iterable[SearchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "abc", "tree_g6", "method"])
    for rec in records:
        w.writerow([rec.n, repr(rec.abc), rec.tree_g6, rec.method])
    return buf.getvalue()


# -------------------------------------------------------------- checks


def agreement(records: Iterable[SearchRecord], tol: float = TIE_TOL) -> list[int]:
    """Orders where brute and greedy-seq records disagree in abc."""
    by_n: dict[int, list[float]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec.abc)
    return sorted(n for n, vals in by_n.items() if max(vals) - min(vals) > tol)


def leaf_extension_bound(t: Tree) -> float:
    """Least ABC over the trees obtained by hanging one new leaf on t."""
    best = math.inf
    for v in range(t.n):
        edges = t.edges() + [(v, t.n)]
        best = min(best, abc_index(validate_tree(t.n + 1, edges)))
    return best


def monotone_violations(records: Iterable[SearchRecord], tol: float = TIE_TOL) -> list[tuple[int, str]]:
    """Check min(n) <= min(n+1) <= best leaf extension of the order-n witness."""
    best: dict[int, SearchRecord] = {}
    for rec in records:
        if rec.n not in best or rec.abc < best[rec.n].abc:
            best[rec.n] = rec
    bad = []
    for n in sorted(best):
        if n + 1 not in best:
            continue
        lo, hi = best[n], best[n + 1]
        if lo.abc > hi.abc + tol:
            bad.append((n, f"min({n})={lo.abc} exceeds min({n + 1})={hi.abc}"))
        bound = leaf_extension_bound(lo.tree())
        if hi.abc > bound + tol:
            bad.append((n, f"min({n + 1})={hi.abc} exceeds leaf-extension bound {bound}"))
    return bad


def witness_violations(records: Iterable[SearchRecord], tol: float = TIE_TOL) -> list[int]:
    """Orders whose stored witness does not reproduce the stored abc."""
    return sorted({rec.n for rec in records if abs(abc_index(rec.tree()) - rec.abc) > tol})
