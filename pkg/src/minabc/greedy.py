"""Greedy trees, degree-sequence enumeration with theorem-backed pruning, and
random trees with a prescribed degree sequence."""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import InfeasibleSequence
from .graph import DegreeSequence, Tree, from_parents, validate_tree
from .metric import abc_from_parents


def _as_degrees(ds: DegreeSequence | Sequence[int]) -> list[int]:
    d = sorted(ds.degrees if isinstance(ds, DegreeSequence) else ds, reverse=True)
    if len(d) < 2 or min(d) < 1 or sum(d) != 2 * (len(d) - 1):
        raise InfeasibleSequence(f"not a tree degree sequence: {d}")
    return d


def greedy_parents(ds: DegreeSequence | Sequence[int]) -> tuple[list[int], list[int]]:
    """Parent array and degrees of the greedy tree.

    Vertex i carries the i-th largest degree. Vertices are expanded in
    breadth-first order, which on a nonincreasing sequence is also largest
    degree first, and each takes the next largest unused degrees as children.
    """
    d = _as_degrees(ds)
    parents = [-1] * len(d)
    nxt = 1
    for v, dv in enumerate(d):
        k = dv if v == 0 else dv - 1
        for c in range(nxt, nxt + k):
            parents[c] = v
        nxt += k
    return parents, d


def greedy_tree(ds: DegreeSequence | Sequence[int]) -> Tree:
    parents, _ = greedy_parents(ds)
    return from_parents(parents)


def greedy_abc(ds: DegreeSequence | Sequence[int]) -> float:
    parents, d = greedy_parents(ds)
    return abc_from_parents(parents, d)


def prufer_decode(seq: Sequence[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def random_tree_with_degrees(ds: DegreeSequence | Sequence[int], seed: int) -> Tree:
    """Uniform labeled tree in which vertex v has degree ds[v] (sorted)."""
    d = _as_degrees(ds)
    seq = [v for v, dv in enumerate(d) for _ in range(dv - 1)]
    random.Random(seed).shuffle(seq)
    return validate_tree(len(d), prufer_decode(seq, len(d)))


# ------------------------------------------------------- sequence filters

FILTER_NAMES = ("no-internal-deg2", "pendant-budget", "bk-caps")


@dataclass(frozen=True)
class SequenceFilter:
    """Opt-in pruning predicates, each backed by a theorem on minimal trees.

    no_internal_deg2: no internal paths and no pendant path longer than 3,
        so every degree-2 vertex sits on a pendant path: n2 <= 2 * n1.
    pendant_budget: every pendant path has length 2 or 3 and at most one has
        length 3: n1 <= n2 <= n1 + 1.
    bk_caps: the greedy tree (the best tree for the sequence) has no B_k with
        k >= 5 and at most four B_4, four B_1 and eleven B_2 branches.

    Predicates only apply from ``min_order`` on, the order from which the
    theorems are stated; pure paths (max degree 2) always pass.
    """

    no_internal_deg2: bool = False
    pendant_budget: bool = False
    bk_caps: bool = False
    min_order: int = 10

    @classmethod
    def none(cls) -> "SequenceFilter":
        return cls()

    @classmethod
    def all(cls) -> "SequenceFilter":
        return cls(True, True, True)

    @classmethod
    def parse(cls, spec: str) -> "SequenceFilter":
        spec = spec.strip().lower()
        if spec in ("", "none"):
            return cls.none()
        if spec == "all":
            return cls.all()
        names = {s.strip() for s in spec.split(",") if s.strip()}
        unknown = names - set(FILTER_NAMES)
        if unknown:
            raise ValueError(f"unknown filter(s) {sorted(unknown)}; choose from {FILTER_NAMES}")
        return cls("no-internal-deg2" in names, "pendant-budget" in names, "bk-caps" in names)

    @property
    def active(self) -> bool:
        return self.no_internal_deg2 or self.pendant_budget or self.bk_caps

    def names(self) -> list[str]:
        flags = (self.no_internal_deg2, self.pendant_budget, self.bk_caps)
        return [name for name, on in zip(FILTER_NAMES, flags) if on]

    def accepts_counts(self, n: int, n1: int, n2: int, maxdeg: int) -> bool:
        if n < self.min_order or maxdeg <= 2:
            return True
        if self.no_internal_deg2 and n2 > 2 * n1:
            return False
        if self.pendant_budget and not (n1 <= n2 <= n1 + 1):
            return False
        return True

    def accepts(self, ds: DegreeSequence | Sequence[int]) -> bool:
        d = list(ds.degrees if isinstance(ds, DegreeSequence) else ds)
        n = len(d)
        if not self.accepts_counts(n, d.count(1), d.count(2), max(d)):
            return False
        if self.bk_caps and n >= self.min_order and max(d) > 2:
            return greedy_respects_caps(d)
        return True


def greedy_respects_caps(d: Sequence[int]) -> bool:
    """B_k caps on the greedy tree, censused with the greedy root (vertex 0)."""
    from .branches import b_kinds

    parents, deg = greedy_parents(d)
    kids: list[list[int]] = [[] for _ in deg]
    for v, p in enumerate(parents):
        if p >= 0:
            kids[p].append(v)
    counts: dict[int, int] = {}
    for k, _ in b_kinds(0, kids, deg).values():
        counts[k] = counts.get(k, 0) + 1
    if any(k >= 5 for k in counts):
        return False
    return counts.get(4, 0) <= 4 and counts.get(1, 0) <= 4 and counts.get(2, 0) <= 11


# ---------------------------------------------------- sequence enumeration


def _sequences(n: int, flt: SequenceFilter, largest: int | None,
               after: tuple[int, ...] | None) -> Iterator[tuple[int, ...]]:
    """Depth-first walk over nonincreasing prefixes of parts >= 3.

    Children are visited with decreasing part value and the unique tail of
    2s and 1s comes last, which yields lexicographically decreasing output.
    ``bounded`` marks prefixes equal to the head of ``after``.
    """
    total = 2 * (n - 1)
    prune = flt.pendant_budget and n >= flt.min_order
    prefix: list[int] = []

    def tail(k: int, s: int) -> tuple[int, ...] | None:
        c, r = n - k, total - s
        n2, n1 = r - c, 2 * c - r
        if n2 < 0 or n1 < 0:
            return None
        return tuple(prefix) + (2,) * n2 + (1,) * n1

    def rec(k: int, s: int, excess: int, hi: int, bounded: bool) -> Iterator[tuple[int, ...]]:
        c = n - k
        top = min(hi, total - s - (c - 1))
        if k == 0 and largest is not None:
            parts = [largest] if 3 <= largest <= top else []
        else:
            parts = range(top, 2, -1)
        for p in parts:
            if total - s - p > p * (c - 1):
                break
            # pendant budget: n >= parts>=3 + n1 + n2 >= (k+1) + 2*(2 + excess)
            if prune and (k + 1) + 4 + 2 * (excess + p - 2) > n:
                continue
            sub = bounded
            if bounded:
                ref = after[k] if k < len(after) else 0
                if p > ref:
                    continue
                sub = p == ref
            prefix.append(p)
            yield from rec(k + 1, s + p, excess + p - 2, p, sub)
            prefix.pop()
        seq = tail(k, s)
        if seq is None:
            return
        if k == 0 and largest is not None and seq[0] != largest:
            return
        if bounded and not seq < after:
            return
        yield seq

    yield from rec(0, 0, 0, total, after is not None)


def enumerate_degree_sequences(
    n: int,
    flt: SequenceFilter | None = None,
    largest: int | None = None,
    after: Sequence[int] | None = None,
) -> Iterator[DegreeSequence]:
    """Tree degree sequences of order n in lexicographically decreasing order.

    ``largest`` restricts the stream to one shard (sequences whose maximum
    degree equals it); ``after`` resumes strictly after a previously emitted
    sequence.
    """
    if n < 2:
        raise ValueError("degree sequences need n >= 2")
    flt = flt or SequenceFilter.none()
    aft = tuple(after) if after is not None else None
    for seq in _sequences(n, flt, largest, aft):
        if flt.active and not flt.accepts(seq):
            continue
        yield DegreeSequence(seq)


def shard_keys(n: int) -> list[int]:
    """Possible maximum degrees, i.e. the shard keys, in stream order."""
    return list(range(n - 1, 0, -1)) if n > 2 else [1]


def count_partitions(total: int, parts: int) -> int:
    """Partitions of total into exactly `parts` positive parts (oracle)."""
    table = [[0] * (parts + 1) for _ in range(total + 1)]
    table[0][0] = 1
    for s in range(1, total + 1):
        for k in range(1, min(s, parts) + 1):
            table[s][k] = table[s - 1][k - 1] + table[s - k][k]
    return table[total][parts]


def checkpoint(n: int, last: DegreeSequence | Sequence[int] | None) -> str:
    d = None if last is None else list(last.degrees if isinstance(last, DegreeSequence) else last)
    return json.dumps({"n": n, "last_emitted": d})


def resume(text: str, flt: SequenceFilter | None = None) -> Iterator[DegreeSequence]:
    obj = json.loads(text)
    return enumerate_degree_sequences(int(obj["n"]), flt, after=obj["last_emitted"])
