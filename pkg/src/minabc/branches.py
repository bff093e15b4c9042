"""Structural census of a tree (pendant/internal paths, B_k and T_k branches)
and the theorem checker run on claimed minimal-ABC trees.

Conventions
-----------
* Path lengths count edges.  A pendant path runs from a vertex of degree > 2
  through degree-2 vertices to a leaf; an internal path joins two vertices of
  degree > 2 through at least one degree-2 vertex.
* Parent/child relations come from rooting the tree at a vertex of maximum
  degree (ties: smallest eccentricity, then smallest id), which is the root
  of the greedy tree for minimal trees.
* An *arm* is a non-root degree-2 vertex whose only child is a leaf.  A
  *long arm* is a non-root degree-2 vertex whose child is an arm.
* B_k (k >= 2): a non-root vertex of degree k + 1 whose children are all
  arms.  B_k*: the same with exactly one long arm among the children.
* B_1: an arm hanging from a vertex of degree >= 3 that is not a B_k root
  (B_1*: the same for a long arm).
* A k-terminal vertex has degree k >= 3 and carries a pendant path of length
  2 or 3; it roots a T_(k-1)-branch, which is proper when the vertex has a
  child of degree >= 3.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .graph import RootedView, Tree, rooted


def choose_root(t: Tree) -> int:
    if t.n == 1:
        return 0
    maxdeg = max(t.degrees)
    best, best_key = 0, None
    for v in range(t.n):
        if t.degree(v) != maxdeg:
            continue
        view = rooted(t, v)
        depth = [0] * t.n
        for w in view.order[1:]:
            depth[w] = depth[view.parent[w]] + 1
        key = (max(depth), v)
        if best_key is None or key < best_key:
            best, best_key = v, key
    return best


@dataclass
class BranchProfile:
    root: int
    pendant_paths: list[tuple[int, int]] = field(default_factory=list)
    internal_paths: list[tuple[tuple[int, int], int]] = field(default_factory=list)
    b_counts: dict[int, int] = field(default_factory=dict)
    b_star_counts: dict[int, int] = field(default_factory=dict)
    b_roots: dict[int, list[int]] = field(default_factory=dict)
    b_star_roots: dict[int, list[int]] = field(default_factory=dict)
    terminal_vertices: list[tuple[int, int]] = field(default_factory=list)
    proper_tk_roots: list[tuple[int, int]] = field(default_factory=list)
    # parent vertex -> {k: number of B_k children}, B_1 included
    children_bk: dict[int, dict[int, int]] = field(default_factory=dict)

    @property
    def b3_star(self) -> int:
        return self.b_star_counts.get(3, 0)

    def count(self, k: int, starred: bool = True) -> int:
        c = self.b_counts.get(k, 0)
        if starred:
            c += self.b_star_counts.get(k, 0)
        return c

    def to_dict(self) -> dict:
        d = asdict(self)
        d["b3_star"] = self.b3_star
        return d


def _walk(t: Tree, start: int, first: int) -> tuple[int, list[int]]:
    """Follow degree-2 vertices from start through first; return (end, interior)."""
    prev, cur = start, first
    interior = []
    while t.degree(cur) == 2:
        interior.append(cur)
        a, b = t.adjacency[cur]
        prev, cur = cur, (b if a == prev else a)
    return cur, interior


def b_kinds(root: int, kids: list[list[int]], deg: list[int]) -> dict[int, tuple[int, bool]]:
    """Map each B-branch root to (k, starred), given children lists and degrees."""

    def is_arm(v: int) -> bool:
        return v != root and deg[v] == 2 and deg[kids[v][0]] == 1

    def is_long_arm(v: int) -> bool:
        return v != root and deg[v] == 2 and is_arm(kids[v][0])

    kind: dict[int, tuple[int, bool]] = {}
    for x in range(len(deg)):
        if x == root or deg[x] < 3:
            continue
        ch = kids[x]
        arms = sum(1 for c in ch if is_arm(c))
        if arms == len(ch):
            kind[x] = (len(ch), False)
        elif arms == len(ch) - 1 and sum(1 for c in ch if is_long_arm(c)) == 1:
            kind[x] = (len(ch), True)
    for x in range(len(deg)):
        if deg[x] < 3 or x in kind:
            continue
        for c in kids[x]:
            if is_arm(c):
                kind[c] = (1, False)
            elif is_long_arm(c):
                kind[c] = (1, True)
    return kind


def analyze(t: Tree, root: int | None = None) -> BranchProfile:
    if root is None:
        root = choose_root(t)
    prof = BranchProfile(root=root)
    if t.n < 2 or max(t.degrees) <= 2:
        return prof

    for u in range(t.n):
        if t.degree(u) <= 2:
            continue
        for w in t.adjacency[u]:
            end, interior = _walk(t, u, w)
            if t.degree(end) == 1:
                prof.pendant_paths.append((u, len(interior) + 1))
            elif interior and u < end:
                prof.internal_paths.append(((u, end), len(interior)))
    prof.pendant_paths.sort()
    prof.internal_paths.sort()

    view = rooted(t, root)
    kids = view.children

    kind = b_kinds(root, kids, t.degrees)
    for x in sorted(kind):
        k, star = kind[x]
        counts, roots = (prof.b_star_counts, prof.b_star_roots) if star else (prof.b_counts, prof.b_roots)
        counts[k] = counts.get(k, 0) + 1
        roots.setdefault(k, []).append(x)
        p = view.parent[x]
        per = prof.children_bk.setdefault(p, {})
        per[k] = per.get(k, 0) + 1

    attach = {u for u, length in prof.pendant_paths if length in (2, 3)}
    for v in sorted(attach):
        prof.terminal_vertices.append((v, t.degree(v)))
        if any(t.degree(c) >= 3 for c in kids[v]):
            prof.proper_tk_roots.append((v, t.degree(v) - 1))
    return prof


# ----------------------------------------------------------- theorem checks


@dataclass
class Verdict:
    passed: bool
    asserted: bool = True
    witness: list = field(default_factory=list)
    note: str = ""


CHECKS = (
    "internal_paths_absent",
    "pendant_lengths_in_2_3",
    "at_most_one_length3",
    "no_bk_ge5",
    "b4_le_4",
    "b1_le_4",
    "b2_le_11",
    "per_parent_b2_le_6",
    "no_b1_with_b4_same_parent",
    "no_b2_with_b4_same_parent",
    "at_most_one_proper_tk",
    "conjecture_b1_le_3",
    "conjecture_b2_le_9",
)


@dataclass
class TheoremReport:
    n: int
    verdicts: dict[str, Verdict]

    @property
    def all_asserted_pass(self) -> bool:
        return all(v.passed for v in self.verdicts.values() if v.asserted)

    def failures(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if v.asserted and not v.passed]

    def to_dict(self) -> dict:
        return {"n": self.n, "verdicts": {k: asdict(v) for k, v in self.verdicts.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# The pendant-length theorems are stated for order >= 10.
PENDANT_MIN_ORDER = 10


def check_theorems(t: Tree, profile: BranchProfile | None = None) -> TheoremReport:
    prof = profile if profile is not None else analyze(t)
    v: dict[str, Verdict] = {}
    pure_path = t.n < 3 or max(t.degrees) <= 2
    note = "pure path: vacuous" if pure_path else ""

    bad = [list(ends) for ends, _ in prof.internal_paths]
    v["internal_paths_absent"] = Verdict(not bad, witness=bad, note=note)

    small = t.n < PENDANT_MIN_ORDER
    small_note = f"order < {PENDANT_MIN_ORDER}: not covered by the theorem" if small else note
    bad = [[u, length] for u, length in prof.pendant_paths if length not in (2, 3)]
    v["pendant_lengths_in_2_3"] = Verdict(small or not bad, witness=bad, note=small_note)
    bad = [[u, length] for u, length in prof.pendant_paths if length >= 3]
    v["at_most_one_length3"] = Verdict(small or len(bad) <= 1, witness=bad if len(bad) > 1 else [],
                                       note=small_note)

    big = sorted(x for k, xs in list(prof.b_roots.items()) + list(prof.b_star_roots.items())
                 if k >= 5 for x in xs)
    v["no_bk_ge5"] = Verdict(not big, witness=big, note=note)

    def roots_of(k: int) -> list[int]:
        return sorted(prof.b_roots.get(k, []) + prof.b_star_roots.get(k, []))

    for name, k, cap in (("b4_le_4", 4, 4), ("b1_le_4", 1, 4), ("b2_le_11", 2, 11)):
        rs = roots_of(k)
        v[name] = Verdict(len(rs) <= cap, witness=rs if len(rs) > cap else [], note=note)

    bad = [w for w, per in sorted(prof.children_bk.items())
           if w != prof.root and per.get(2, 0) > 6]
    v["per_parent_b2_le_6"] = Verdict(not bad, witness=bad, note=note)
    for name, k in (("no_b1_with_b4_same_parent", 1), ("no_b2_with_b4_same_parent", 2)):
        bad = [w for w, per in sorted(prof.children_bk.items()) if per.get(k) and per.get(4)]
        v[name] = Verdict(not bad, witness=bad, note=note)

    prop = [x for x, k in prof.proper_tk_roots if k >= 2]
    v["at_most_one_proper_tk"] = Verdict(len(prop) <= 1, witness=prop if len(prop) > 1 else [],
                                         note=note)

    b1, b2 = roots_of(1), roots_of(2)
    v["conjecture_b1_le_3"] = Verdict(len(b1) <= 3, asserted=False,
                                      witness=b1 if len(b1) > 3 else [], note="conjecture")
    v["conjecture_b2_le_9"] = Verdict(len(b2) <= 9, asserted=False,
                                      witness=b2 if len(b2) > 9 else [], note="conjecture")
    return TheoremReport(t.n, v)


def census_consistent(t: Tree, prof: BranchProfile) -> bool:
    """B_k roots have degree k + 1 and their branches fit inside the tree."""
    used = 0
    for k, xs in prof.b_roots.items():
        for x in xs:
            if k >= 2 and t.degree(x) != k + 1:
                return False
            used += 2 * k + 1 if k >= 2 else 2
    for k, xs in prof.b_star_roots.items():
        for x in xs:
            if k >= 2 and t.degree(x) != k + 1:
                return False
            used += 2 * k + 2 if k >= 2 else 3
    return used <= t.n


def rooted_view(t: Tree) -> RootedView:
    return rooted(t, choose_root(t))
