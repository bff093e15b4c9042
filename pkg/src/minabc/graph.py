"""Tree and degree-sequence types, validation, graph6, canonical forms and export.

Trees are immutable; vertex ids are dense 0-based integers and every
adjacency list is kept sorted so that all derived output is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    CycleDetected,
    Disconnected,
    DuplicateEdge,
    MalformedGraph6,
    NotATree,
    SelfLoop,
    TreeError,
)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Tree:
    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def edges(self) -> list[Edge]:
        """Edges as (u, v) with u < v, sorted."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def leaves(self) -> list[int]:
        return [v for v in range(self.n) if len(self.adjacency[v]) == 1]

    def relabel(self, perm: Sequence[int]) -> "Tree":
        """Tree with vertex v renamed to perm[v]."""
        return from_edges(self.n, [(perm[u], perm[v]) for u, v in self.edges()])

    def __repr__(self) -> str:
        return f"Tree(n={self.n}, edges={self.edges()})"


@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(sorted(self.degrees, reverse=True)))

    @property
    def n(self) -> int:
        return len(self.degrees)

    def is_feasible(self) -> bool:
        d = self.degrees
        if not d or min(d) < 1:
            return False
        if len(d) == 1:
            return d == (0,)
        return sum(d) == 2 * (len(d) - 1)

    def __iter__(self):
        return iter(self.degrees)

    def __len__(self) -> int:
        return len(self.degrees)

    def as_list(self) -> list[int]:
        return list(self.degrees)


@dataclass
class RootedView:
    tree: Tree
    root: int
    parent: list[int]  # parent[root] == -1
    children: list[list[int]] = field(repr=False)
    order: list[int] = field(repr=False)  # BFS order from the root

    def depth_first_postorder(self) -> list[int]:
        return self.order[::-1]


def validate_tree(n: int, edges: Iterable[Sequence[int]]) -> Tree:
    """Check a candidate edge list and return the corresponding Tree.

    Raises SelfLoop, DuplicateEdge, CycleDetected or Disconnected naming the
    violated invariant.
    """
    if n < 1:
        raise TreeError(f"vertex count must be >= 1, got {n}")
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    seen: set[Edge] = set()
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise TreeError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)
        ru, rv = find(u), find(v)
        if ru == rv:
            raise CycleDetected(f"edge {key} closes a cycle")
        parent[ru] = rv
        adj[u].append(v)
        adj[v].append(u)
    if len(seen) != n - 1:
        raise Disconnected(f"{n - len(seen)} components: {len(seen)} edges on {n} vertices")
    return Tree(n, tuple(tuple(sorted(a)) for a in adj))


def from_edges(n: int, edges: Iterable[Sequence[int]]) -> Tree:
    return validate_tree(n, edges)


def from_parents(parents: Sequence[int]) -> Tree:
    """Tree from a parent array where the root has parent -1."""
    n = len(parents)
    return validate_tree(n, [(v, p) for v, p in enumerate(parents) if p >= 0])


def path_graph(n: int) -> Tree:
    return validate_tree(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(n: int) -> Tree:
    return validate_tree(n, [(0, i) for i in range(1, n)])


def degree_sequence(t: Tree) -> DegreeSequence:
    return DegreeSequence(tuple(t.degrees))


def rooted(t: Tree, root: int) -> RootedView:
    parent = [-1] * t.n
    children: list[list[int]] = [[] for _ in range(t.n)]
    order = [root]
    seen = [False] * t.n
    seen[root] = True
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for w in t.adjacency[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                children[v].append(w)
                order.append(w)
    return RootedView(t, root, parent, children, order)


# ---------------------------------------------------------------- graph6


def _encode_n(n: int) -> bytes:
    if n <= 62:
        return bytes([n + 63])
    if n <= 258047:
        return b"~" + bytes([((n >> s) & 63) + 63 for s in (12, 6, 0)])
    return b"~~" + bytes([((n >> s) & 63) + 63 for s in (30, 24, 18, 12, 6, 0)])


def encode_graph6(t: Tree) -> bytes:
    """graph6 bytes (no trailing newline, no ``>>graph6<<`` header)."""
    n = t.n
    bits = bytearray()
    for j in range(1, n):
        nbrs = t.adjacency[j]
        for i in range(j):
            bits.append(1 if i in nbrs else 0)
    bits.extend([0] * (-len(bits) % 6))
    body = bytes(
        63 + ((bits[k] << 5) | (bits[k + 1] << 4) | (bits[k + 2] << 3)
              | (bits[k + 3] << 2) | (bits[k + 4] << 1) | bits[k + 5])
        for k in range(0, len(bits), 6)
    )
    return _encode_n(n) + body


def decode_graph6(s: bytes | str) -> Tree:
    if isinstance(s, str):
        s = s.encode("ascii")
    s = s.strip()
    if s.startswith(b">>graph6<<"):
        s = s[10:]
    if not s:
        raise MalformedGraph6("empty graph6 string")
    if any(c < 63 or c > 126 for c in s):
        raise MalformedGraph6("graph6 bytes must lie in 63..126")
    if s[0] != 126:
        n, body = s[0] - 63, s[1:]
    elif len(s) >= 2 and s[1] == 126:
        if len(s) < 8:
            raise MalformedGraph6("truncated 8-byte size header")
        n = 0
        for c in s[2:8]:
            n = (n << 6) | (c - 63)
        body = s[8:]
    else:
        if len(s) < 4:
            raise MalformedGraph6("truncated 4-byte size header")
        n = 0
        for c in s[1:4]:
            n = (n << 6) | (c - 63)
        body = s[4:]
    nbits = n * (n - 1) // 2
    if len(body) != (nbits + 5) // 6:
        raise MalformedGraph6(f"expected {(nbits + 5) // 6} data bytes for n={n}, got {len(body)}")
    if n == 0:
        raise NotATree("graph6 encodes the empty graph")
    edges = []
    k = 0
    for j in range(1, n):
        for i in range(j):
            c = body[k // 6] - 63
            if (c >> (5 - k % 6)) & 1:
                edges.append((i, j))
            k += 1
    try:
        return validate_tree(n, edges)
    except TreeError as exc:
        raise NotATree(str(exc)) from exc


# ------------------------------------------------------ canonical forms


def centroids(t: Tree) -> list[int]:
    """The one or two centroid vertices, ascending."""
    if t.n == 1:
        return [0]
    view = rooted(t, 0)
    size = [1] * t.n
    for v in reversed(view.order):
        p = view.parent[v]
        if p >= 0:
            size[p] += size[v]
    best, found = t.n, []
    for v in range(t.n):
        heaviest = t.n - size[v]
        for c in view.children[v]:
            heaviest = max(heaviest, size[c])
        if heaviest < best:
            best, found = heaviest, [v]
        elif heaviest == best:
            found.append(v)
    return sorted(found)


def _ahu(t: Tree, root: int) -> tuple[bytes, list[int]]:
    """AHU string of t rooted at root, plus the canonical vertex order."""
    view = rooted(t, root)
    code: list[bytes] = [b""] * t.n
    kids_sorted: list[list[int]] = [[] for _ in range(t.n)]
    for v in reversed(view.order):
        kids = sorted(view.children[v], key=lambda c: code[c])
        kids_sorted[v] = kids
        code[v] = b"(" + b"".join(code[c] for c in kids) + b")"
    order = []
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(kids_sorted[v]))
    return code[root], order


def _canonical(t: Tree) -> tuple[bytes, list[int]]:
    best = None
    for c in centroids(t):
        cand = _ahu(t, c)
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def canonical_form(t: Tree) -> bytes:
    """Isomorphism-complete invariant: equal iff the trees are isomorphic."""
    return _canonical(t)[0]


def canonical_relabel(t: Tree) -> Tree:
    """Isomorphic copy of t whose labeling depends only on its isomorphism class."""
    _, order = _canonical(t)
    perm = [0] * t.n
    for new, old in enumerate(order):
        perm[old] = new
    return t.relabel(perm)


def canonical_graph6(t: Tree) -> bytes:
    return encode_graph6(canonical_relabel(t))


# ---------------------------------------------------------------- export


def to_dot(t: Tree, name: str = "T") -> str:
    lines = [f"graph {name} {{"]
    lines += [f"  {v};" for v in range(t.n) if not t.adjacency[v]]
    lines += [f"  {u} -- {v};" for u, v in t.edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(t: Tree) -> str:
    return json.dumps({"n": t.n, "edges": [list(e) for e in t.edges()]})


def from_json(text: str) -> Tree:
    obj = json.loads(text)
    return validate_tree(int(obj["n"]), obj["edges"])
