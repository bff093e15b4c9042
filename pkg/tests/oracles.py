"""Reference implementations written independently of the package, used as
test oracles.  Nothing here imports minabc."""

from __future__ import annotations

import itertools
import math


def f(x: float, y: float) -> float:
    return math.sqrt((x + y - 2) / (x * y))


def abc(n: int, edges) -> float:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return sum(f(deg[u], deg[v]) for u, v in edges)


def _adj(n: int, edges) -> list[list[int]]:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def _centers(adj) -> list[int]:
    n = len(adj)
    if n <= 2:
        return list(range(n))
    deg = [len(a) for a in adj]
    layer = [v for v in range(n) if deg[v] == 1]
    left = n
    while left > 2:
        left -= len(layer)
        nxt = []
        for v in layer:
            for w in adj[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return layer


def _encode(adj, v: int, parent: int) -> str:
    return "(" + "".join(sorted(_encode(adj, w, v) for w in adj[v] if w != parent)) + ")"


def canon(n: int, edges) -> str:
    """Rooted-at-centre parenthesis code; equal iff isomorphic."""
    adj = _adj(n, edges)
    return min(_encode(adj, c, -1) for c in _centers(adj))


def free_trees_by_growth(n: int) -> list[list[tuple[int, int]]]:
    """All free trees of order n as edge lists: grow leaves, deduplicate by canon."""
    level = [[]]  # the single-vertex tree
    for m in range(2, n + 1):
        seen: dict[str, list] = {}
        for edges in level:
            for v in range(m - 1):
                cand = edges + [(v, m - 1)]
                seen.setdefault(canon(m, cand), cand)
        level = list(seen.values())
    return level


def prufer_trees(n: int):
    """Every labelled tree on n >= 2 vertices, via Pruefer sequences."""
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = min(v for v in range(n) if degree[v] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [w for w in range(n) if degree[w] == 1]
        edges.append((u, v))
        yield edges


def tree_degree_sequences(n: int) -> set[tuple[int, ...]]:
    """Nonincreasing sequences of n positive integers summing to 2(n-1)."""
    out = set()
    total = 2 * (n - 1)

    def rec(prefix, left, hi, slots):
        if slots == 0:
            if left == 0:
                out.add(tuple(prefix))
            return
        for d in range(min(hi, left - (slots - 1)), 0, -1):
            rec(prefix + [d], left - d, d, slots - 1)

    rec([], total, n - 1, n)
    return out
