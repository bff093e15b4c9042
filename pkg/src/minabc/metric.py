"""The edge function f and the atom-bond connectivity index."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .errors import DomainError
from .graph import Tree


def edge_f(x: float, y: float) -> float:
    """sqrt((x + y - 2) / (x * y)) for degrees x, y >= 1 (reals allowed)."""
    if x < 1 or y < 1:
        raise DomainError(f"edge_f needs both arguments >= 1, got ({x}, {y})")
    return math.sqrt((x + y - 2) / (x * y))


def edge_f_limit(y: float) -> float:
    """lim_{x -> inf} f(x, y) = 1 / sqrt(y)."""
    if y < 1:
        raise DomainError(f"edge_f needs y >= 1, got {y}")
    return 1.0 / math.sqrt(y)


def abc_index(t: Tree) -> float:
    """ABC index summed over the sorted edge list (bit-reproducible)."""
    deg = t.degrees
    total = 0.0
    for u, v in t.edges():
        total += edge_f(deg[u], deg[v])
    return total


def abc_from_parents(parents: Sequence[int], degrees: Sequence[int]) -> float:
    """Fast path used by the searches: ABC of a tree given as a parent array.

    Summation follows vertex order, which differs from abc_index only in the
    last bits; callers compare with a tolerance.
    """
    total = 0.0
    sqrt = math.sqrt
    for v, p in enumerate(parents):
        if p >= 0:
            a, b = degrees[v], degrees[p]
            total += sqrt((a + b - 2) / (a * b))
    return total


def degree_change_delta(changes: Iterable[tuple[Sequence[float], Sequence[float]]]) -> float:
    """Sum of -f(old) + f(new) over affected edges.

    Each entry is ((old_x, old_y), (new_x, new_y)).
    """
    total = 0.0
    for old, new in changes:
        total += -edge_f(*old) + edge_f(*new)
    return total
