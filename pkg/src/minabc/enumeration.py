"""Exhaustive generation of non-isomorphic free trees.

Uses the constant-amortized-time successor on canonical level sequences of
Wright, Richmond, Odlyzko and McKay: rooted trees are walked in reverse
lexicographic order of their level sequences and only the sequences that are
canonical for the centre-rooted free tree are emitted.
"""

from __future__ import annotations

from typing import IO, Iterable, Iterator

from .errors import OrderTooLarge
from .graph import Tree, encode_graph6, from_parents

DEFAULT_CAP = 22

# OEIS A000055, n = 0..22
KNOWN_COUNTS = (
    1, 1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551, 1301, 3159, 7741, 19320,
    48629, 123867, 317955, 823065, 2144505, 5623756,
)


def _check_order(n: int, cap: int) -> None:
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    if n > cap:
        raise OrderTooLarge(f"order {n} exceeds the enumeration cap {cap}")


def _next_rooted(seq: list[int], p: int | None = None) -> list[int] | None:
    if p is None:
        p = len(seq) - 1
        while seq[p] == 1:
            p -= 1
    if p == 0:
        return None
    q = p - 1
    while seq[q] != seq[p] - 1:
        q -= 1
    out = list(seq)
    shift = p - q
    for i in range(p, len(out)):
        out[i] = out[i - shift]
    return out


def _split(seq: list[int]) -> tuple[list[int], list[int]]:
    """Split at the second child of the root: (first subtree, rest with root)."""
    m = len(seq)
    seen_one = False
    for i, x in enumerate(seq):
        if x == 1:
            if seen_one:
                m = i
                break
            seen_one = True
    left = [x - 1 for x in seq[1:m]]
    rest = [0] + seq[m:]
    return left, rest


def _next_free(seq: list[int]) -> list[int] | None:
    left, rest = _split(seq)
    hl, hr = max(left), max(rest)
    ok = hr >= hl
    if ok and hr == hl:
        if len(left) > len(rest) or (len(left) == len(rest) and left > rest):
            ok = False
    if ok:
        return seq
    p = len(left)
    nxt = _next_rooted(seq, p)
    if nxt is None:
        return None
    if seq[p] > 2:
        new_left, _ = _split(nxt)
        tail = list(range(1, max(new_left) + 2))
        nxt[-len(tail):] = tail
    return nxt


def level_sequences(n: int, cap: int = DEFAULT_CAP) -> Iterator[list[int]]:
    """Canonical level sequences, one per free tree of order n."""
    _check_order(n, cap)
    if n == 1:
        yield [0]
        return
    seq: list[int] | None = list(range(n // 2 + 1)) + list(range(1, (n + 1) // 2))
    while seq is not None:
        seq = _next_free(seq)
        if seq is None:
            return
        yield seq
        seq = _next_rooted(seq)


def parents_from_levels(seq: list[int]) -> list[int]:
    parents = [-1] * len(seq)
    stack: list[int] = []
    for v, lvl in enumerate(seq):
        del stack[lvl:]
        if stack:
            parents[v] = stack[-1]
        stack.append(v)
    return parents


class EnumerationCursor:
    """Resumable stream over the free trees of one order."""

    def __init__(self, n: int, cap: int = DEFAULT_CAP):
        _check_order(n, cap)
        self.n = n
        self.cap = cap
        self.state: list[int] | None = None
        self.emitted = 0
        self._it = level_sequences(n, cap)

    def __iter__(self) -> "EnumerationCursor":
        return self

    def __next__(self) -> Tree:
        seq = next(self._it)
        self.state = list(seq)
        self.emitted += 1
        return from_parents(parents_from_levels(seq))


def enumerate_free_trees(n: int, cap: int = DEFAULT_CAP) -> Iterator[Tree]:
    return EnumerationCursor(n, cap)


def count_free_trees(n: int, cap: int = DEFAULT_CAP) -> int:
    return sum(1 for _ in level_sequences(n, cap))


def dump_graph6(trees: Iterable[Tree], fh: IO[bytes]) -> int:
    """Write trees as newline-delimited graph6; returns the number written."""
    count = 0
    for t in trees:
        fh.write(encode_graph6(t) + b"\n")
        count += 1
    return count
