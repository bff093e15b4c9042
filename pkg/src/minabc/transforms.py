"""Structural transformations that lower the ABC index, each paired with a
closed-form prediction of the change.

Every transformation rewires a handful of edges around named anchor
vertices.  The prediction is written in the shape of the corresponding
bound, i.e. as a sum of ``-f(old) + f(new)`` pairs over the edges whose
endpoint degrees change, evaluated at the actual degrees of the tree.  Edges
at a degree-2 vertex never contribute, because f(x, 2) = 1/sqrt(2) for every
x; this is what lets whole pendant paths move for free.

Vocabulary (rooting-free, always relative to a neighbour ``p``):

* an *arm* of p is a degree-2 neighbour whose other neighbour is a leaf;
* a *B_k root* of p is a neighbour of degree k + 1 whose other k
  neighbours are all arms of it; a *B2 root* has k = 2.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import PreconditionViolated
from .graph import Tree, validate_tree
from .metric import edge_f as f


@dataclass(frozen=True)
class TransformationSpec:
    name: str
    anchor: Mapping[str, int]
    params: Mapping[str, int] = field(default_factory=dict)


# ------------------------------------------------------------ local predicates


def _other(t: Tree, a: int, p: int) -> int:
    x, y = t.adjacency[a]
    return y if x == p else x


def is_arm(t: Tree, a: int, p: int) -> bool:
    return p in t.adjacency[a] and t.degree(a) == 2 and t.degree(_other(t, a, p)) == 1


def arms(t: Tree, p: int, skip=()) -> list[int]:
    return sorted(a for a in t.adjacency[p] if a not in skip and is_arm(t, a, p))


def is_b_root(t: Tree, v: int, p: int, k: int | None = None) -> bool:
    if p not in t.adjacency[v] or t.degree(v) < 3:
        return False
    if k is not None and t.degree(v) != k + 1:
        return False
    return all(is_arm(t, a, v) for a in t.adjacency[v] if a != p)


def b_roots(t: Tree, p: int, k: int | None = None, skip=()) -> list[int]:
    return sorted(v for v in t.adjacency[p] if v not in skip and is_b_root(t, v, p, k))


def _arms_of_root(t: Tree, v: int, p: int) -> list[int]:
    return sorted(a for a in t.adjacency[v] if a != p)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise PreconditionViolated(message)


def _adjacent(t: Tree, a: int, b: int, what: str) -> None:
    _require(b in t.adjacency[a], f"{what}: vertices {a} and {b} are not adjacent")


class _Work:
    """Mutable copy of the adjacency used while rewiring."""

    def __init__(self, t: Tree):
        self.n = t.n
        self.adj = [set(a) for a in t.adjacency]

    def cut(self, a: int, b: int) -> None:
        self.adj[a].remove(b)
        self.adj[b].remove(a)

    def link(self, a: int, b: int) -> None:
        self.adj[a].add(b)
        self.adj[b].add(a)

    def move(self, x: int, old: int, new: int) -> None:
        self.cut(x, old)
        self.link(x, new)

    def tree(self) -> Tree:
        return validate_tree(self.n, [(a, b) for a in range(self.n) for b in self.adj[a] if a < b])


def _shift(x0: float, x1: float, y0: float, y1: float | None = None) -> float:
    """-f(x0, y0) + f(x1, y1); y1 defaults to y0."""
    return -f(x0, y0) + f(x1, y0 if y1 is None else y1)


def _rehang(t: Tree, v: int, old: int, new: int, skip) -> list[float]:
    """Terms for the neighbours of v (not in skip) whose edge degree moves old -> new."""
    return [_shift(old, new, t.degree(y)) for y in t.adjacency[v] if y not in skip]


# --------------------------------------------------------------- B1 moves


def _t_b1(t: Tree, a: Mapping[str, int], params: Mapping[str, int], kind: str):
    u, v = a["u"], a["v"]
    _adjacent(t, u, v, kind)
    m = int(params.get("moves", 1))
    _require(m >= 0, f"{kind}: moves must be >= 0")
    if kind == "T-B1":
        _require(is_b_root(t, v, u) and t.degree(v) in (4, 5), f"{kind}: v must root a B3 or B4 branch")
    else:
        _require(is_b_root(t, v, u, 2), f"{kind}: v must root a B2 branch")
    own = arms(t, u)
    _require(len(own) >= max(m, 1), f"{kind}: u needs at least {max(m, 1)} B1 arm(s), has {len(own)}")
    if kind == "T-proper-Tk":
        _require(len(b_roots(t, u, 2)) > 6, f"{kind}: u needs more than six B2 branches")
    du, dv = t.degree(u), t.degree(v)
    moved = own[:m]
    w = _Work(t)
    for x in moved:
        w.move(x, u, v)
    terms = [_shift(du, du - m, dv, dv + m)]
    terms += _rehang(t, u, du, du - m, skip={v, *moved})
    return w, terms


def _t1_b1(t: Tree, a, params):
    u, v = a["u"], a["v"]
    _adjacent(t, u, v, "T1-B1")
    _require(is_b_root(t, v, u, 3), "T1-B1: v must root a B3 branch")
    own = arms(t, u)
    _require(len(own) >= 4, f"T1-B1: u needs at least four B1 arms, has {len(own)}")
    p1, p2, p3, p4 = own[:4]
    q1 = _other(t, p1, u)
    a1 = _arms_of_root(t, v, u)[0]
    du = t.degree(u)
    w = _Work(t)
    w.cut(p1, q1)
    w.link(u, q1)
    w.move(p2, u, p1)
    w.move(a1, v, p1)
    w.move(p3, u, q1)
    w.move(p4, u, q1)
    terms = [_shift(du, du - 2, 4, 3),
             _shift(du, du - 2, 2, 3),          # u-p1: p1 becomes a B2 root
             -f(2, 1) + f(du - 2, 3)]           # p1-q1 replaced by u-q1
    terms += _rehang(t, u, du, du - 2, skip={v, p1, p2, p3, p4})
    return w, terms


# --------------------------------------------------------------- B2 moves


def _t_b2_small(t: Tree, a, params, kind: str):
    u, top = a["u"], a["w"]
    _adjacent(t, u, top, kind)
    _require(t.degree(u) == 3, f"{kind}: u must have degree 3")
    rest = [x for x in t.adjacency[u] if x != top]
    b2 = [x for x in rest if is_b_root(t, x, u, 2)]
    if kind == "T-B2-a":
        _require(len(b2) == 2, f"{kind}: both other neighbours of u must root B2 branches")
    else:
        _require(len(b2) >= 1 and any(is_arm(t, x, u) for x in rest),
                 f"{kind}: u needs one B2 branch and one B1 arm")
    y1 = sorted(b2)[0]
    other = next(x for x in rest if x != y1)
    dw = t.degree(top)
    w = _Work(t)
    w.move(_arms_of_root(t, y1, u)[0], y1, u)
    terms = [_shift(dw, dw, 3, 4), -f(3, 3) + f(4, 2)]
    if kind == "T-B2-a":
        terms.append(_shift(3, 4, t.degree(other)))
    return w, terms


def _t2_b2(t: Tree, a, params):
    top, u, v = a["w"], a["u"], a["v"]
    _require(t.degree(top) == 3, "T2-B2: w must have degree 3")
    _adjacent(t, top, u, "T2-B2")
    _adjacent(t, top, v, "T2-B2")
    _require(u != v and t.degree(u) == 3 and t.degree(v) == 3, "T2-B2: u and v must have degree 3")
    z = next(x for x in t.adjacency[top] if x not in (u, v))
    u_rest = [x for x in t.adjacency[u] if x != top]
    arm = [x for x in u_rest if is_arm(t, x, u)]
    _require(len(arm) >= 1, "T2-B2: u needs a B1 arm")
    y = next(x for x in u_rest if x != arm[0])
    _require(t.degree(y) >= 3, "T2-B2: the other child of u must have degree >= 3")
    v_rest = sorted(x for x in t.adjacency[v] if x != top)
    _require(all(t.degree(x) >= 3 for x in v_rest), "T2-B2: the children of v must have degree >= 3")
    w = _Work(t)
    w.cut(top, u)
    w.move(y, u, top)
    w.move(arm[0], u, top)
    for x in v_rest:
        w.move(x, v, top)
    w.link(v, u)
    dz = t.degree(z)
    terms = [_shift(dz, dz, 3, 6), -f(3, 3) + f(6, 2), -f(3, 3) + f(2, 1)]
    terms += [_shift(3, 6, t.degree(c)) for c in [y, *v_rest]]
    return w, terms


def _t3_b2(t: Tree, a, params):
    top, u, v1, v2 = a["w"], a["u"], a["v1"], a["v2"]
    _require(t.degree(top) == 4, "T3-B2: w must have degree 4")
    for x in (u, v1, v2):
        _adjacent(t, top, x, "T3-B2")
    _require(len({u, v1, v2}) == 3, "T3-B2: u, v1, v2 must be distinct")
    z = next(x for x in t.adjacency[top] if x not in (u, v1, v2))
    _require(t.degree(u) == 3, "T3-B2: u must have degree 3")
    u_rest = [x for x in t.adjacency[u] if x != top]
    arm = [x for x in u_rest if is_arm(t, x, u)]
    _require(len(arm) >= 1, "T3-B2: u needs a B1 arm")
    y = next(x for x in u_rest if x != arm[0])
    _require(t.degree(y) >= 3, "T3-B2: the other child of u must have degree >= 3")
    kids = {}
    for vi in (v1, v2):
        _require(t.degree(vi) in (3, 4), "T3-B2: v1 and v2 must have degree 3 or 4")
        kids[vi] = sorted(x for x in t.adjacency[vi] if x != top)
        _require(all(t.degree(x) >= 3 for x in kids[vi]),
                 "T3-B2: the children of v1 and v2 must have degree >= 3")
    d1, d2, dz = t.degree(v1), t.degree(v2), t.degree(z)
    big = d1 + d2 + 1
    w = _Work(t)
    w.move(y, u, top)
    w.cut(top, v1)
    w.cut(top, v2)
    for vi in (v1, v2):
        for x in kids[vi]:
            w.move(x, vi, top)
    w.link(u, v1)
    w.link(v1, v2)
    terms = [_shift(dz, dz, 4, big), -f(4, d1) + f(2, 1), -f(4, d2) + f(3, 2),
             _shift(4, big, 3), _shift(3, big, t.degree(y))]
    terms += [_shift(d1, big, t.degree(x)) for x in kids[v1]]
    terms += [_shift(d2, big, t.degree(x)) for x in kids[v2]]
    return w, terms


def _shrink_by_seven(t: Tree, w: _Work, top: int, b2: list[int]):
    """Dismantle x1, y1 among seven B2 roots of top and feed v1..v5.

    y1's arms go to v1, v2, x1's arms to v3, v5, x1 hangs below v4 and y1
    hangs below x1, so v1..v5 become B3 roots.  Returns (x1, y1, v-list).
    """
    x1, y1, *vs = b2[:7]
    ya, xa = _arms_of_root(t, y1, top), _arms_of_root(t, x1, top)
    w.move(ya[0], y1, vs[0])
    w.move(ya[1], y1, vs[1])
    w.move(xa[0], x1, vs[2])
    w.move(xa[1], x1, vs[4])
    w.move(x1, top, vs[3])
    w.move(y1, top, x1)
    return x1, y1, vs


def _t11(t: Tree, a, params, kind: str):
    top = a["w"]
    b2 = b_roots(t, top, 2)
    _require(len(b2) >= 7, f"{kind}: w needs at least seven B2 branches, has {len(b2)}")
    strange = [x for x in t.adjacency[top] if not is_b_root(t, x, top) and not is_arm(t, x, top)]
    if kind == "T11":
        _require(len(strange) <= 1, f"{kind}: w may only have B_k and B1 children")
    elif kind == "T12":
        _require(len(strange) >= 2, f"{kind}: w needs a child that is not a B_k root")
    else:
        _require(len(b2) <= 11 and not arms(t, top), f"{kind}: w needs 7..11 B2 branches and no B1")
    dw = t.degree(top)
    w = _Work(t)
    x1, y1, vs = _shrink_by_seven(t, w, top, b2)
    terms = [5 * _shift(3, 4, dw, dw - 2), -f(dw, 3) + f(3, 2), -f(dw, 3) + f(2, 1)]
    terms += _rehang(t, top, dw, dw - 2, skip={x1, y1, *vs})
    return w, terms


def _dissolve_checks(t: Tree, top: int, z: int, kind: str) -> list[int]:
    _adjacent(t, top, z, kind)
    b2 = b_roots(t, top, 2, skip={z})
    rest = [x for x in t.adjacency[top] if x != z and x not in b2]
    dw = t.degree(top)
    if kind == "T1-lemma-B2-10":
        _require(dw == 8 and not rest, f"{kind}: w must have degree 8 and only B2 children")
    elif kind == "T1-lemma-B2-20":
        _require(7 <= len(b2) <= 11, f"{kind}: w needs 7..11 B2 branches")
        _require(all(t.degree(x) >= 4 for x in rest), f"{kind}: other children of w need degree >= 4")
    else:
        _require(not rest, f"{kind}: w must have only B2 children")
        lo, hi = {"T21": (9, 13), "T221": (9, 11), "T222": (12, 13)}[kind]
        _require(lo <= dw <= hi, f"{kind}: d(w) must lie in {lo}..{hi}")
        deg3 = [x for x in t.adjacency[z] if x != top and t.degree(x) == 3]
        if kind == "T21":
            _require(len(b_roots(t, z, 2, skip={top})) >= 3, f"{kind}: z needs three other B2 children")
        else:
            _require(len(deg3) <= 2, f"{kind}: z may have at most two other children of degree 3")
    return b2


def _t_dissolve7(t: Tree, a, params, kind: str):
    """w hands its children to z; seven B2 branches become five B3."""
    top, z = a["w"], a["z"]
    b2 = _dissolve_checks(t, top, z, kind)
    dw, dz = t.degree(top), t.degree(z)
    big = dz + dw - 4
    w = _Work(t)
    x1, y1, vs = _shrink_by_seven(t, w, top, b2)
    others = [x for x in t.adjacency[top] if x not in (z, x1, y1, *vs)]
    for x in vs + others:
        w.move(x, top, z)
    # w ends as a leaf at the end of the arm y1 gave to v1
    leaf = _other(t, _arms_of_root(t, y1, top)[0], y1)
    w.move(top, z, leaf)
    terms = [-f(dz, dw) + f(2, 1), 5 * _shift(3, 4, dw, big),
             -f(3, dw) + f(4, 2), -f(3, dw) + f(2, 1)]
    terms += [_shift(dw, big, t.degree(x)) for x in others]
    terms += _rehang(t, z, dz, big, skip={top})
    return w, terms


def _t_dissolve8(t: Tree, a, params, kind: str):
    """w hands its children to z after dismantling three B2 branches.

    The eight freed pieces (six arms, plus x1 carrying y1 and x2 carrying w)
    are spread over receivers: T21 five B2 children of w and three of z,
    T221 three children of w twice and two once, T222 eight children of w.
    """
    top, z = a["w"], a["z"]
    b2 = _dissolve_checks(t, top, z, kind)
    dw, dz = t.degree(top), t.degree(z)
    big = dz + dw - 5
    x1, x2, y1, *vs = b2
    if kind == "T21":
        zs = b_roots(t, z, 2, skip={top})[:3]
        receivers = vs[:5] + zs
    elif kind == "T221":
        zs, receivers = [], [vs[0], vs[0], vs[1], vs[1], vs[2], vs[2], vs[3], vs[4]]
    else:
        zs, receivers = [], vs[:8]
    pieces = (_arms_of_root(t, y1, top) + _arms_of_root(t, x1, top) + _arms_of_root(t, x2, top))
    w = _Work(t)
    for piece, r in zip(pieces, receivers[:6]):
        owner = next(o for o in (y1, x1, x2) if piece in t.adjacency[o])
        w.move(piece, owner, r)
    w.move(x1, top, receivers[6])
    w.move(x2, top, receivers[7])
    w.move(y1, top, x1)
    for x in vs:
        w.move(x, top, z)
    w.move(top, z, x2)
    gain = {r: receivers.count(r) for r in receivers}
    terms = [-f(dz, dw) + f(2, 1), -f(3, dw) + f(2, 1), 2 * (-f(3, dw) + f(4, 2))]
    terms += [_shift(3, 3 + gain.get(x, 0), dw, big) for x in vs]
    terms += [_shift(3, 4, dz, big) for x in zs]
    terms += _rehang(t, z, dz, big, skip={top, *zs})
    return w, terms


# ------------------------------------------------- merging two B2 parents


def _wk_parent(t: Tree, wk: int, kind: str) -> tuple[int, list[int]]:
    b2 = b_roots(t, wk, 2)
    rest = [x for x in t.adjacency[wk] if x not in b2]
    _require(len(rest) == 1, f"{kind}: w_k-1 must have only B2 children below its parent")
    return rest[0], b2


def _thm_checks(t: Tree, w1: int, wk: int, zk: int, kind: str, same: bool) -> None:
    _require(w1 != wk, f"{kind}: w1 and w_k-1 must differ")
    _require(bool(b_roots(t, w1, 2, skip={wk})), f"{kind}: w1 must be a parent of B2 branches")
    if same:
        _require(zk == w1, f"{kind}: w1 must be the parent of w_k-1")
    else:
        _require(zk != w1 and wk not in t.adjacency[w1], f"{kind}: w1 must not be the parent of w_k-1")


def _thm_small(t: Tree, a, params, kind: str):
    """d(w_k-1) = 4: c3 gives its arms to c1, c2 which move below w1."""
    w1, wk = a["w1"], a["wk"]
    _require(t.degree(wk) == 4, f"{kind}: w_k-1 must have degree 4")
    zk, (c1, c2, c3) = _wk_parent(t, wk, kind)
    _thm_checks(t, w1, wk, zk, kind, kind == "T3-thm")
    d1, dzk = t.degree(w1), t.degree(zk)
    w = _Work(t)
    arm1, arm2 = _arms_of_root(t, c3, wk)
    w.move(arm1, c3, c1)
    w.move(arm2, c3, c2)
    w.move(c1, wk, w1)
    w.move(c2, wk, w1)
    terms = [-f(4, 3) + f(2, 1), 2 * _shift(4, d1 + 2, 3, 4)]
    if kind == "T1-thm":
        terms.append(_shift(dzk, dzk, 4, 2))
        terms += _rehang(t, w1, d1, d1 + 2, skip=())
    else:
        terms.append(-f(d1, 4) + f(d1 + 2, 2))
        terms += _rehang(t, w1, d1, d1 + 2, skip={wk})
    return w, terms


def _thm_large(t: Tree, a, params, kind: str):
    """d(w_k-1) in 5..7: w_k-1 shrinks to a B3 root, the rest moves to w1."""
    w1, wk = a["w1"], a["wk"]
    dk = t.degree(wk)
    _require(5 <= dk <= 7, f"{kind}: w_k-1 must have degree 5, 6 or 7")
    zk, b2 = _wk_parent(t, wk, kind)
    _thm_checks(t, w1, wk, zk, kind, kind == "T4-thm")
    x, y, c1, c2, *rest = b2
    nk = dk - 1
    d1, dzk = t.degree(w1), t.degree(zk)
    big = d1 + nk - 2
    xa, ya = _arms_of_root(t, x, wk), _arms_of_root(t, y, wk)
    w = _Work(t)
    w.move(xa[0], x, c1)
    w.move(ya[0], y, c2)
    w.move(xa[1], x, wk)
    w.move(ya[1], y, wk)
    w.move(y, wk, x)
    for c in (c1, c2, *rest):
        w.move(c, wk, w1)
    terms = [-f(dk, 3) + f(4, 2), -f(dk, 3) + f(2, 1), 2 * _shift(dk, big, 3, 4),
             (nk - 4) * _shift(dk, big, 3, 3)]
    if kind == "T2-thm":
        terms.append(_shift(dzk, dzk, dk, 4))
        terms += _rehang(t, w1, d1, big, skip=())
    else:
        terms.append(-f(d1, dk) + f(big, 4))
        terms += _rehang(t, w1, d1, big, skip={wk})
    return w, terms


def _t5(t: Tree, a, params):
    w1, w2 = a["w1"], a["w2"]
    _adjacent(t, w1, w2, "T5")
    b22, a21 = b_roots(t, w2, 2), arms(t, w2)
    _require(len(b22) >= 1 and len(a21) >= 1 and len(b22) + len(a21) == t.degree(w2) - 1,
             "T5: w2 must carry only B2 branches and at least one B1 arm below w1")
    recv = b_roots(t, w1, 2, skip={w2})
    need = 3 + len(a21)
    _require(len(recv) >= need, f"T5: w1 needs {need} B2 branches, has {len(recv)}")
    recv = recv[:need]
    x, *moved = b22
    d1, d2, n22 = t.degree(w1), t.degree(w2), len(b22)
    big = d1 + n22 - 2
    xa = _arms_of_root(t, x, w2)
    w = _Work(t)
    pieces = [(xa[0], x), (xa[1], x)] + [(p, w2) for p in a21]
    for (piece, owner), r in zip(pieces, recv):
        w.move(piece, owner, r)
    w.move(x, w2, recv[-1])
    w.move(w2, w1, x)
    for c in moved:
        w.move(c, w2, w1)
    terms = [-f(d1, d2) + f(2, 1), -f(d2, 3) + f(4, 2), (n22 - 1) * _shift(d2, big, 3, 3),
             need * _shift(d1, big, 3, 4)]
    terms += _rehang(t, w1, d1, big, skip={w2, *recv})
    return w, terms


def _t6(t: Tree, a, params):
    w1, w2 = a["w1"], a["w2"]
    _require(w1 != w2 and w2 not in t.adjacency[w1], "T6: w1 must not be adjacent to w2")
    b22, a21 = b_roots(t, w2, 2), arms(t, w2)
    rest = [v for v in t.adjacency[w2] if v not in b22 and v not in a21]
    _require(t.degree(w2) == 8 and len(b22) == 6 and len(a21) == 1 and len(rest) == 1,
             "T6: w2 must have degree 8 with six B2 branches and one B1 arm")
    _require(bool(b_roots(t, w1, 2)), "T6: w1 must be a parent of B2 branches")
    z2 = rest[0]
    x, y, m1, m2, m3, m4 = b22
    d1, d2, dz2 = t.degree(w1), 8, t.degree(z2)
    big = d1 + 4
    xa, ya = _arms_of_root(t, x, w2), _arms_of_root(t, y, w2)
    w = _Work(t)
    w.move(xa[0], x, m1)
    w.move(xa[1], x, m2)
    w.move(ya[0], y, m3)
    w.move(ya[1], y, w2)
    w.move(y, w2, x)
    for c in (m1, m2, m3, m4):
        w.move(c, w2, w1)
    terms = [_shift(dz2, dz2, d2, 4), -f(d2, 3) + f(4, 2), -f(d2, 3) + f(2, 1),
             3 * _shift(d2, big, 3, 4), _shift(d2, big, 3, 3)]
    terms += _rehang(t, w1, d1, big, skip=())
    return w, terms


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class Rule:
    roles: tuple[str, ...]
    run: Callable
    summary: str


def _k(fn, kind):
    return lambda t, a, p: fn(t, a, p, kind)


RULES: dict[str, Rule] = {
    "T-B1": Rule(("u", "v"), _k(_t_b1, "T-B1"),
                 "move B1 arm(s) of u onto its B3/B4 child v"),
    "T-B1-relaxed": Rule(("u", "v"), _k(_t_b1, "T-B1-relaxed"),
                         "move B1 arm(s) of u onto its B2 child v"),
    "T-proper-Tk": Rule(("u", "v"), _k(_t_b1, "T-proper-Tk"),
                        "as T-B1-relaxed when u has more than six B2 branches"),
    "T1-B1": Rule(("u", "v"), _t1_b1,
                  "four B1 arms of u and one arm of its B3 child v form two B2 branches"),
    "T-B2-a": Rule(("u", "w"), _k(_t_b2_small, "T-B2-a"),
                   "degree-3 u with two B2 children takes one arm from the first"),
    "T1-B2": Rule(("u", "w"), _k(_t_b2_small, "T1-B2"),
                  "degree-3 u with a B2 child and a B1 arm takes one arm of the B2"),
    "T2-B2": Rule(("w", "u", "v"), _t2_b2,
                  "degree-3 w absorbs the children of u and v, which become a path"),
    "T3-B2": Rule(("w", "u", "v1", "v2"), _t3_b2,
                  "degree-4 w absorbs the children of v1, v2, which hang below u"),
    "T11": Rule(("w",), _k(_t11, "T11"), "seven B2 children of w become five B3"),
    "T12": Rule(("w",), _k(_t11, "T12"), "as T11 when w has a child that is not a B_k root"),
    "T2-lemma-B2-20": Rule(("w",), _k(_t11, "T2-lemma-B2-20"), "as T11 with 7..11 B2 and no B1"),
    "T1-lemma-B2-10": Rule(("w", "z"), _k(_t_dissolve7, "T1-lemma-B2-10"),
                           "w of degree 8 dissolves into z, seven B2 become five B3"),
    "T1-lemma-B2-20": Rule(("w", "z"), _k(_t_dissolve7, "T1-lemma-B2-20"),
                           "w with 7..11 B2 dissolves into z"),
    "T21": Rule(("w", "z"), _k(_t_dissolve8, "T21"),
                "w dissolves into z, three B2 feed five B2 of w and three of z"),
    "T221": Rule(("w", "z"), _k(_t_dissolve8, "T221"),
                 "w dissolves into z, three B2 feed five B2 of w (three twice)"),
    "T222": Rule(("w", "z"), _k(_t_dissolve8, "T222"),
                 "w dissolves into z, three B2 feed eight B2 of w"),
    "T1-thm": Rule(("w1", "wk"), _k(_thm_small, "T1-thm"),
                   "degree-4 B2 parent w_k-1 hands two B3 to w1"),
    "T2-thm": Rule(("w1", "wk"), _k(_thm_large, "T2-thm"),
                   "B2 parent w_k-1 of degree 5..7 shrinks to a B3 root"),
    "T3-thm": Rule(("w1", "wk"), _k(_thm_small, "T3-thm"), "T1-thm when w1 is the parent of w_k-1"),
    "T4-thm": Rule(("w1", "wk"), _k(_thm_large, "T4-thm"), "T2-thm when w1 is the parent of w_k-1"),
    "T5": Rule(("w1", "w2"), _t5, "child w2 of w1 is dissolved into w1"),
    "T6": Rule(("w1", "w2"), _t6, "B2 parent w2 of degree 8 hands four B2 to w1"),
}


def apply_transformation(t: Tree, spec: TransformationSpec) -> tuple[Tree, float]:
    """Return the transformed tree and the predicted ABC change."""
    rule = RULES.get(spec.name)
    if rule is None:
        raise PreconditionViolated(f"unknown transformation {spec.name!r}")
    missing = [r for r in rule.roles if r not in spec.anchor]
    _require(not missing, f"{spec.name}: missing anchor(s) {missing}")
    for role in rule.roles:
        v = spec.anchor[role]
        _require(isinstance(v, int) and 0 <= v < t.n, f"{spec.name}: anchor {role}={v!r} out of range")
    work, terms = rule.run(t, spec.anchor, spec.params)
    return work.tree(), math.fsum(terms)


# ------------------------------------------------------- random instances


class _Builder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.n = 0
        self.edges: list[tuple[int, int]] = []

    def new(self, parent: int | None = None) -> int:
        v = self.n
        self.n += 1
        if parent is not None:
            self.edges.append((parent, v))
        return v

    def arm(self, p: int) -> int:
        a = self.new(p)
        self.new(a)
        return a

    def bk(self, p: int, k: int) -> int:
        v = self.new(p)
        for _ in range(k):
            self.arm(v)
        return v

    def junk(self, p: int, size: int | None = None) -> None:
        """A random subtree hanging from p by one edge."""
        size = size if size is not None else self.rng.randint(1, 6)
        nodes = [self.new(p)]
        for _ in range(size - 1):
            nodes.append(self.new(self.rng.choice(nodes)))

    def extras(self, p: int, lo: int = 0, hi: int = 3, kinds=(2, 3, 4), junk: bool = True) -> None:
        for _ in range(self.rng.randint(lo, hi)):
            if junk and self.rng.random() < 0.3:
                self.junk(p)
            else:
                self.bk(p, self.rng.choice(kinds))

    def parent(self, v_builder: Callable[[int | None], int], rooted_ok: bool = True) -> int:
        """Build the anchor below a random context, or as the root."""
        if rooted_ok and self.rng.random() < 0.25:
            return v_builder(None)
        top = self.new()
        self.junk(top)
        return v_builder(top)

    def finish(self, name: str, anchor: dict[str, int], params=None) -> tuple[Tree, TransformationSpec]:
        perm = list(range(self.n))
        self.rng.shuffle(perm)
        t = validate_tree(self.n, [(perm[a], perm[b]) for a, b in self.edges])
        return t, TransformationSpec(name, {k: perm[v] for k, v in anchor.items()}, dict(params or {}))


def _s_b1(b: _Builder, name: str):
    r = b.rng
    anchor, params = {}, {}

    def build(top):
        u = b.new(top)
        k1 = r.randint(4, 6) if name == "T1-B1" else r.randint(1, 5)
        for _ in range(k1):
            b.arm(u)
        if name == "T-B1":
            v = b.bk(u, r.choice((3, 4)))
        elif name == "T1-B1":
            v = b.bk(u, 3)
        else:
            v = b.bk(u, 2)
        if name == "T-proper-Tk":
            for _ in range(r.randint(6, 8)):
                b.bk(u, 2)
            b.extras(u, 0, 2, kinds=(3,), junk=False)
        else:
            b.extras(u, 0, 3)
        anchor.update(u=u, v=v)
        if name != "T1-B1":
            params["moves"] = r.randint(1, k1)
        return u

    b.parent(build)
    return b.finish(name, anchor, params)


def _s_b2_small(b: _Builder, name: str):
    top = b.new()
    b.junk(top)
    b.extras(top, 0, 2)
    u = b.new(top)
    b.bk(u, 2)
    if name == "T-B2-a":
        b.bk(u, 2)
    else:
        b.arm(u)
    return b.finish(name, {"u": u, "w": top})


def _s_t2_b2(b: _Builder, name: str):
    r = b.rng
    z = b.new()
    b.junk(z)
    b.extras(z, 0, 2)
    w = b.new(z)
    u = b.new(w)
    b.bk(u, r.randint(2, 4))
    b.arm(u)
    v = b.new(w)
    for _ in range(2):
        b.bk(v, r.randint(2, 4))
    return b.finish(name, {"w": w, "u": u, "v": v})


def _s_t3_b2(b: _Builder, name: str):
    r = b.rng
    z = b.new()
    b.junk(z)
    w = b.new(z)
    u = b.new(w)
    b.bk(u, r.randint(2, 3))
    b.arm(u)
    vs = []
    for _ in range(2):
        v = b.new(w)
        for _ in range(r.choice((2, 3))):
            b.bk(v, r.randint(2, 3))
        vs.append(v)
    return b.finish(name, {"w": w, "u": u, "v1": vs[0], "v2": vs[1]})


def _s_t11(b: _Builder, name: str):
    r = b.rng
    anchor = {}

    def build(top):
        w = b.new(top)
        lo, hi = (7, 11) if name == "T2-lemma-B2-20" else (7, 12)
        for _ in range(r.randint(lo, hi)):
            b.bk(w, 2)
        b.extras(w, 0, 2, kinds=(3, 4), junk=False)
        if name == "T11":
            for _ in range(r.randint(0, 2)):
                b.arm(w)
        if name == "T12":
            x = b.new(w)
            b.bk(x, 2)
            b.bk(x, 3)
            b.arm(x)
        anchor["w"] = w
        return w

    b.parent(build, rooted_ok=name != "T12")
    return b.finish(name, anchor)


def _s_dissolve(b: _Builder, name: str):
    r = b.rng
    z = b.new()
    if r.random() < 0.7:
        b.junk(z)
    if name == "T21":
        for _ in range(r.randint(3, 4)):
            b.bk(z, 2)
        b.extras(z, 0, 2, kinds=(2, 3, 4), junk=False)
    elif name in ("T221", "T222"):
        for _ in range(r.randint(0, 2)):
            b.bk(z, 2)
        b.extras(z, 0, 3, kinds=(3, 4), junk=False)
    else:
        b.extras(z, 0, 3)
    w = b.new(z)
    count = {"T1-lemma-B2-10": (7, 7), "T1-lemma-B2-20": (7, 11), "T21": (8, 12),
             "T221": (8, 10), "T222": (11, 12)}[name]
    for _ in range(r.randint(*count)):
        b.bk(w, 2)
    if name == "T1-lemma-B2-20":
        b.extras(w, 0, 3, kinds=(3, 4), junk=False)
    return b.finish(name, {"w": w, "z": z})


def _s_thm(b: _Builder, name: str):
    r = b.rng
    root = b.new()
    z1 = b.new(root) if r.random() < 0.8 else root
    b.junk(z1)
    w1 = b.new(z1)
    for _ in range(r.randint(1, 6)):
        b.bk(w1, 2)
    b.extras(w1, 0, 3, kinds=(3, 4), junk=False)
    if name in ("T3-thm", "T4-thm"):
        zk = w1
    else:
        zk = r.choice([z1, b.new(root)])
        b.junk(zk)
    wk = b.new(zk)
    nk = 3 if name in ("T1-thm", "T3-thm") else r.randint(4, 6)
    for _ in range(nk):
        b.bk(wk, 2)
    return b.finish(name, {"w1": w1, "wk": wk})


def _s_t5(b: _Builder, name: str):
    r = b.rng
    anchor = {}

    def build(top):
        w1 = b.new(top)
        n21 = r.randint(1, 3)
        for _ in range(r.randint(3 + n21, 8)):
            b.bk(w1, 2)
        b.extras(w1, 0, 3, kinds=(3,), junk=False)
        w2 = b.new(w1)
        for _ in range(r.randint(1, 6)):
            b.bk(w2, 2)
        for _ in range(n21):
            b.arm(w2)
        anchor.update(w1=w1, w2=w2)
        return w1

    b.parent(build)
    return b.finish(name, anchor)


def _s_t6(b: _Builder, name: str):
    r = b.rng
    root = b.new()
    z1 = b.new(root)
    z2 = z1 if r.random() < 0.3 else b.new(root)
    b.junk(root)
    w1 = b.new(z1)
    for _ in range(r.randint(1, 7)):
        b.bk(w1, 2)
    b.extras(w1, 0, 3, kinds=(3,), junk=False)
    w2 = b.new(z2)
    for _ in range(6):
        b.bk(w2, 2)
    b.arm(w2)
    return b.finish(name, {"w1": w1, "w2": w2})


SAMPLERS: dict[str, Callable[[_Builder, str], tuple[Tree, TransformationSpec]]] = {
    "T-B1": _s_b1, "T-B1-relaxed": _s_b1, "T-proper-Tk": _s_b1, "T1-B1": _s_b1,
    "T-B2-a": _s_b2_small, "T1-B2": _s_b2_small, "T2-B2": _s_t2_b2, "T3-B2": _s_t3_b2,
    "T11": _s_t11, "T12": _s_t11, "T2-lemma-B2-20": _s_t11,
    "T1-lemma-B2-10": _s_dissolve, "T1-lemma-B2-20": _s_dissolve,
    "T21": _s_dissolve, "T221": _s_dissolve, "T222": _s_dissolve,
    "T1-thm": _s_thm, "T2-thm": _s_thm, "T3-thm": _s_thm, "T4-thm": _s_thm,
    "T5": _s_t5, "T6": _s_t6,
}


def sample_instance(name: str, rng: random.Random, attempts: int = 50) -> tuple[Tree, TransformationSpec]:
    """A random tree with valid anchors for the named transformation."""
    if name not in SAMPLERS:
        raise PreconditionViolated(f"unknown transformation {name!r}")
    last: Exception | None = None
    for _ in range(attempts):
        t, spec = SAMPLERS[name](_Builder(rng), name)
        try:
            apply_transformation(t, spec)
        except PreconditionViolated as exc:  # random context broke a precondition
            last = exc
            continue
        return t, spec
    raise RuntimeError(f"could not sample a valid {name} instance: {last}")
