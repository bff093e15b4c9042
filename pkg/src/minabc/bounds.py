"""Catalogue of closed-form ABC-change bounds, an evaluator with analytic
limits, sign-threshold search, monotonicity probes, forbidden-configuration
tables and the golden-constant suite.

Every expression is registered as a readable formula over ``f`` whose
coefficients and arguments are affine in the parameters, for example::

    -f(du,4) + f(du-1,5) + (du-3)*(-f(du,4) + f(du-1,4)) - f(du,dw) + f(du-1,dw)

The formula is parsed once into a term list.  A parameter may be given as
``inf``; the limit is then taken term by term from the expansions

    f(a p + A, B) = 1/sqrt(B) + (B - 2) / (2 a sqrt(B)) / p + O(p^-2)
    f(a p + A, b p + B) = sqrt((a + b) / (a b)) p^(-1/2) + O(p^(-3/2))

so no large-argument cancellation happens.  Several infinite parameters
are eliminated one after another in declaration order (iterated limits).
"""

from __future__ import annotations

import ast
import csv
import io
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DomainError, NeverNegative, NotMonotone, UnknownExpression
from .metric import edge_f

INF = math.inf


# ------------------------------------------------------------------ affine


class Affine:
    """const + sum(coef * var) with exact rational coefficients."""

    __slots__ = ("const", "coefs")

    def __init__(self, const=0, coefs: Mapping[str, Fraction] | None = None):
        self.const = Fraction(const)
        self.coefs = {k: Fraction(v) for k, v in (coefs or {}).items() if v != 0}

    @classmethod
    def var(cls, name: str) -> "Affine":
        return cls(0, {name: 1})

    def is_const(self) -> bool:
        return not self.coefs

    def __add__(self, other: "Affine") -> "Affine":
        coefs = dict(self.coefs)
        for k, v in other.coefs.items():
            coefs[k] = coefs.get(k, 0) + v
        return Affine(self.const + other.const, coefs)

    def scale(self, c) -> "Affine":
        c = Fraction(c)
        return Affine(self.const * c, {k: v * c for k, v in self.coefs.items()})

    def __neg__(self) -> "Affine":
        return self.scale(-1)

    def __mul__(self, other: "Affine") -> "Affine":
        if self.is_const():
            return other.scale(self.const)
        if other.is_const():
            return self.scale(other.const)
        raise ValueError("product of two non-constant factors is not affine")

    def coeff(self, name: str) -> Fraction:
        return self.coefs.get(name, Fraction(0))

    def drop(self, name: str) -> "Affine":
        return Affine(self.const, {k: v for k, v in self.coefs.items() if k != name})

    def subs(self, env: Mapping[str, float]) -> "Affine":
        out = Affine(self.const)
        for k, v in self.coefs.items():
            out = out + (Affine(Fraction(env[k]) * v) if k in env else Affine(0, {k: v}))
        return out

    def value(self) -> float:
        if self.coefs:
            raise DomainError(f"unbound parameters {sorted(self.coefs)}")
        return float(self.const)

    def key(self) -> tuple:
        return (self.const, tuple(sorted(self.coefs.items())))

    def __repr__(self) -> str:
        parts = [f"{v}*{k}" for k, v in sorted(self.coefs.items())]
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)


# A term is coef * kernel, kernel one of ("1",), ("f", a, b), ("r", b) with
# r(b) = 1/sqrt(b), the value of f(inf, b).
Term = tuple


def _kernel_value(kind: str, args: Sequence[Affine]) -> float:
    if kind == "1":
        return 1.0
    if kind == "f":
        return edge_f(args[0].value(), args[1].value())
    b = args[0].value()
    if b < 1:
        raise DomainError(f"limit term needs y >= 1, got {b}")
    return 1.0 / math.sqrt(b)


# ------------------------------------------------------------------ parser


def _expand(node: ast.AST) -> list[Term]:
    if isinstance(node, ast.Expression):
        return _expand(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return [(Affine(Fraction(node.value)), "1", ())]
    if isinstance(node, ast.Name):
        return [(Affine.var(node.id), "1", ())]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _expand(node.operand)
        return inner if isinstance(node.op, ast.UAdd) else [(-c, k, a) for c, k, a in inner]
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub)):
        right = _expand(node.right)
        if isinstance(node.op, ast.Sub):
            right = [(-c, k, a) for c, k, a in right]
        return _expand(node.left) + right
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        out = []
        for c1, k1, a1 in _expand(node.left):
            for c2, k2, a2 in _expand(node.right):
                if k1 != "1" and k2 != "1":
                    raise ValueError("product of two f-terms")
                kind, args = (k2, a2) if k1 == "1" else (k1, a1)
                out.append((c1 * c2, kind, args))
        return out
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "f":
        if len(node.args) != 2 or node.keywords:
            raise ValueError("f takes exactly two arguments")
        return [(Affine(1), "f", tuple(_affine(a) for a in node.args))]
    raise ValueError(f"unsupported syntax: {ast.dump(node)}")


def _affine(node: ast.AST) -> Affine:
    total = Affine(0)
    for c, kind, _ in _expand(node):
        if kind != "1":
            raise ValueError("f-argument must be affine in the parameters")
        total = total + c
    return total


def parse_terms(text: str) -> list[Term]:
    terms = _expand(ast.parse(text, mode="eval"))
    const = Affine(0)
    out = []
    for c, kind, args in terms:
        if kind == "1":
            const = const + c
        else:
            out.append((c, kind, args))
    if const.const or const.coefs:
        out.append((const, "1", ()))
    return out


# -------------------------------------------------------------- limits


def _group_total(groups: dict, zero_tol: float = 1e-13) -> float | None:
    """Numeric sum of divergent coefficients; None if it involves free symbols."""
    total = 0.0
    for (kind, keys), (coef, args) in groups.items():
        if coef == 0:
            continue
        if any(not a.is_const() for a in args):
            return None
        total += float(coef) * _kernel_value(kind, args)
    return 0.0 if abs(total) < zero_tol else total


def limit_terms(terms: Iterable[Term], p: str) -> tuple[list[Term], float]:
    """Eliminate p -> +inf.  Returns (terms, divergence) where divergence is
    0.0 for a finite limit and +-inf otherwise."""
    out: list[Term] = []
    lin: dict = {}  # coefficient of p
    half = 0.0  # coefficient of sqrt(p)

    def add_lin(c1: Fraction, kind: str, args: tuple) -> None:
        if c1 == 0:
            return
        key = (kind, tuple(a.key() for a in args))
        prev = lin.get(key, (Fraction(0), args))[0]
        lin[key] = (prev + c1, args)

    for coef, kind, args in terms:
        c1, c0 = coef.coeff(p), coef.drop(p)
        if kind == "1":
            out.append((c0, "1", ()))
            add_lin(c1, "1", ())
        elif kind == "r":
            beta, b0 = args[0].coeff(p), args[0].drop(p)
            if beta < 0:
                raise DomainError(f"argument {args[0]} tends to -inf")
            if beta == 0:
                out.append((c0, "r", (b0,)))
                add_lin(c1, "r", (b0,))
            else:
                half += float(c1) / math.sqrt(beta)
        else:
            a, b = args
            alpha, beta = a.coeff(p), b.coeff(p)
            if alpha < 0 or beta < 0:
                raise DomainError(f"argument of f({a}, {b}) tends to -inf")
            if alpha == 0 and beta == 0:
                out.append((c0, "f", (a, b)))
                add_lin(c1, "f", (a, b))
            elif alpha > 0 and beta > 0:
                half += float(c1) * math.sqrt(float((alpha + beta) / (alpha * beta)))
            else:
                grow, fixed = (alpha, b.drop(p)) if beta == 0 else (beta, a.drop(p))
                correction = (fixed + Affine(-2)).scale(c1 / (2 * grow))
                out.append((c0 + correction, "r", (fixed,)))
                add_lin(c1, "r", (fixed,))
    total = _group_total(lin)
    if total is None:
        raise DomainError(f"limit in {p} diverges or depends on another infinite parameter")
    if total:
        return [], math.copysign(INF, total)
    if abs(half) > 1e-13:
        return [], math.copysign(INF, half)
    return out, 0.0


# ------------------------------------------------------------- registry


@dataclass(frozen=True)
class Param:
    name: str
    minimum: float = 1
    default: float | None = None


@dataclass
class BoundExpression:
    id: str
    formula: str
    params: tuple[Param, ...]
    note: str = ""
    terms: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.terms = parse_terms(self.formula)
        names = {p.name for p in self.params}
        used = {k for c, _, args in self.terms for a in (c, *args) for k in a.coefs}
        if used - names:
            raise ValueError(f"{self.id}: undeclared parameters {sorted(used - names)}")

    @property
    def param_names(self) -> list[str]:
        return [p.name for p in self.params]

    def domain(self) -> str:
        parts = []
        for p in self.params:
            s = f"{p.name}>={p.minimum:g}"
            if p.default is not None:
                s += f" (default {p.default:g})"
            parts.append(s)
        return ", ".join(parts)


REGISTRY: dict[str, BoundExpression] = {}


def register(id: str, formula: str, params: str, note: str = "") -> BoundExpression:
    """params: space-separated 'name', 'name>=m' or 'name>=m=default' items."""
    ps = []
    for item in params.split():
        name, _, rest = item.partition(">=")
        minimum, default = 1.0, None
        if rest:
            lo, _, dflt = rest.partition("=")
            minimum = float(lo)
            if dflt:
                default = INF if dflt == "inf" else float(dflt)
        ps.append(Param(name, minimum, default))
    expr = BoundExpression(id, formula, tuple(ps), note)
    if id in REGISTRY:
        raise ValueError(f"duplicate expression id {id}")
    REGISTRY[id] = expr
    return expr


# shared pieces
_U1 = "-f(du,dw) + f(du-1,dw)"  # parent edge when u loses one child
_U2 = "-f(du,dw) + f(du-2,dw)"

# B1-branch bounds: u loses one child, v gains one
register("change-10",
         f"-f(du,dv) + f(du-1,dv+1) + (du-k1-2)*(-f(du,dx) + f(du-1,dx)) {_U1}",
         "du>=3 dv>=1 dx>=1=4 k1>=0 dw>=1")
register("change-20",
         f"-f(du,4) + f(du-1,5) + (du-k1-2)*(-f(du,4) + f(du-1,4)) {_U1}",
         "du>=3 k1>=0 dw>=1=inf")
register("change-20-20",
         f"-f(du,4) + f(du-1,5) + (du-3)*(-f(du,4) + f(du-1,4)) {_U1}",
         "du>=3 dw>=1=inf")
register("change-60",
         "-f(du,dv) + f(du-1,dv+1) + (du-k1-1)*(-f(du,dx) + f(du-1,dx))",
         "du>=3 dv>=1 dx>=1=4 k1>=0")
register("change-70",
         "-f(du,4) + f(du-1,5) + (du-k1-1)*(-f(du,4) + f(du-1,4))",
         "du>=3 k1>=0=1")
register("change-20-2a",
         f"-f(du,3) + f(du-1,4) + (du-k1-2)*(-f(du,3) + f(du-1,3)) {_U1}",
         "du>=3 k1>=0 dw>=1=inf")
register("change-20-2",
         f"-f(du,3) + f(du-1,4) + (du-3)*(-f(du,3) + f(du-1,3)) {_U1}",
         "du>=3 dw>=1=inf")
register("change-60-2",
         "-f(du,dv) + f(du-1,dv+1) + (du-k1-1)*(-f(du,dx) + f(du-1,dx))",
         "du>=3 dv>=1 dx>=1=3 k1>=0")
register("change-70-2",
         "-f(du,3) + f(du-1,4) + (du-k1)*(-f(du,3) + f(du-1,3))",
         "du>=3 k1>=0=1",
         note="coefficient du-k1 as printed; the parallel root bound uses du-k1-1")
_B1_TAIL = "-f(4,2) + f(du-2,3) - f(2,1) + f(du-2,3)"
register("change-80",
         f"-f(du,4) + f(du-2,3) + (du-7)*(-f(du,dx) + f(du-2,dx)) {_B1_TAIL} {_U2}",
         "du>=7 dx>=1=4 dw>=1")
register("change-90",
         f"-f(du,4) + f(du-2,3) + (du-7)*(-f(du,4) + f(du-2,4)) {_B1_TAIL} {_U2}",
         "du>=7 dw>=1=inf")
register("change-100",
         f"-f(du,4) + f(du-2,3) + (du-5)*(-f(du,dx) + f(du-2,dx)) {_B1_TAIL}",
         "du>=5 dx>=1=4")
register("change-110",
         f"-f(du,4) + f(du-2,3) + (du-5)*(-f(du,4) + f(du-2,4)) {_B1_TAIL}",
         "du>=5")

# B2-branch configurations
register("change-B2-10", "-f(dw,3) + f(dw,4) - f(3,3) + f(3,2) - f(3,3) + f(4,3)", "dw>=3")
register("change-B2-20", "-f(3,3) + f(3,4) - f(3,3) + f(3,2) - f(3,3) + f(4,3)", "")
register("change-B2-30", "-f(dw,3) + f(dw,4) - f(3,3) + f(4,2)", "dw>=3")
register("change-B2-40",
         "-f(dz,3) + f(dz,6) - f(3,3) + f(6,2) - f(3,3) + f(2,1) + 3*(-f(3,3) + f(6,3))",
         "dz>=3")
register("change-B2-50",
         "-f(dz,4) + f(dz,dv1+dv2+1) - f(4,dv1) + f(2,1) - f(4,dv2) + f(3,2)"
         " - f(4,3) + f(dv1+dv2+1,3) + (dv1-1)*(-f(dv1,3) + f(dv1+dv2+1,3))"
         " + (dv2-1)*(-f(dv2,3) + f(dv1+dv2+1,3)) - f(3,3) + f(dv1+dv2+1,3)",
         "dz>=3 dv1>=3 dv2>=3")
_W2 = "- f(dw,3) + f(3,2) - f(dw,3) + f(2,1)"
register("change-B2-60",
         "-f(dz,dw) + f(dz,dw-2) + n3*(-f(dx,dw) + f(dx,dw-2)) + 5*(-f(3,dw) + f(4,dw-2))"
         f" + (n2-5)*(-f(3,dw) + f(3,dw-2)) {_W2}",
         "dz>=1=inf dw>=3 n3>=0 n2>=5 dx>=1=4")
register("change-B2-66",
         "-f(dz,dw) + f(dz,dw-2) + (dw-13)*(-f(4,dw) + f(4,dw-2)) + 5*(-f(3,dw) + f(4,dw-2))"
         f" + 7*(-f(3,dw) + f(3,dw-2)) {_W2}",
         "dz>=1=inf dw>=13")
register("change-B2-67",
         "-f(dz,13) + f(dz,11) + 5*(-f(3,13) + f(4,11)) + 7*(-f(3,13) + f(3,11))"
         " - f(13,3) + f(3,2) - f(13,3) + f(2,1)",
         "dz>=1=inf")
register("change-B2-60-12",
         "-f(dz,dw) + f(dz,dw-2) + (dw-n2-1)*(-f(dx,dw) + f(dx,dw-2))"
         " + 5*(-f(3,dw) + f(4,dw-2))"
         f" + (n2-5)*(-f(3,dw) + f(3,dw-2)) {_W2}",
         "dz>=1=inf dw>=3 n2>=5 dx>=1=8")
register("change-B2-100",
         "n3*(-f(4,dw) + f(4,dw-2)) + 5*(-f(3,dw) + f(4,dw-2))"
         f" + (n2-5)*(-f(3,dw) + f(3,dw-2)) {_W2}",
         "dw>=3 n3>=0 n2>=5")
register("change-B2-100-22",
         "(dw-n2)*(-f(dx,dw) + f(dx,dw-2)) + 5*(-f(3,dw) + f(4,dw-2))"
         f" + (n2-5)*(-f(3,dw) + f(3,dw-2)) {_W2}",
         "dw>=3 n2>=5 dx>=1=13")
register("change-B2-67-root",
         "(dw-11)*(-f(4,11) + f(4,9)) + 5*(-f(3,11) + f(4,9)) + 7*(-f(3,11) + f(3,9))"
         " - f(11,3) + f(3,2) - f(11,3) + f(2,1)",
         "dw>=11=11",
         note="printed coefficient 7; the general root bound at n2=11 gives 6")
register("change-B2-67-22",
         "(dw-11)*(-f(11,11) + f(11,9)) + 5*(-f(3,11) + f(4,9)) + 7*(-f(3,11) + f(3,9))"
         " - f(11,3) + f(3,2) - f(11,3) + f(2,1)",
         "dw>=11=11",
         note="printed coefficient 7; the general root bound at n2=11 gives 6")
register("lemma-B2-30.g1", "4*(-f(3,dw) + f(4,dw-2)) - f(dw,3) + f(3,2) - f(dw,3) + f(2,1)",
         "dw>=3")
register("lemma-B2-30.g2",
         "(dw-13)*(-f(4,dw) + f(4,dw-2)) + 7*(-f(3,dw) + f(3,dw-2)) - f(3,dw) + f(4,dw-2)",
         "dw>=3")

# at most six B2-branches under a non-root parent.
# z's other children keep their degree x while z grows, so their edges change
# from f(x, dz); the displayed formulas write f(x, dw) there.  The main ids use
# dz (this reproduces every constant, including the dz -> inf limits); the
# ".printed" ids keep the literal form for comparison.
_G10 = ("-f(dz,dw) + f(2,1) + 5*(-f(3,dw) + f(4,dw+dz-4)) - f(3,dw) + f(4,2) - f(3,dw) + f(2,1)"
        " + ({c})*(-f(3,{d}) + f(3,dz+dw-4))")
_NOTE = "z-children edges read as f(x, dz); the display writes f(x, dw)"
_LIT = "literal display, with f(x, dw) on the edges of z's other children"
for _id, _c, _lo in (("g(dz,8)", "dz-2", 3), ("g_r(dz,8)", "dz-1", 3)):
    register(f"lemma-B2-10.{_id}", _G10.format(c=_c, d="dz"), f"dz>={_lo} dw>=3=8", note=_NOTE)
    register(f"lemma-B2-10.{_id}.printed", _G10.format(c=_c, d="dw"), f"dz>={_lo} dw>=3=8", note=_LIT)
_HEAD = ("-f(dz,dw) + f(2,1) - f(3,dw) + f(2,1) + 2*(-f(3,dw) + f(4,2))")
_S = "dw+dz-5"
_G21 = (f"{_HEAD} + 5*(-f(3,dw) + f(4,{_S})) + 3*(-f(3,dz) + f(4,{_S}))"
        f" + (dw-9)*(-f(3,dw) + f(3,{_S})) + ({{c}})*(-f(3,{{d}}) + f(3,{_S}))")
_G221 = (f"{_HEAD} + 3*(-f(3,dw) + f(5,{_S})) + 2*(-f(3,dw) + f(4,{_S}))"
         f" + (dw-9)*(-f(3,dw) + f(3,{_S}))")
_G222 = (f"{_HEAD} + 8*(-f(3,dw) + f(4,{_S})) + (dw-12)*(-f(3,dw) + f(3,{_S}))")
_ZK = f" + ({{c}})*(-f(4,{{d}}) + f(4,{_S}))"
for _id, _body, _c, _dom in (
    ("g21", _G21, "dz-5", "dz>=5 dw>=9"),
    ("g21r", _G21, "dz-4", "dz>=4 dw>=9"),
    ("g221", _G221 + _ZK, "dz-4", "dz>=4 dw>=9"),
    ("g221r", _G221 + _ZK, "dz-3", "dz>=3 dw>=9"),
    ("g222", _G222 + _ZK, "dz-4", "dz>=4 dw>=12"),
    ("g222r", _G222 + _ZK, "dz-3", "dz>=3 dw>=12"),
):
    register(f"lemma-B2-10.{_id}", _body.format(c=_c, d="dz"), _dom, note=_NOTE)
    register(f"lemma-B2-10.{_id}.printed", _body.format(c=_c, d="dw"), _dom, note=_LIT)

# proper T_k-branch with more than six B2-branches
_TK = ("-f(du,3) + f(du-1,4) + ({a})*(-f(du,3) + f(du-1,3))"
       " + ({b})*(-f(du,4) + f(du-1,4)) - f(du,dw) + f(du-1,dw)")
register("pro-Tk-B1.change-10-b", _TK.format(a="k2-1", b="du-k2-k1-1"), "du>=3 k1>=0 k2>=1 dw>=1")
register("pro-Tk-B1.change-20-b", _TK.format(a="6", b="du-9"), "du>=9 dw>=1=inf")
register("pro-Tk-B1.change-30-b", _TK.format(a="k2-1", b="du-k2-k1"), "du>=3 k1>=0 k2>=1 dw>=1")
register("pro-Tk-B1.change-40-b", _TK.format(a="6", b="du-8"), "du>=8 dw>=1=inf")

# at most six B2-branches, refined
register("lemma-B2-20.f1",
         "-f(dz,dw) + f(2,1) - f(3,dw) + f(2,1) - f(3,dw) + f(4,2) + 5*(-f(3,dw) + f(4,dz+dw-4))"
         " + (n2-7)*(-f(3,dw) + f(3,dz+dw-4)) + (dw-n2-1)*(-f(4,dw) + f(4,dz+dw-4))"
         " + (dz-2)*(-f(4,dz) + f(4,dz+dw-4))",
         "dz>=3 dw>=3 n2>=7", note=_NOTE)
register("lemma-B2-20.f1.printed",
         "-f(dz,dw) + f(2,1) - f(3,dw) + f(2,1) - f(3,dw) + f(4,2) + 5*(-f(3,dw) + f(4,dz+dw-4))"
         " + (n2-7)*(-f(3,dw) + f(3,dz+dw-4)) + (dw-n2-1)*(-f(4,dw) + f(4,dz+dw-4))"
         " + (dz-2)*(-f(4,dw) + f(4,dz+dw-4))",
         "dz>=3 dw>=3 n2>=7", note=_LIT)
register("lemma-B2-20.f2",
         "-f(dz,dw) + f(dz,dw-2) - f(3,dw) + f(2,1) - f(3,dw) + f(4,2) + 5*(-f(3,dw) + f(4,dw-2))"
         " + (n2-7)*(-f(3,dw) + f(3,dw-2)) + (dw-n2-1)*(-f(8,dw) + f(8,dw-2))",
         "dz>=1=inf dw>=3 n2>=7")

# at most eleven B2-branches
_C1 = ("-f(4,3) + f(2,1) + 2*(-f(4,3) + f(dw1+2,4)) + n1*(-f(dw1,3) + f(dw1+2,3))"
       " + (dw1-n1-{m})*(-f(dw1,4) + f(dw1+2,4))")
register("thm.case1.sub1.g",
         "-f(dz1,4) + f(dz1,2) " + "+ " + _C1.format(m=1) + " - f(dz1,dw1) + f(dz1,dw1+2)",
         "dz1>=1=inf dw1>=3 n1>=0")
register("thm.case1.sub2.g",
         "-f(dz1,5) + f(dz1,4) - f(5,3) + f(4,2) - f(5,3) + f(2,1) + 2*(-f(5,3) + f(dw1+2,4))"
         " + n1*(-f(dw1,3) + f(dw1+2,3)) + (dw1-n1-1)*(-f(dw1,4) + f(dw1+2,4))"
         " - f(dz1,dw1) + f(dz1,dw1+2)",
         "dz1>=1=inf dw1>=3 n1>=0",
         note="leading pair read as -f(dz1,5) + f(dz1,4), the change at the parent of a degree-5 vertex")
register("thm.case3.sub1.g",
         "-f(dw1,4) + f(dw1,2) + " + _C1.format(m=2) + " - f(dw1,dw1) + f(dw1,dw1+2)",
         "dw1>=3 n1>=0")
register("thm.case3.sub2.g",
         "-f(dw1,5) + f(dw1,4) - f(5,3) + f(4,2) - f(5,3) + f(2,1) + 2*(-f(5,3) + f(dw1+2,4))"
         " + n1*(-f(dw1,3) + f(dw1+2,3)) + (dw1-n1-2)*(-f(dw1,4) + f(dw1+2,4))"
         " - f(dw1,dw1) + f(dw1,dw1+2)",
         "dw1>=3 n1>=0",
         note="leading pair read as -f(dw1,5) + f(dw1,4)")
register("thm.B11.g(n13)",
         "-f(n13+8,n13+8) + f(n13+8,n13+12) - f(n13+8,8) + f(2,1) - f(8,3) + f(4,2)"
         " + 5*(-f(8,3) + f(n13+12,3)) + n13*(-f(n13+8,4) + f(n13+12,4))"
         " + 4*(-f(n13+8,3) + f(n13+12,4)) + 2*(-f(n13+8,3) + f(n13+12,3))",
         "n13>=0")
register("thm.B121.g(n13)",
         "-f(n13+7,8) + f(2,1) - f(8,3) + f(4,2) + 5*(-f(8,3) + f(n13+11,3))"
         " + n13*(-f(n13+7,4) + f(n13+11,4)) + 4*(-f(n13+7,3) + f(n13+11,4))"
         " + 2*(-f(n13+7,3) + f(n13+11,3))",
         "n13>=0")
_W1, _W2B, _S2 = "n13+n12+1", "n22+n21+1", "n13+n12+n22-1"
register("thm.B122.g",
         f"-f({_W1},{_W2B}) + f(2,1) - f({_W2B},3) + f(4,2)"
         f" + (n22-1)*(-f({_W2B},3) + f({_S2},3)) + n13*(-f({_W1},4) + f({_S2},4))"
         f" + n21*(-f({_W1},3) + f({_S2},4)) + 3*(-f({_W1},3) + f({_S2},4))"
         f" + (n12+n22-n21-4)*(-f({_W1},3) + f({_S2},3))",
         "n13>=0 n12>=1 n22>=1 n21>=0")
register("thm.B2.g(dw1)",
         "-f(8,dz2) + f(4,dz2) - f(8,3) + f(2,1) - f(8,3) + f(4,2) + 3*(-f(8,3) + f(dw1+4,4))"
         " - f(dw1,3) + f(dw1+4,4) + 6*(-f(dw1,3) + f(dw1+4,3))",
         "dz2>=1=inf dw1>=3")


# ------------------------------------------------------------ evaluation


def get(id: str) -> BoundExpression:
    try:
        return REGISTRY[id]
    except KeyError:
        raise UnknownExpression(id) from None


def _bind(expr: BoundExpression, params: Mapping[str, float]) -> dict[str, float]:
    unknown = set(params) - set(expr.param_names)
    if unknown:
        raise DomainError(f"{expr.id} has no parameter(s) {sorted(unknown)}; "
                          f"expected {expr.param_names}")
    env = {}
    for p in expr.params:
        v = params.get(p.name, p.default)
        if v is None:
            raise DomainError(f"{expr.id}: missing parameter {p.name}")
        v = float(v)
        if math.isnan(v) or v < p.minimum:
            raise DomainError(f"{expr.id}: {p.name}={v:g} outside domain {p.name}>={p.minimum:g}")
        env[p.name] = v
    return env


def evaluate(id: str, params: Mapping[str, float] | None = None, **kw) -> float:
    """Value of a catalogued expression; parameters equal to inf are limits."""
    expr = get(id)
    env = _bind(expr, {**(params or {}), **kw})
    finite = {k: v for k, v in env.items() if not math.isinf(v)}
    terms = [(c.subs(finite), kind, tuple(a.subs(finite) for a in args))
             for c, kind, args in expr.terms]
    for name in expr.param_names:
        if math.isinf(env[name]):
            terms, div = limit_terms(terms, name)
            if div:
                return div
    return math.fsum(c.value() * _kernel_value(kind, args) for c, kind, args in terms)


def parse_assignments(items: Sequence[str]) -> dict[str, float]:
    """['du=7', 'dw=inf'] -> {'du': 7.0, 'dw': inf}."""
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ValueError(f"expected name=value, got {item!r}")
        out[name.strip()] = float(value)
    return out


# ------------------------------------------------- thresholds and probes


def smallest_negative_threshold(id: str, param: str, search_range: Iterable[int] = range(3, 201),
                                fixed: Mapping[str, float] | None = None) -> int:
    """Least value of ``param`` in the range with a negative expression value.

    The expression is first checked to be nonincreasing on the whole range.
    """
    fixed = dict(fixed or {})
    xs = list(search_range)
    vals = [evaluate(id, {**fixed, param: x}) for x in xs]
    for i in range(1, len(xs)):
        if vals[i] > vals[i - 1] + 1e-15:
            raise NotMonotone(f"{id} increases in {param} between {xs[i - 1]} and {xs[i]}")
    for x, v in zip(xs, vals):
        if v < 0:
            return x
    raise NeverNegative(f"{id} is nonnegative for {param} in {xs[0]}..{xs[-1]}")


@dataclass
class ProbeResult:
    ok: bool
    direction: str
    points: int
    first_violation: tuple | None = None
    shape: str = ""


def monotonicity_probe(target: str | Callable[[float], float], param: str | None = None,
                       grid: Iterable[float] = (), direction: str = "nonincreasing",
                       fixed: Mapping[str, float] | None = None, tol: float = 1e-15) -> ProbeResult:
    """Check the sampled direction of change along a grid.

    ``target`` is a catalogue id (varied in ``param``) or a one-argument
    callable.  direction="report" only classifies the sampled shape.
    """
    if callable(target):
        fn = target
    else:
        base = dict(fixed or {})
        fn = lambda x: evaluate(target, {**base, param: x})  # noqa: E731
    xs = list(grid)
    ys = [fn(x) for x in xs]
    ups = [(xs[i - 1], xs[i]) for i in range(1, len(xs)) if ys[i] > ys[i - 1] + tol]
    downs = [(xs[i - 1], xs[i]) for i in range(1, len(xs)) if ys[i] < ys[i - 1] - tol]
    shape = ("constant" if not ups and not downs else "nonincreasing" if not ups
             else "nondecreasing" if not downs else "mixed")
    if direction == "report":
        return ProbeResult(True, direction, len(xs), None, shape)
    bad = ups if direction == "nonincreasing" else downs
    return ProbeResult(not bad, direction, len(xs), bad[0] if bad else None, shape)


def g_shift(x: float, y: float, dx: float, dy: float) -> float:
    """-f(x, y) + f(x + dx, y - dy)."""
    return -edge_f(x, y) + edge_f(x + dx, y - dy)


def shift_grid_probe(xs: Sequence[float] = tuple(range(2, 41)),
                     ys: Sequence[float] = tuple(range(2, 41)),
                     deltas: Sequence[float] = (0, 0.5, 1, 2, 3, 5, 10),
                     tol: float = 1e-15) -> list[tuple]:
    """Violations of: g(x,y) = -f(x,y) + f(x+dx, y-dy) increases in x and
    decreases in y (x, y >= 2, dx >= 0, 0 <= dy < y, f-arguments >= 1)."""
    bad = []
    for dx in deltas:
        for dy in deltas:
            for y in ys:
                if y - dy < 1:
                    continue
                row = [g_shift(x, y, dx, dy) for x in xs]
                bad += [("x", xs[i], y, dx, dy) for i in range(1, len(xs)) if row[i] < row[i - 1] - tol]
            for x in xs:
                col = [(y, g_shift(x, y, dx, dy)) for y in ys if y - dy >= 1]
                bad += [("y", x, col[i][0], dx, dy) for i in range(1, len(col))
                        if col[i][1] > col[i - 1][1] + tol]
    return bad


# ------------------------------------------------ forbidden configurations


def _min_k1(id: str, du: int, k1_max: int) -> int | None:
    for k1 in range(1, k1_max + 1):
        if evaluate(id, du=du, k1=k1) < 0:
            return k1
    return None


@dataclass
class ForbiddenTables:
    subtree: list[tuple[int, int]]           # (k2, least k1), u has a parent
    subtree_b2b1: list[tuple[int, int]]      # same, branch built from B2 and B1 only
    subtree_by_du: list[tuple[int, int | None]]
    subtree_b2b1_by_du: list[tuple[int, int | None]]
    root_by_du: list[tuple[int, int | None]]
    root_b2b1_by_du: list[tuple[int, int | None]]

    def as_rows(self) -> list[tuple[str, int, int | None]]:
        out = []
        for name in ("subtree", "subtree_b2b1", "subtree_by_du", "subtree_b2b1_by_du",
                     "root_by_du", "root_b2b1_by_du"):
            out += [(name, key, val) for key, val in getattr(self, name)]
        return out


def _by_k2(id: str, k2_values: Iterable[int], k1_cap: int = 60) -> list[tuple[int, int]]:
    rows = []
    for k2 in k2_values:
        k1 = next((k1 for k1 in range(1, k1_cap + 1)
                   if evaluate(id, du=k1 + k2 + 1, k1=k1) < 0), None)
        rows.append((k2, k1))
    return rows


def forbidden_configuration_table() -> ForbiddenTables:
    """Least number k1 of B1-branches that makes the transformation profitable.

    Subtree case: the root u has a parent, d(u) = k1 + k2 + 1, evaluated on
    change-20 (children of degree <= 4) and change-20-2a (B2/B1 only).  Root
    case: d(u) = k1 + k2, evaluated on change-70 and change-70-2 per d(u).
    """
    return ForbiddenTables(
        subtree=_by_k2("change-20", range(1, 13)),
        subtree_b2b1=_by_k2("change-20-2a", range(1, 8)),
        subtree_by_du=[(du, _min_k1("change-20", du, du - 1)) for du in range(14, 7, -1)],
        subtree_b2b1_by_du=[(du, _min_k1("change-20-2a", du, du - 1)) for du in range(9, 5, -1)],
        root_by_du=[(du, _min_k1("change-70", du, du - 1)) for du in range(12, 5, -1)],
        root_b2b1_by_du=[(du, _min_k1("change-70-2", du, du - 1)) for du in range(7, 4, -1)],
    )


# ------------------------------------------------------------ golden suite


@dataclass(frozen=True)
class Golden:
    id: str
    params: tuple[tuple[str, float], ...]
    expected: float


def _g(id: str, expected: float, **params) -> Golden:
    return Golden(id, tuple(params.items()), expected)


GOLDEN: tuple[Golden, ...] = (
    _g("change-20-20", -0.0000943005, du=14),
    _g("change-70", -0.000580929, du=12),
    _g("change-90", -0.0145446, du=7),
    _g("change-110", -0.00582154, du=5),
    _g("change-B2-20", -0.0018988),
    _g("change-B2-40", -0.0913482, dz=3),
    _g("change-B2-50", -0.186635, dz=4, dv1=4, dv2=4),
    _g("change-B2-50", -0.16395, dz=3, dv1=4, dv2=4),
    _g("change-B2-67", -0.0107055),
    _g("change-B2-100", -0.00974369, dw=11, n3=0, n2=11),
    _g("change-B2-100-22", -0.00974369, dw=11, n2=11, dx=11),
    _g("lemma-B2-10.g(dz,8)", -0.00136859, dz=8),
    _g("lemma-B2-10.g21", -0.0514586, dz=9, dw=9),
    _g("lemma-B2-10.g21", -0.0538142, dz=10, dw=10),
    _g("lemma-B2-10.g21", -0.0541005, dz=11, dw=11),
    _g("lemma-B2-10.g21", -0.0531217, dz=12, dw=12),
    _g("lemma-B2-10.g21", -0.0510972, dz=16, dw=13),
    _g("lemma-B2-10.g221", -0.000496363, dz=9, dw=9),
    _g("lemma-B2-10.g221", -0.00763911, dz=10, dw=10),
    _g("lemma-B2-10.g221", -0.00696979, dz=INF, dw=11),
    _g("lemma-B2-10.g222", -0.0704253, dz=INF, dw=12),
    _g("lemma-B2-10.g222", -0.061309, dz=INF, dw=13),
    _g("pro-Tk-B1.change-20-b", -0.05141846, du=15),
    _g("pro-Tk-B1.change-40-b", -0.048948, du=14),
    _g("thm.case1.sub1.g", -0.0222781, dw1=INF, n1=1),
    _g("thm.case1.sub1.g", -0.0222781, dw1=INF, n1=2),
    _g("thm.case1.sub1.g", -0.0222781, dw1=INF, n1=3),
    _g("thm.case1.sub1.g", -0.0186023, dw1=5, n1=4),
    _g("thm.case1.sub1.g", -0.0151247, dw1=6, n1=5),
    _g("thm.case1.sub1.g", -0.0131643, dw1=7, n1=6),
    _g("thm.case1.sub2.g", -0.0628222, dw1=INF, n1=1),
    _g("thm.case1.sub2.g", -0.0628222, dw1=INF, n1=2),
    _g("thm.case1.sub2.g", -0.0628222, dw1=INF, n1=3),
    _g("thm.case1.sub2.g", -0.0591464, dw1=5, n1=4),
    _g("thm.case1.sub2.g", -0.0556687, dw1=6, n1=5),
    _g("thm.case1.sub2.g", -0.0537084, dw1=7, n1=6),
    _g("thm.case3.sub1.g", -0.0222781, dw1=INF, n1=1),
    _g("thm.case3.sub2.g", -0.0515202, dw1=5, n1=1),
    _g("thm.case3.sub2.g", -0.0421011, dw1=5, n1=2),
    _g("thm.case3.sub2.g", -0.0326819, dw1=5, n1=3),
    _g("thm.case3.sub2.g", -0.0399417, dw1=6, n1=4),
    _g("thm.case3.sub2.g", -0.0442738, dw1=7, n1=5),
    _g("thm.case3.sub2.g", -0.0470986, dw1=8, n1=6),
    _g("thm.B11.g(n13)", -0.0362243, n13=INF),
    _g("thm.B121.g(n13)", -0.0362242, n13=INF),
    _g("thm.B122.g", -0.0640574, n13=0, n12=9, n22=3, n21=1),
    _g("thm.B2.g(dw1)", -0.0154895, dw1=11),
)

GOLDEN_TOL = 1e-6


@dataclass
class GoldenRow:
    id: str
    params: str
    expected: float
    actual: float
    diff: float
    passed: bool


def _fmt_params(params: Sequence[tuple[str, float]]) -> str:
    return " ".join(f"{k}={'inf' if math.isinf(v) else f'{v:g}'}" for k, v in params)


def golden_suite(tol: float = GOLDEN_TOL) -> tuple[list[GoldenRow], float]:
    """Evaluate every golden row; returns (rows, elapsed seconds)."""
    started = time.perf_counter()
    rows = []
    for g in GOLDEN:
        actual = evaluate(g.id, dict(g.params))
        diff = abs(actual - g.expected)
        rows.append(GoldenRow(g.id, _fmt_params(g.params), g.expected, actual, diff, diff <= tol))
    return rows, time.perf_counter() - started


def golden_csv(rows: Sequence[GoldenRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "params", "expected", "actual", "abs_diff", "pass"])
    for r in rows:
        w.writerow([r.id, r.params, repr(r.expected), f"{r.actual:.10g}", f"{r.diff:.3e}",
                    "yes" if r.passed else "no"])
    return buf.getvalue()
