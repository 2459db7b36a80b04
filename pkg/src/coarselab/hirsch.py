"""Hirsch length over a small grammar of elementary amenable constructions.

Syntax::

    Trivial | F(order) | Z(n) | VAb(n) | Local(n)
    Ext(kernel, quotient) | Union(G1, G2, ..., limit=inf) | Wreath(F(p), H)

Long names (``Finite``, ``FreeAbelian``, ``VirtuallyAbelian``, ``LocalRank``,
``Extension``, ``IncreasingUnion``) are accepted too.  ``limit=inf`` marks an
increasing union whose ranks are unbounded.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class Trivial:
    def __str__(self):
        return "Trivial"


@dataclass(frozen=True)
class Finite:
    order: int

    def __str__(self):
        return f"F({self.order})"


@dataclass(frozen=True)
class FreeAbelian:
    rank: int

    def __str__(self):
        return f"Z({self.rank})"


@dataclass(frozen=True)
class VirtuallyAbelian:
    rank: int

    def __str__(self):
        return f"VAb({self.rank})"


@dataclass(frozen=True)
class LocalRank:
    """Countable, locally virtually ``Z^n`` (``Z[1/m]`` is ``LocalRank(1)``)."""

    rank: int

    def __str__(self):
        return f"Local({self.rank})"


@dataclass(frozen=True)
class Extension:
    kernel: object
    quotient: object

    def __str__(self):
        return f"Ext({self.kernel}, {self.quotient})"


@dataclass(frozen=True)
class IncreasingUnion:
    terms: tuple
    limit: str | None = None

    def __str__(self):
        inner = ", ".join(str(t) for t in self.terms)
        if self.limit:
            inner += f", limit={self.limit}"
        return f"Union({inner})"


@dataclass(frozen=True)
class Wreath:
    base: Finite
    acting: object

    def __str__(self):
        return f"Wreath({self.base}, {self.acting})"


_LEAVES = {"F": Finite, "Finite": Finite, "Z": FreeAbelian, "FreeAbelian": FreeAbelian,
           "VAb": VirtuallyAbelian, "VirtuallyAbelian": VirtuallyAbelian,
           "Local": LocalRank, "LocalRank": LocalRank}
_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z_0-9]*)|(\d+)|(.))")


def _tokens(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        name, num, sym = m.groups()
        if name:
            out.append(("name", name))
        elif num:
            out.append(("num", int(num)))
        elif sym and not sym.isspace():
            out.append(("sym", sym))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokens(text)
        self.i = 0
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ValidationError(f"malformed expression {self.text!r}: expected {want}, got {tok[1]!r}")
        self.i += 1
        return tok[1]

    def expr(self):
        name = self.take("name")
        if name == "Trivial":
            return Trivial()
        self.take("sym", "(")
        if name in _LEAVES:
            n = self.take("num")
            self.take("sym", ")")
            if _LEAVES[name] is Finite and n < 1:
                raise ValidationError("finite group order must be >= 1")
            return _LEAVES[name](n)
        if name in ("Ext", "Extension"):
            k = self.expr()
            self.take("sym", ",")
            q = self.expr()
            self.take("sym", ")")
            return Extension(k, q)
        if name in ("Wreath",):
            b = self.expr()
            if not isinstance(b, Finite):
                raise ValidationError("the first argument of Wreath must be finite")
            self.take("sym", ",")
            h = self.expr()
            self.take("sym", ")")
            return Wreath(b, h)
        if name in ("Union", "IncreasingUnion"):
            terms, limit = [], None
            while True:
                tok = self.peek()
                if tok == ("name", "limit"):
                    self.take()
                    self.take("sym", "=")
                    limit = self.take("name")
                    if limit != "inf":
                        raise ValidationError("only limit=inf is supported")
                else:
                    terms.append(self.expr())
                if self.peek() == ("sym", ","):
                    self.take()
                    continue
                break
            self.take("sym", ")")
            if not terms:
                raise ValidationError("Union needs at least one term")
            return IncreasingUnion(tuple(terms), limit)
        raise ValidationError(f"unknown constructor {name!r}")


def parse(text):
    p = _Parser(text)
    e = p.expr()
    if p.i != len(p.toks):
        raise ValidationError(f"trailing input in {text!r}")
    return e


def _as_expr(expr):
    return parse(expr) if isinstance(expr, str) else expr


def derive(expr):
    """``(value, lines)`` where ``lines`` is the derivation tree, one node per line."""
    expr = _as_expr(expr)
    lines = []

    def go(e, depth):
        pad = "  " * depth
        at = len(lines)
        lines.append(None)
        if isinstance(e, Trivial):
            v, rule = 0, "trivial group"
        elif isinstance(e, Finite):
            v, rule = 0, "finite group"
        elif isinstance(e, (FreeAbelian, VirtuallyAbelian, LocalRank)):
            v, rule = e.rank, "rank of the (locally, virtually) free abelian part"
        elif isinstance(e, Extension):
            a, b = go(e.kernel, depth + 1), go(e.quotient, depth + 1)
            v, rule = a + b, f"extension: h(kernel) + h(quotient) = {a} + {b}"
        elif isinstance(e, IncreasingUnion):
            vals = [go(t, depth + 1) for t in e.terms]
            if e.limit == "inf":
                v, rule = math.inf, "increasing union with unbounded terms: sup = inf"
            else:
                v, rule = max(vals), f"increasing union: sup of {vals}"
        elif isinstance(e, Wreath):
            go(e.base, depth + 1)
            h = go(e.acting, depth + 1)
            v, rule = h, f"wreath with a finite base: h(acting group) = {h}"
        else:
            raise ValidationError(f"not a group expression: {e!r}")
        lines[at] = f"{pad}h({e}) = {v}    [{rule}]"
        return v

    value = go(expr, 0)
    return value, lines


def hirsch(expr):
    """Hirsch length: 0 for finite, rank for the abelian leaves, additive over
    extensions, sup over increasing unions, ``h(F wr H) = h(H)``."""
    return derive(expr)[0]


@dataclass(frozen=True)
class DimensionBound:
    value: int | float
    expression: str

    def __str__(self):
        return (f"asdim of any box space of {self.expression} along a nested "
                f"normal filtration is at most {self.value}")


def box_dimension_upper_bound(expr):
    """The Hirsch length, read as an upper bound on box-space dimension."""
    expr = _as_expr(expr)
    return DimensionBound(hirsch(expr), str(expr))
