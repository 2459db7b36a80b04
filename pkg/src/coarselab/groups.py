"""Exact arithmetic for the supported finitely generated group families.

Three families are shipped, each with a unique canonical form per element so
that elements can be hashed and deduplicated directly:

``FreeAbelian(rank)``
    integer vectors ``(x_1, ..., x_rank)``.
``BaumslagSolitar(n)``
    BS(1, n) = Z[1/n] x| Z as triples ``(num, exp, t)`` standing for
    ``(num / n**exp, t)``; ``exp`` is reduced until ``n`` no longer divides
    ``num`` (and ``exp == 0`` when ``num == 0``).
``Lamplighter(p)``
    (Z/p) wr Z as ``(cfg, pos)`` where ``cfg`` is a sorted tuple of
    ``(site, value)`` pairs with ``value`` in ``1..p-1``.

Every family also knows its congruence quotients (see :class:`SubgroupSpec`);
the graph construction in :mod:`coarselab.quotients` is family agnostic and
only talks to the ``quotient_*`` methods defined here.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import ClassVar

from .errors import ResourceError, ValidationError

DEFAULT_ELEMENT_CAP = 1_000_000


@dataclass(frozen=True)
class SubgroupSpec:
    """Parameters of a finite-index normal subgroup.

    ``params`` is ``(k_1, ..., k_n)`` for FreeAbelian (the sublattice
    ``k_1 Z + ... + k_n Z``), ``(m, k)`` for BS(1, n) (kernel of the map onto
    ``Z/m x|_n Z/k``) and ``(k,)`` for the lamplighter (kernel onto
    ``(Z/p)^(Z/k) x| Z/k``).
    """

    family: str
    params: tuple

    @classmethod
    def moduli(cls, *ks):
        return cls("free_abelian", tuple(int(k) for k in ks))

    @classmethod
    def congruence(cls, m, k):
        return cls("bs", (int(m), int(k)))

    @classmethod
    def period(cls, k):
        return cls("lamplighter", (int(k),))

    def to_json(self):
        if self.family == "free_abelian":
            return {"family": self.family, "params": {"moduli": list(self.params)}}
        if self.family == "bs":
            m, k = self.params
            return {"family": self.family, "params": {"m": m, "k": k}}
        if self.family == "lamplighter":
            return {"family": self.family, "params": {"period": self.params[0]}}
        raise ValidationError(f"unknown subgroup family {self.family!r}")

    @classmethod
    def from_json(cls, obj):
        fam, p = obj["family"], obj["params"]
        if fam == "free_abelian":
            return cls.moduli(*p["moduli"])
        if fam == "bs":
            return cls.congruence(p["m"], p["k"])
        if fam == "lamplighter":
            return cls.period(p["period"])
        raise ValidationError(f"unknown subgroup family {fam!r}")

    def __str__(self):
        return f"{self.family}{self.params}"


class GroupSpec:
    """Base class for a group family with a fixed symmetric generating set."""

    family: ClassVar[str] = ""

    # group law -------------------------------------------------------------
    def identity(self):
        raise NotImplementedError

    def generators(self):
        """Ordered mapping ``name -> element``; symmetric, identity excluded."""
        raise NotImplementedError

    def multiply(self, g, h):
        raise NotImplementedError

    def inverse(self, g):
        raise NotImplementedError

    def check(self, g):
        """Raise :class:`ValidationError` unless ``g`` is a canonical element."""
        raise NotImplementedError

    # serialisation ---------------------------------------------------------
    def params_json(self):
        raise NotImplementedError

    def to_json(self):
        return {"family": self.family, "params": self.params_json()}

    @staticmethod
    def from_json(obj):
        fam, p = obj["family"], obj.get("params", {})
        if fam == "free_abelian":
            return FreeAbelian(p["rank"])
        if fam == "bs":
            return BaumslagSolitar(p["n"])
        if fam == "lamplighter":
            return Lamplighter(p.get("p", 2))
        raise ValidationError(f"unknown group family {fam!r}")

    # quotients ---------------------------------------------------------------
    def validate_subgroup(self, sub):
        raise NotImplementedError

    def quotient_order(self, sub):
        raise NotImplementedError

    def quotient_labels(self, sub):
        raise NotImplementedError

    def quotient_identity(self, sub):
        raise NotImplementedError

    def quotient_mul(self, sub, u, v):
        raise NotImplementedError

    def quotient_inv(self, sub, u):
        raise NotImplementedError

    def reduce(self, sub, g):
        """Image of the group element ``g`` in ``G / sub``."""
        raise NotImplementedError

    def is_nested(self, deep, shallow):
        """True when ``deep`` is contained in ``shallow``."""
        raise NotImplementedError

    def project_label(self, deep, shallow, label):
        raise NotImplementedError

    def _check_sub_family(self, sub):
        if sub.family != self.family:
            raise ValidationError(
                f"subgroup family {sub.family!r} does not match group {self.family!r}")


@dataclass(frozen=True)
class FreeAbelian(GroupSpec):
    rank: int
    family: ClassVar[str] = "free_abelian"

    def __post_init__(self):
        if self.rank < 1:
            raise ValidationError("FreeAbelian rank must be positive")

    def identity(self):
        return (0,) * self.rank

    def generators(self):
        gens = {}
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            gens[f"e{i + 1}"] = tuple(e)
            e[i] = -1
            gens[f"E{i + 1}"] = tuple(e)
        return gens

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        return tuple(a + b for a, b in zip(g, h))

    def inverse(self, g):
        self.check(g)
        return tuple(-a for a in g)

    def check(self, g):
        if not (isinstance(g, tuple) and len(g) == self.rank
                and all(isinstance(a, int) for a in g)):
            raise ValidationError(f"{g!r} is not an element of Z^{self.rank}")

    def params_json(self):
        return {"rank": self.rank}

    def validate_subgroup(self, sub):
        self._check_sub_family(sub)
        if len(sub.params) != self.rank or any(k < 1 for k in sub.params):
            raise ValidationError(f"need {self.rank} positive moduli, got {sub.params}")

    def quotient_order(self, sub):
        return math.prod(sub.params)

    def quotient_labels(self, sub):
        return itertools.product(*(range(k) for k in sub.params))

    def quotient_identity(self, sub):
        return (0,) * self.rank

    def quotient_mul(self, sub, u, v):
        return tuple((a + b) % k for a, b, k in zip(u, v, sub.params))

    def quotient_inv(self, sub, u):
        return tuple((-a) % k for a, k in zip(u, sub.params))

    def reduce(self, sub, g):
        return tuple(a % k for a, k in zip(g, sub.params))

    def is_nested(self, deep, shallow):
        return all(d % s == 0 for d, s in zip(deep.params, shallow.params))

    def project_label(self, deep, shallow, label):
        return tuple(a % s for a, s in zip(label, shallow.params))


def _bs_normalize(n, num, exp):
    if num == 0:
        return 0, 0
    while exp > 0 and num % n == 0:
        num //= n
        exp -= 1
    return num, exp


@dataclass(frozen=True)
class BaumslagSolitar(GroupSpec):
    """BS(1, n) with ``a = (1, 0)``, ``b = (0, 1)`` and the law
    ``(x1, t1)(x2, t2) = (x1 + n**t1 * x2, t1 + t2)``, so that
    ``b a b^-1 = a^n``."""

    n: int
    family: ClassVar[str] = "bs"

    def __post_init__(self):
        if abs(self.n) < 2:
            raise ValidationError("BS(1, n) needs |n| >= 2")

    def identity(self):
        return (0, 0, 0)

    def generators(self):
        return {"a": (1, 0, 0), "A": (-1, 0, 0), "b": (0, 0, 1), "B": (0, 0, -1)}

    def _scale(self, num, exp, t):
        # num / n**exp times n**t
        if t >= 0:
            return _bs_normalize(self.n, num * self.n ** t, exp)
        return _bs_normalize(self.n, num, exp - t)

    def _add(self, a, ea, b, eb):
        e = max(ea, eb)
        return _bs_normalize(self.n, a * self.n ** (e - ea) + b * self.n ** (e - eb), e)

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        num1, exp1, t1 = g
        num2, exp2, t2 = h
        sn, se = self._scale(num2, exp2, t1)
        num, exp = self._add(num1, exp1, sn, se)
        return (num, exp, t1 + t2)

    def inverse(self, g):
        self.check(g)
        num, exp, t = g
        sn, se = self._scale(-num, exp, -t)
        return (sn, se, -t)

    def check(self, g):
        ok = (isinstance(g, tuple) and len(g) == 3 and all(isinstance(a, int) for a in g))
        if ok:
            num, exp, _ = g
            ok = exp >= 0 and (num != 0 or exp == 0) and (exp == 0 or num % self.n != 0)
        if not ok:
            raise ValidationError(f"{g!r} is not a canonical element of BS(1,{self.n})")

    def as_fraction(self, g):
        from fractions import Fraction
        num, exp, t = g
        return Fraction(num, self.n ** exp), t

    def params_json(self):
        return {"n": self.n}

    def validate_subgroup(self, sub):
        self._check_sub_family(sub)
        m, k = sub.params
        if m < 1 or k < 1:
            raise ValidationError(f"congruence pair needs m, k >= 1, got {sub.params}")
        if math.gcd(m, self.n) != 1:
            raise ValidationError(f"gcd(m={m}, n={self.n}) != 1")
        if pow(self.n, k, m) != 1 % m:
            raise ValidationError(f"n^k = {self.n}^{k} is not 1 mod {m}")

    def quotient_order(self, sub):
        m, k = sub.params
        return m * k

    def quotient_labels(self, sub):
        m, k = sub.params
        return itertools.product(range(m), range(k))

    def quotient_identity(self, sub):
        return (0, 0)

    def quotient_mul(self, sub, u, v):
        m, k = sub.params
        return ((u[0] + pow(self.n, u[1], m) * v[0]) % m, (u[1] + v[1]) % k)

    def quotient_inv(self, sub, u):
        m, k = sub.params
        return ((-pow(self.n, (-u[1]) % k, m) * u[0]) % m, (-u[1]) % k)

    def reduce(self, sub, g):
        m, k = sub.params
        num, exp, t = g
        return ((num * pow(self.n, -exp, m)) % m if m > 1 else 0, t % k)

    def is_nested(self, deep, shallow):
        return deep.params[0] % shallow.params[0] == 0 and deep.params[1] % shallow.params[1] == 0

    def project_label(self, deep, shallow, label):
        return (label[0] % shallow.params[0], label[1] % shallow.params[1])


@dataclass(frozen=True)
class Lamplighter(GroupSpec):
    """(Z/p) wr Z with ``(f, s)(g, t) = (f + shift_s(g), s + t)``.

    Right multiplication by the lamp generator changes the lamp under the
    lighter; by the shift generator it moves the lighter one site.
    """

    p: int = 2
    family: ClassVar[str] = "lamplighter"

    def __post_init__(self):
        if self.p < 2:
            raise ValidationError("lamp modulus must be >= 2")

    def identity(self):
        return ((), 0)

    def generators(self):
        gens = {"l": (((0, 1),), 0)}
        if self.p > 2:
            gens["L"] = (((0, self.p - 1),), 0)
        gens["s"] = ((), 1)
        gens["S"] = ((), -1)
        return gens

    def _combine(self, f, g, shift):
        out = dict(f)
        for i, v in g:
            j = i + shift
            out[j] = (out.get(j, 0) + v) % self.p
        return tuple(sorted((i, v) for i, v in out.items() if v))

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        return (self._combine(g[0], h[0], g[1]), g[1] + h[1])

    def inverse(self, g):
        self.check(g)
        cfg, pos = g
        return (tuple(sorted((i - pos, (-v) % self.p) for i, v in cfg)), -pos)

    def check(self, g):
        ok = isinstance(g, tuple) and len(g) == 2 and isinstance(g[1], int) and isinstance(g[0], tuple)
        if ok:
            sites = [i for i, _ in g[0]]
            ok = (sites == sorted(set(sites))
                  and all(isinstance(v, int) and 0 < v < self.p for _, v in g[0]))
        if not ok:
            raise ValidationError(f"{g!r} is not a canonical lamplighter element (p={self.p})")

    def params_json(self):
        return {"p": self.p}

    def validate_subgroup(self, sub):
        self._check_sub_family(sub)
        if len(sub.params) != 1 or sub.params[0] < 1:
            raise ValidationError(f"lamplighter period must be a positive integer, got {sub.params}")

    def quotient_order(self, sub):
        k = sub.params[0]
        return k * self.p ** k

    def quotient_labels(self, sub):
        k = sub.params[0]
        for cfg in itertools.product(range(self.p), repeat=k):
            for pos in range(k):
                yield (cfg, pos)

    def quotient_identity(self, sub):
        return ((0,) * sub.params[0], 0)

    def quotient_mul(self, sub, u, v):
        k = sub.params[0]
        f, s = u
        g, t = v
        return (tuple((f[i] + g[(i - s) % k]) % self.p for i in range(k)), (s + t) % k)

    def quotient_inv(self, sub, u):
        k = sub.params[0]
        f, s = u
        return (tuple((-f[(i + s) % k]) % self.p for i in range(k)), (-s) % k)

    def reduce(self, sub, g):
        k = sub.params[0]
        cfg = [0] * k
        for i, v in g[0]:
            cfg[i % k] = (cfg[i % k] + v) % self.p
        return (tuple(cfg), g[1] % k)

    def is_nested(self, deep, shallow):
        return deep.params[0] % shallow.params[0] == 0

    def project_label(self, deep, shallow, label):
        ks = shallow.params[0]
        cfg = [0] * ks
        for i, v in enumerate(label[0]):
            cfg[i % ks] = (cfg[i % ks] + v) % self.p
        return (tuple(cfg), label[1] % ks)


# module level operations ---------------------------------------------------

def multiply(spec, g, h):
    return spec.multiply(g, h)


def inverse(spec, g):
    return spec.inverse(g)


def ball(spec, r, element_cap=DEFAULT_ELEMENT_CAP):
    """Elements of word length ``<= r``, as a dict ``element -> word length``.

    Breadth-first, so the values are exact word lengths.  Raises
    :class:`ResourceError` once more than ``element_cap`` elements appear.
    """
    if r < 0:
        raise ValidationError("ball radius must be non-negative")
    gens = list(spec.generators().values())
    e = spec.identity()
    lengths = {e: 0}
    frontier = [e]
    for depth in range(1, r + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = spec.multiply(g, s)
                if h not in lengths:
                    lengths[h] = depth
                    nxt.append(h)
                    if len(lengths) > element_cap:
                        raise ResourceError(
                            f"ball of radius {r} exceeds element cap {element_cap}", cap=element_cap)
        frontier = nxt
    return lengths


def word_length(spec, g, cutoff, element_cap=DEFAULT_ELEMENT_CAP):
    """Word length of ``g``, or ``None`` if it exceeds ``cutoff``."""
    spec.check(g)
    gens = list(spec.generators().values())
    e = spec.identity()
    if g == e:
        return 0
    seen = {e}
    queue = deque([(e, 0)])
    while queue:
        h, d = queue.popleft()
        if d == cutoff:
            continue
        for s in gens:
            x = spec.multiply(h, s)
            if x in seen:
                continue
            if x == g:
                return d + 1
            seen.add(x)
            if len(seen) > element_cap:
                raise ResourceError(f"word_length search exceeds element cap {element_cap}",
                                    cap=element_cap)
            queue.append((x, d + 1))
    return None


def bs_element(spec, x, t):
    """Canonical BS(1, n) element from a rational ``x`` (int or Fraction) and ``t``."""
    from fractions import Fraction
    x = Fraction(x)
    den = x.denominator
    exp = 0
    while (spec.n ** exp) % den:
        exp += 1
        if exp > den.bit_length() + 1:
            raise ValidationError(f"{x} is not in Z[1/{spec.n}]")
    num = x.numerator * (spec.n ** exp) // den
    num, exp = _bs_normalize(spec.n, num, exp)
    return (num, exp, t)
