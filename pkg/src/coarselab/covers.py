"""(d, r, R)-covers of finite quotients: verification, generation, combination.

A cover is a sequence of vertex-index sets ("classes").  Classes may overlap;
the multiplicity (least number of classes through any vertex) is what the
expansion and product constructions consume.

In a finite discrete space every set is open and closed, so the open/closed
exchanges that the continuous versions of these constructions need are the
identity here and the sets are used as they are.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceError, ValidationError
from .quotients import components, product_quotient, set_diameter

TOOL_VERSION = "coarselab 0.1.0"


@dataclass
class Cover:
    classes: tuple
    r: int = 1
    R: int = 0
    ladder: list = field(default_factory=list, compare=False)
    pieces: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.classes = tuple(frozenset(int(v) for v in c) for c in self.classes)

    def __len__(self):
        return len(self.classes)

    def union(self):
        out = set()
        for c in self.classes:
            out |= c
        return out


@dataclass
class CoverCertificate:
    cover: Cover
    host: object
    d: int
    r: int
    R: int
    passed: bool
    multiplicity: int
    worst_component_diameter: int
    class_stats: list
    failure: str | None = None
    tool_version: str = TOOL_VERSION

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"

    @property
    def d_effective(self):
        return len(self.cover) - 1

    def __bool__(self):
        return self.passed


def format_label(lab):
    if isinstance(lab, tuple) and len(lab) == 1:
        return str(lab[0])
    return str(lab).replace(" ", "")


def _as_cover(cover):
    return cover if isinstance(cover, Cover) else Cover(tuple(cover))


def _universe(q, within):
    if within is None:
        return np.arange(len(q))
    return np.unique(np.asarray(list(within), dtype=np.int64))


def membership_counts(q, cover, within=None):
    counts = np.zeros(len(q), dtype=np.int64)
    for c in _as_cover(cover).classes:
        if c:
            counts[np.fromiter(c, dtype=np.int64)] += 1
    return counts


def multiplicity(cover, q=None, within=None):
    """Least number of classes containing a point of the covered set.

    Without ``q`` the covered set is the union of the classes.
    """
    cover = _as_cover(cover)
    if q is None:
        pts = cover.union() if within is None else set(within)
        if not pts:
            return 0
        return min(sum(1 for c in cover.classes if v in c) for v in pts)
    uni = _universe(q, within)
    if uni.size == 0:
        return 0
    return int(membership_counts(q, cover)[uni].min())


def verify_cover(q, cover, d, r, R, within=None, fmap=None, base=None, base_r=None):
    """Check that ``cover`` is a (d, r, R)-cover of ``q`` (or of ``within``).

    Pass iff there are at most ``d + 1`` classes, their union is the whole
    vertex set (or ``within``) and every r-component of every class has
    diameter at most ``R``.  Components are chains inside the class; the
    diameter is measured in the metric of ``q``.  ``fmap``/``base``/``base_r``
    switch to mixed chains whose images must also be ``base_r``-chains.
    """
    cover = _as_cover(cover)
    n = len(q)
    for i, c in enumerate(cover.classes):
        bad = [v for v in c if not 0 <= v < n]
        if bad:
            raise ValidationError(f"class {i} references unknown vertex {bad[0]}")
    uni = _universe(q, within)
    if within is not None:
        allowed = set(uni.tolist())
        for i, c in enumerate(cover.classes):
            if not c <= allowed:
                raise ValidationError(f"class {i} leaves the covered subset")
    failure = None
    if len(cover) > d + 1:
        failure = f"{len(cover)} classes exceed d + 1 = {d + 1}"
    counts = membership_counts(q, cover)
    holes = uni[counts[uni] == 0]
    if failure is None and holes.size:
        failure = f"coverage hole at vertex {format_label(q.label(int(holes[0])))}"
    mult = int(counts[uni].min()) if uni.size else 0
    worst = 0
    stats = []
    worst_where = None
    for i, c in enumerate(cover.classes):
        comps = components(q, c, r, fmap=fmap, base=base, base_r=base_r)
        diams = [set_diameter(q, comp) for comp in comps]
        top = max(diams, default=0)
        stats.append({"class": i, "size": len(c), "components": len(comps), "max_diameter": top})
        if top > worst:
            worst = top
            worst_where = (i, comps[diams.index(top)])
    if failure is None and worst > R:
        i, comp = worst_where
        failure = (f"class {i} has an r-component of diameter {worst} > R = {R} "
                   f"(contains vertex {format_label(q.label(int(comp[0])))})")
    return CoverCertificate(cover=cover, host=q, d=d, r=r, R=R, passed=failure is None,
                            multiplicity=mult, worst_component_diameter=worst,
                            class_stats=stats, failure=failure)


# generators --------------------------------------------------------------

def _cyclic_positions(q):
    if q.spec is None or q.spec.family != "free_abelian" or q.spec.rank != 1:
        raise ValidationError("interval_cover needs a cyclic quotient Z/N")
    return np.array([lab[0] for lab in q.labels])


def interval_cover(q, r):
    """Two alternating classes of blocks on a cycle ``C_N``.

    With ``4r | N`` the blocks have length ``2r`` and the cover verifies at
    ``(1, r, 2r - 1)``.  Otherwise the last period absorbs the remainder and
    the bound widens to ``4r - 1``.  Returns ``None`` when ``N < 4r``.
    """
    pos = _cyclic_positions(q)
    N = len(q)
    if N < 4 * r:
        return None
    periods = N // (4 * r)
    rem = N - 4 * r * periods
    last = 4 * r * (periods - 1)
    first_block = np.where(pos < last, (pos % (4 * r)) < 2 * r, (pos - last) < 2 * r + rem // 2)
    c0 = np.flatnonzero(first_block)
    c1 = np.flatnonzero(~first_block)
    return Cover((c0, c1), r=r, R=2 * r - 1 if rem == 0 else 4 * r - 1)


class ControlFunction:
    """Radius ``s`` -> cover with ``class_count`` classes and bound ``bound(s)``.

    The bound map must not depend on the host, so that one control function
    can serve every level of a filtration.
    """

    class_count = 1

    def cover(self, s):
        raise NotImplementedError

    def bound(self, s):
        raise NotImplementedError


class IntervalControl(ControlFunction):
    """Interval covers of a cycle, with the single class as fallback when ``N < 4s``."""

    class_count = 2

    def __init__(self, q, aligned=False):
        self.q = q
        self.aligned = aligned

    def cover(self, s):
        c = interval_cover(self.q, s)
        if c is None:
            return [frozenset(range(len(self.q))), frozenset()]
        return list(c.classes)

    def bound(self, s):
        # fallback: N < 4s gives diameter floor(N/2) <= 2s - 1
        return 2 * s - 1 if self.aligned else 4 * s - 1


class SingleClassControl(ControlFunction):
    class_count = 1

    def __init__(self, q, bound):
        self.q = q
        self._bound = bound

    def cover(self, s):
        return [frozenset(range(len(self.q)))]

    def bound(self, s):
        return self._bound(s) if callable(self._bound) else self._bound


def ladder_bound(bound, s, expansions):
    """Bound after ``expansions`` expansion steps ending at radius ``s``:
    start from ``bound(3^e s)`` and add ``2 * 3^i * s`` per step."""
    R = bound(3 ** expansions * s)
    for i in reversed(range(expansions)):
        R += 2 * 3 ** i * s
    return R


def neighborhood(q, vertices, r, within=None):
    v = np.asarray(sorted(vertices), dtype=np.int64)
    if v.size == 0:
        return frozenset()
    mask = (q.rows(v) <= r).any(axis=0)
    out = np.flatnonzero(mask)
    if within is not None:
        out = np.intersect1d(out, np.asarray(sorted(within), dtype=np.int64))
    return frozenset(out.tolist())


def expand_cover(q, cover, r, n, R_in=None, within=None):
    """Add one class and one unit of multiplicity at radius ``r``.

    The input must verify at ``(k - 1, 3r, R_in)`` with multiplicity at least
    ``k - n``.  The old classes are replaced by their r-neighbourhoods and the
    new class is the union over ``|S| = k - n`` of
    ``W_S = (intersection of U_s, s in S) minus (union of U_i', i not in S)``.
    The result verifies at ``(k, r, R_in + 2r)`` with multiplicity at least
    ``k - n + 1``.  The ``W_S`` are kept in ``result.pieces``.
    """
    cover = _as_cover(cover)
    k = len(cover)
    R_in = cover.R if R_in is None else R_in
    cert = verify_cover(q, cover, k - 1, 3 * r, R_in, within=within)
    if not cert.passed:
        raise ValidationError(f"expand_cover precondition failed: {cert.failure}", certificate=cert)
    if cert.multiplicity < k - n:
        raise ValidationError(
            f"expand_cover precondition failed: multiplicity {cert.multiplicity} < k - n = {k - n}",
            certificate=cert)
    grown = [neighborhood(q, c, r, within=within) for c in cover.classes]
    pieces = {}
    for S in itertools.combinations(range(k), k - n):
        inter = frozenset.intersection(*(cover.classes[s] for s in S)) if S else frozenset(
            _universe(q, within).tolist())
        outside = set()
        for i in range(k):
            if i not in S:
                outside |= grown[i]
        pieces[S] = inter - outside
    new = frozenset().union(*pieces.values()) if pieces else frozenset()
    return Cover(tuple(grown) + (new,), r=r, R=R_in + 2 * r, pieces=pieces)


def iterate_expand(q, ctrl, r, k, within=None, verify=True):
    """k-class cover with multiplicity ``>= k - n`` from an n-dimensional control.

    The control is queried at ``3^(k-n-1) r`` and then expanded ``k - n - 1``
    times down the ladder ``... -> 9r -> 3r -> r``.  The exact ladder of
    ``(radius, bound)`` pairs is kept in ``result.ladder``.
    """
    n = ctrl.class_count - 1
    if k < n + 1:
        raise ValidationError(f"k = {k} < n + 1 = {n + 1}")
    steps = k - n - 1
    s0 = 3 ** steps * r
    cover = Cover(tuple(ctrl.cover(s0)), r=s0, R=ctrl.bound(s0))
    if verify:
        cert = verify_cover(q, cover, n, s0, cover.R, within=within)
        if not cert.passed:
            raise ValidationError(f"control function failed at radius {s0}: {cert.failure}",
                                  certificate=cert)
    ladder = [(s0, cover.R)]
    for i in reversed(range(steps)):
        cover = expand_cover(q, cover, 3 ** i * r, n, within=within)
        ladder.append((cover.r, cover.R))
    if verify and steps:
        cert = verify_cover(q, cover, k - 1, r, cover.R, within=within)
        if not cert.passed or cert.multiplicity < k - n:
            raise ValidationError(f"iterate_expand output failed: {cert.failure}", certificate=cert)
    cover.ladder = ladder
    return cover


def product_cover(qx, cover_x, m, qy, cover_y, n, q_prod=None):
    """Classes ``U_i x V_i`` on the product graph.

    Both inputs need ``k = m + n + 1`` classes, with multiplicities at least
    ``k - m`` and ``k - n``; since ``(k - m) + (k - n) = k + 1`` some index
    serves every point.  Returns ``(product_graph, cover)`` where the cover
    carries ``r = min(r_x, r_y)`` and ``R = R_x + R_y``.
    """
    cover_x, cover_y = _as_cover(cover_x), _as_cover(cover_y)
    k = m + n + 1
    if len(cover_x) != k or len(cover_y) != k:
        raise ValidationError(f"product_cover needs {k} classes on both sides, "
                              f"got {len(cover_x)} and {len(cover_y)}")
    if q_prod is None:
        q_prod = product_quotient(qx, qy)
    ny = len(qy)
    classes = []
    for U, V in zip(cover_x.classes, cover_y.classes):
        classes.append(frozenset(u * ny + v for u in U for v in V))
    return q_prod, Cover(tuple(classes), r=min(cover_x.r, cover_y.r), R=cover_x.R + cover_y.R)


def pullback_cover(cover, fmap):
    """Preimages of the classes under a vertex map (an index array)."""
    cover = _as_cover(cover)
    fmap = np.asarray(fmap)
    classes = []
    for c in cover.classes:
        if not c:
            classes.append(frozenset())
            continue
        mask = np.isin(fmap, np.fromiter(c, dtype=np.int64))
        classes.append(frozenset(np.flatnonzero(mask).tolist()))
    return Cover(tuple(classes), r=cover.r, R=cover.R)


# finite union -------------------------------------------------------------

@dataclass
class UnionVerdict:
    status: str  # "pass", "counterexample" or "precondition"
    detail: str = ""
    witness: tuple = ()

    @property
    def passed(self):
        return self.status == "pass"


def union_components_check(q, A, B, r_A, R_A, r_B, R_B):
    """Check the finite union bound on one instance.

    Hypotheses: r_A-components of A have diameter <= R_A, r_B-components of B
    have diameter <= R_B, and ``R_B + 2 r_B < r_A``.  Conclusion checked:
    every r_B-component of ``A | B`` has diameter <= ``2 r_A + R_A``.
    """
    if not R_B + 2 * r_B < r_A:
        return UnionVerdict("precondition", f"R_B + 2 r_B = {R_B + 2 * r_B} >= r_A = {r_A}")
    for name, S, rr, RR in (("A", A, r_A, R_A), ("B", B, r_B, R_B)):
        for comp in components(q, S, rr):
            dia = set_diameter(q, comp)
            if dia > RR:
                return UnionVerdict("precondition",
                                    f"{name} has an {rr}-component of diameter {dia} > {RR}")
    bound = 2 * r_A + R_A
    for comp in components(q, set(A) | set(B), r_B):
        dia = set_diameter(q, comp)
        if dia > bound:
            return UnionVerdict("counterexample", f"component of diameter {dia} > {bound}",
                                tuple(comp.tolist()))
    return UnionVerdict("pass")


# exhaustive lower bounds ----------------------------------------------------

@dataclass
class SearchResult:
    minimum: int | None
    exhausted: bool
    explored: int
    witness: Cover | None = None
    refuted: list = field(default_factory=list)

    def __repr__(self):
        if self.exhausted:
            return f"SearchResult(exhausted after {self.explored} nodes)"
        return f"SearchResult(minimum={self.minimum}, explored={self.explored})"


class _Budget(Exception):
    pass


def _search_colouring(q, near, order, colours, R, budget, counter):
    n = len(q)
    colour = np.full(n, -1, dtype=np.int64)

    def component_ok(v):
        col = colour[v]
        comp = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for y in near[x]:
                if colour[y] == col and y not in comp:
                    comp.add(y)
                    stack.append(y)
        if len(comp) == 1:
            return True
        return set_diameter(q, sorted(comp)) <= R

    def rec(pos, used):
        if pos == len(order):
            return True
        counter[0] += 1
        if counter[0] > budget:
            raise _Budget
        v = order[pos]
        for col in range(min(used + 1, colours)):
            colour[v] = col
            if component_ok(v) and rec(pos + 1, max(used, col + 1)):
                return True
        colour[v] = -1
        return False

    if rec(0, 0):
        return colour.copy()
    return None


def brute_force_min_cover(q, r, R, d_max, budget=1_000_000, cap=64):
    """Least number of classes (at most ``d_max + 1``) of a (d, r, R)-cover.

    Searches partitions only: from any (d, r, R)-cover, keeping one
    containing class per vertex gives a partition whose r-components can
    only shrink.  Backtracking with incremental component checks; the
    search is exhaustive for every class count it refutes.  When the node
    budget runs out the result says ``exhausted`` instead of guessing.
    ``cap`` only labels the mode (exhaustive vs. branch-and-bound); the
    algorithm is the same.
    """
    import sys
    n = len(q)
    near = []
    for v in range(n):
        row = q.rows([v])[0]
        near.append([int(u) for u in np.flatnonzero(row <= r) if u != v])
    # breadth-first order keeps components local, which makes pruning bite early
    order, seen = [], {0}
    frontier = [0]
    while frontier:
        order.extend(frontier)
        nxt = []
        for x in frontier:
            for y in q.succ[:, x].tolist():
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    counter = [0]
    refuted = []
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 100))
    try:
        for colours in range(1, d_max + 2):
            try:
                found = _search_colouring(q, near, order, colours, R, budget, counter)
            except _Budget:
                return SearchResult(None, True, counter[0], refuted=refuted)
            if found is not None:
                classes = tuple(frozenset(np.flatnonzero(found == c).tolist()) for c in range(colours))
                return SearchResult(colours, False, counter[0], Cover(classes, r=r, R=R), refuted)
            refuted.append(colours)
    finally:
        sys.setrecursionlimit(old_limit)
    return SearchResult(None, False, counter[0], refuted=refuted)


def check_vertex_cap(q, cap):
    if len(q) > cap:
        raise ResourceError(f"{len(q)} vertices exceed the cap {cap}", cap=cap)
