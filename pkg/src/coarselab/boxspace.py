"""Box spaces: coarse disjoint unions of the quotients along a filtration.

The profinite completion is never built.  Every clopen subset of it is a
pullback from a finite level, so finite levels plus pullbacks stand in for
it at every finite scale.  For reference, its metric is
``d((x_i), (y_i)) = sum_i d_i(x_i, y_i) / (2^i diam_i)``; nothing here
evaluates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covers import Cover, pullback_cover, verify_cover
from .errors import ValidationError
from .groups import ball
from .quotients import build_quotient, components, quotient_map, set_diameter, systole


class BoxSpace:
    """Finite quotients with the coarse disjoint union metric.

    Points are pairs ``(level, vertex label)``.  Inside a level the distance
    is the word metric; across levels it is ``diam_i + diam_j``.
    """

    def __init__(self, quotients):
        self.quotients = list(quotients)
        self.diameters = [q.diameter for q in self.quotients]
        self.offsets = np.cumsum([0] + [len(q) for q in self.quotients])

    @classmethod
    def from_filtration(cls, filtration, levels=None, cap=None):
        levels = range(len(filtration)) if levels is None else levels
        box = cls([build_quotient(filtration.spec, filtration[i], cap=cap) for i in levels])
        box.levels = list(levels)
        return box

    def __len__(self):
        return len(self.quotients)

    def _level(self, i):
        if not 0 <= i < len(self.quotients):
            raise ValidationError(f"no component {i} in a box space of {len(self)}")
        return self.quotients[i]

    def global_index(self, i, v):
        return int(self.offsets[i] + v)

    def split(self, g):
        i = int(np.searchsorted(self.offsets, g, side="right") - 1)
        return i, int(g - self.offsets[i])

    def dist_index(self, a, b):
        (i, u), (j, v) = self.split(a), self.split(b)
        if i == j:
            return self.quotients[i].dist(u, v)
        return self.diameters[i] + self.diameters[j]


def coarse_distance(box, p, q):
    (i, x), (j, y) = p, q
    qi, qj = box._level(i), box._level(j)
    if i == j:
        return qi.dist(qi.vertex(x), qi.vertex(y))
    qj.vertex(y)
    qi.vertex(x)
    return box.diameters[i] + box.diameters[j]


@dataclass
class FamilyVerdict:
    passed: bool
    per_level: list
    failing_level: int | None = None
    detail: str = ""


def uniform_family_check(box, d, r, R, covers):
    """Every level's cover verifies at ``(d, r, R)``; levels of diameter ``<= r`` are exempt.

    Exempt levels are absorbed: together they form one piece of diameter at
    most ``2r`` in the box space.
    """
    if len(covers) != len(box):
        raise ValidationError(f"{len(covers)} covers for {len(box)} levels")
    per, failing, detail = [], None, ""
    for i, (q, cov) in enumerate(zip(box.quotients, covers)):
        if cov is None:
            raise ValidationError(f"missing cover for level {i}")
        if q.diameter <= r:
            per.append("exempt")
            continue
        cert = verify_cover(q, cov, d, r, R)
        per.append(cert)
        if not cert.passed and failing is None:
            failing, detail = i, f"level {i}: {cert.failure}"
    return FamilyVerdict(failing is None, per, failing, detail)


def assemble_box_cover(box, covers):
    """Concatenate per-level classes index-wise into classes of global indices."""
    k = max(len(c) for c in covers)
    classes = [set() for _ in range(k)]
    for i, cov in enumerate(covers):
        cov = cov if isinstance(cov, Cover) else Cover(tuple(cov))
        for j, c in enumerate(cov.classes):
            classes[j].update(box.global_index(i, v) for v in c)
    return [frozenset(c) for c in classes]


def box_components(box, cls, r):
    """r-components of a set of global indices under the coarse metric."""
    by_level = {}
    for g in cls:
        i, v = box.split(g)
        by_level.setdefault(i, []).append(v)
    pieces = []  # (level, local vertex array)
    for i, vs in sorted(by_level.items()):
        for comp in components(box.quotients[i], vs, r):
            pieces.append((i, comp))
    # pieces on different levels are within r iff diam_i + diam_j <= r
    parent = list(range(len(pieces)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(len(pieces)):
        for b in range(a + 1, len(pieces)):
            i, j = pieces[a][0], pieces[b][0]
            if i != j and box.diameters[i] + box.diameters[j] <= r:
                parent[find(a)] = find(b)
    groups = {}
    for a, (i, comp) in enumerate(pieces):
        groups.setdefault(find(a), {}).setdefault(i, []).extend(comp.tolist())
    out = []
    for per_level in groups.values():
        levels = sorted(per_level)
        dia = max(set_diameter(box.quotients[i], per_level[i]) for i in levels)
        for x in range(len(levels)):
            for y in range(x + 1, len(levels)):
                dia = max(dia, box.diameters[levels[x]] + box.diameters[levels[y]])
        members = sorted(box.global_index(i, v) for i in levels for v in per_level[i])
        out.append((members, dia))
    return out


def verify_box_cover(box, classes, d, r, R):
    """Coverage, class count and component diameters in the coarse metric."""
    total = int(box.offsets[-1])
    union = set().union(*classes) if classes else set()
    if len(classes) > d + 1:
        return False, f"{len(classes)} classes exceed d + 1"
    if len(union) != total:
        missing = min(set(range(total)) - union)
        return False, f"coverage hole at {box.split(missing)}"
    for j, c in enumerate(classes):
        for members, dia in box_components(box, c, r):
            if dia > R:
                return False, f"class {j}: component of diameter {dia} > {R}"
    return True, ""


def translate_parameters(q, r, R):
    """Metric cover parameters as dynamic ones: balls of radius r and R."""
    return {"F_radius": int(r), "S_radius": int(R)}


def untranslate_parameters(params):
    return params["F_radius"], params["S_radius"]


def ball_moves(q, r):
    """Vertex labels of the images of the radius-r ball of the ambient group."""
    spec, sub = q.spec, q.sub
    return sorted({spec.reduce(sub, g) for g in ball(spec, r)})


def f_components(q, subset, r):
    """Orbit pieces of ``subset`` under moves ``x -> x g`` with ``|g| <= r``.

    Computed from the group law alone (no distance table): union-find over
    the move graph restricted to ``subset``.  Returns a set of frozensets.
    """
    subset = sorted(set(int(v) for v in subset))
    inside = set(subset)
    parent = {v: v for v in subset}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    moves = ball_moves(q, r)
    for v in subset:
        lab = q.label(v)
        for g in moves:
            w = q.index[q.mul(lab, g)]
            if w in inside:
                a, b = find(v), find(w)
                if a != b:
                    parent[a] = b
    groups = {}
    for v in subset:
        groups.setdefault(find(v), set()).add(v)
    return {frozenset(g) for g in groups.values()}


def translation_check(q, subset, r):
    """F-component partition equals the r-component partition (as sets)."""
    metric = {frozenset(c.tolist()) for c in components(q, subset, r)} if subset else set()
    return f_components(q, subset, r) == metric


@dataclass
class OdometerVerdict:
    passed: bool
    per_level: list = field(default_factory=list)
    detail: str = ""


def lift_is_isometric(spec, sub, D, r):
    """Every r-component of diameter D at this level lifts isometrically to deeper levels.

    Lifting along a geodesic tree from one point gives a map that closes up
    on loops of length ``<= 3D`` (isometry) and ``<= 2D + r`` (the lift is a
    whole r-component); both lift when the shortest non-trivial element of
    the kernel is longer.
    """
    need = 2 * D + max(D, r)
    return systole(spec, sub, need) is None


def odometer_equivalence_check(filtration, i0, cover, r, deeper, cap=None):
    """Pull a level-``i0`` cover back to deeper levels and compare components.

    For every r-component ``C`` of a shallow class that lifts isometrically
    (see :func:`lift_is_isometric`), every deep component over it must have
    the same diameter and the same cardinality.  Components that may not
    lift isometrically are listed as exempt.
    """
    spec = filtration.spec
    if any(j <= i0 for j in deeper):
        raise ValidationError(f"deeper levels must come after level {i0}")
    for j in deeper:
        if j >= len(filtration):
            raise ValidationError(f"level {j} is outside the filtration")
    cover = cover if isinstance(cover, Cover) else Cover(tuple(cover))
    q0 = build_quotient(spec, filtration[i0], cap=cap)
    shallow = []
    for c in cover.classes:
        comps = components(q0, c, r)
        info = {}
        for comp in comps:
            dia = set_diameter(q0, comp)
            info[int(comp[0])] = (comp, dia)
        shallow.append(info)
    lifts = {}
    per, ok, detail = [], True, ""
    for j in deeper:
        qd = build_quotient(spec, filtration[j], cap=cap)
        fmap = quotient_map(qd, q0)
        pulled = pullback_cover(cover, fmap)
        checked = exempt = 0
        for ci, (c, info) in enumerate(zip(pulled.classes, shallow)):
            owner = {}
            for key, (comp, dia) in info.items():
                for v in comp:
                    owner[int(v)] = key
            for comp in components(qd, c, r):
                key = owner[int(fmap[comp[0]])]
                scomp, sdia = info[key]
                if sdia not in lifts:
                    lifts[sdia] = lift_is_isometric(spec, filtration[i0], sdia, r)
                if not lifts[sdia]:
                    exempt += 1
                    continue
                checked += 1
                ddia = set_diameter(qd, comp)
                if ddia != sdia or len(comp) != len(scomp):
                    ok = False
                    detail = detail or (f"level {j}, class {ci}: component of diameter {ddia}, "
                                        f"size {len(comp)} over one of diameter {sdia}, size {len(scomp)}")
        per.append({"level": j, "checked": checked, "exempt": exempt})
    return OdometerVerdict(ok, per, detail)


@dataclass
class UnionScaleVerdict:
    passed: bool
    per_stage: list
    detail: str = ""


def nested_union_scale_check(q, stages, r, R, d, cover_fn):
    """Cover r-separated pieces of each stage independently and glue.

    ``stages`` is an increasing sequence of vertex sets of ``q``.  In each
    stage the r-components are more than r apart, so covers of them made
    by ``cover_fn(q, piece) -> classes`` concatenate index-wise into a cover
    of the stage; it must verify at ``(d, r, R)`` inside the stage.
    """
    stages = [frozenset(int(v) for v in s) for s in stages]
    for a, b in zip(stages, stages[1:]):
        if not a <= b:
            raise ValidationError("stages are not nested")
    per, ok, detail = [], True, ""
    for n, st in enumerate(stages):
        classes = [set() for _ in range(d + 1)]
        pieces = components(q, st, r)
        for piece in pieces:
            cls = cover_fn(q, piece)
            if len(cls) > d + 1:
                raise ValidationError(f"piece cover has {len(cls)} classes, d + 1 = {d + 1}")
            for j, c in enumerate(cls):
                classes[j] |= set(int(v) for v in c)
        cert = verify_cover(q, Cover(tuple(classes)), d, r, R, within=st)
        per.append({"stage": n, "pieces": len(pieces), "passed": cert.passed})
        if not cert.passed:
            ok = False
            detail = detail or f"stage {n}: {cert.failure}"
    return UnionScaleVerdict(ok, per, detail)
