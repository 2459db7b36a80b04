"""Covers of an extension from covers of the base and uniform covers of the fibres.

The map ``f: G/N -> L/pi(N)`` is the quotient of a group extension
``1 -> K -> G -> L -> 1`` reduced modulo ``N``.  Given a control function on
the codomain (n + 1 classes) and a fibre oracle (m + 1 classes, bounds
uniform over translates), :func:`hurewicz_cover` assembles a cover of the
domain by ``k = m + n + 1`` classes.

All radii are integers: a finite set ``F`` becomes the radius of the smallest
ball containing it, and ``F^3`` becomes ``3 * radius``.

Chains in the domain are "mixed": a step must move at most ``s_X`` in the
domain and its image at most ``s_Y`` in the codomain.  Since ``f`` is
1-Lipschitz, mixed ``(r, r)``-chains are ordinary r-chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covers import (ControlFunction, Cover, IntervalControl, iterate_expand, ladder_bound,
                     membership_counts, verify_cover)
from .errors import ConsistencyError, ValidationError
from .groups import BaumslagSolitar, FreeAbelian, Lamplighter, SubgroupSpec
from .quotients import FiniteQuotient, build_quotient, components, set_diameter


# the map -----------------------------------------------------------------

class EquivariantQuotientMap:
    """Vertex map from a domain quotient onto a cyclic codomain.

    The codomain is the Cayley graph of ``Z/k`` with the images of the
    domain generators (generators in the kernel become loops), so both
    graphs share generator names and the map is checked to be
    generator-equivariant, hence 1-Lipschitz.
    """

    def __init__(self, domain, codomain, vmap, kind, fiber_rank):
        self.domain = domain
        self.codomain = codomain
        self.vmap = np.asarray(vmap, dtype=np.int64)
        self.kind = kind
        self.fiber_rank = fiber_rank
        if not np.array_equal(self.vmap[domain.succ], codomain.succ[:, self.vmap]):
            raise ConsistencyError("vertex map is not generator-equivariant")
        sizes = np.bincount(self.vmap, minlength=len(codomain))
        if sizes.min() == 0:
            raise ConsistencyError("vertex map is not surjective")
        if sizes.min() != sizes.max():
            raise ConsistencyError("fibres have unequal sizes")
        self.fiber_size = int(sizes[0])
        order = np.argsort(self.vmap, kind="stable")
        self.fibers = [order[i * self.fiber_size:(i + 1) * self.fiber_size]
                       for i in range(len(codomain))]

    def preimage(self, base_vertices):
        if not len(base_vertices):
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate([self.fibers[b] for b in base_vertices]))

    def __repr__(self):
        return f"EquivariantQuotientMap({self.domain.name} -> Z/{len(self.codomain)}, {self.kind})"


def _cyclic_codomain(domain, steps, k):
    """Z/k with the generator images ``steps`` (same order as the domain generators)."""
    return FiniteQuotient(
        labels=[(t,) for t in range(k)],
        gen_names=list(domain.gen_names),
        gen_labels=[(s % k,) for s in steps],
        mul=lambda u, v: ((u[0] + v[0]) % k,),
        inv=lambda u: ((-u[0]) % k,),
        identity=(0,),
        spec=FreeAbelian(1),
        sub=SubgroupSpec.moduli(k),
        name=f"Z/{k}",
    )


def build_map(spec, sub, kernel=None, cap=None):
    """Quotient map for the shipped extensions.

    ``BaumslagSolitar``: ``Z[1/n] -> BS(1,n) -> Z``, codomain the t-coordinate.
    ``Lamplighter``: lamp group kernel, codomain the lamplighter position.
    ``FreeAbelian(2)``: kernel the second axis, codomain the first coordinate.
    ``FreeAbelian(1)``: trivial kernel, the identity onto ``Z/N``.
    ``kernel`` may name the kernel explicitly; only these defaults are
    supported.
    """
    defaults = {"bs": "Z[1/n]", "lamplighter": "lamps", "free_abelian": "axis"}
    if kernel is not None and kernel != defaults.get(spec.family):
        raise ValidationError(f"unsupported kernel {kernel!r} for {spec.family}")
    domain = build_quotient(spec, sub, cap=cap)
    names = domain.gen_names
    labels = domain.labels
    if isinstance(spec, BaumslagSolitar):
        k = sub.params[1]
        steps = [{"a": 0, "A": 0, "b": 1, "B": -1}[g] for g in names]
        vmap = [lab[1] for lab in labels]
        kind, rank = "bs", 1
    elif isinstance(spec, Lamplighter):
        k = sub.params[0]
        steps = [{"s": 1, "S": -1}.get(g, 0) for g in names]
        vmap = [lab[1] for lab in labels]
        kind, rank = "lamplighter", 0
    elif isinstance(spec, FreeAbelian) and spec.rank == 2:
        k = sub.params[0]
        steps = [{"e1": 1, "E1": -1}.get(g, 0) for g in names]
        vmap = [lab[0] for lab in labels]
        kind, rank = "z2", 1
    elif isinstance(spec, FreeAbelian) and spec.rank == 1:
        k = sub.params[0]
        steps = [{"e1": 1, "E1": -1}[g] for g in names]
        vmap = [lab[0] for lab in labels]
        kind, rank = "identity", 0
    else:
        raise ValidationError(f"no extension structure for {spec.family}")
    codomain = _cyclic_codomain(domain, steps, k)
    return EquivariantQuotientMap(domain, codomain, vmap, kind, rank)


# fibre oracles -------------------------------------------------------------

def _min_arc(positions, k):
    """Start and extent of the shortest arc of ``Z/k`` containing ``positions``."""
    p = np.unique(np.asarray(positions) % k)
    if p.size == 1:
        return int(p[0]), 0
    gaps = np.diff(np.append(p, p[0] + k))
    j = int(np.argmax(gaps))
    start = int(p[(j + 1) % p.size])
    return start, int(k - gaps[j])


def _check_bounded(fmap, base, T):
    dia = set_diameter(fmap.codomain, base)
    if dia > T:
        raise ValidationError(f"fibre oracle declines: base set has diameter {dia} > T = {T}")


def _alternating_blocks(coord, size, L):
    """Class (0/1) of each coordinate in alternating blocks of length ``L`` on ``Z/size``.

    The last block absorbs the remainder; with an odd block count it shares
    class 0 with block 0, which it touches across the wrap.
    """
    blocks = size // L
    if blocks < 2:
        return None
    return np.minimum(coord // L, blocks - 1) % 2


class FiberOracle:
    """Cover of ``f^{-1}(B)`` by ``class_count`` classes for T-bounded ``B``.

    ``bound(s, T)`` depends only on ``s`` and ``T``, never on the level or on
    which translate of ``B`` is asked for.
    """

    class_count = 1

    def __init__(self, fmap):
        self.fmap = fmap

    def cover(self, base, s, T):
        raise NotImplementedError

    def bound(self, s, T):
        raise NotImplementedError

    def as_control(self, base, T):
        return _FiberControl(self, base, T)


class _FiberControl(ControlFunction):
    def __init__(self, oracle, base, T):
        self.oracle, self.base, self.T = oracle, base, T
        self.class_count = oracle.class_count

    def cover(self, s):
        return self.oracle.cover(self.base, s, self.T)

    def bound(self, s):
        return self.oracle.bound(s, self.T)


class TrivialFiberOracle(FiberOracle):
    """Identity map: the preimage is ``B`` itself."""

    class_count = 1

    def cover(self, base, s, T):
        _check_bounded(self.fmap, base, T)
        return [frozenset(self.fmap.preimage(base).tolist())]

    def bound(self, s, T):
        return T


class BSFiberOracle(FiberOracle):
    """Two classes of alternating blocks in the rescaled ``Z/m`` coordinate.

    Over the arc ``[t0, t0 + e]`` containing ``B`` put ``y = z * n^-(t0 - s)``.
    A domain path of length ``<= s`` leaving and re-entering the preimage
    only uses ``a`` at heights ``t0 - s + 1 .. t0 + e + s - 1``, so it moves
    ``y`` by at most ``M = s |n|^(e + 2s - 1)``.  Blocks of length
    ``L = M + 1`` therefore separate chains, a component spans fewer than
    ``3L`` values of ``y``, and writing the difference in balanced base
    ``|n|`` at the bottom of the arc gives the diameter bound.
    """

    class_count = 2

    def __init__(self, fmap):
        super().__init__(fmap)
        spec = fmap.domain.spec
        self.n = spec.n
        if abs(self.n) < 2:
            raise ValidationError("BS fibre oracle needs |n| >= 2")
        self.m, self.k = fmap.domain.sub.params
        labs = fmap.domain.labels
        self.z = np.array([lab[0] for lab in labs], dtype=object)

    def cover(self, base, s, T):
        _check_bounded(self.fmap, base, T)
        pre = self.fmap.preimage(base)
        t0, ext = _min_arc(base, self.k)
        full = frozenset(pre.tolist())
        if self.m == 1:
            return [full, frozenset()]
        E = ext + 2 * s - 1
        # skip building L when it clearly exceeds m
        if E * (abs(self.n).bit_length() - 1) > self.m.bit_length():
            return [full, frozenset()]
        L = s * abs(self.n) ** E + 1
        if self.m < 2 * L:
            return [full, frozenset()]
        scale = pow(self.n, -(t0 - s), self.m)
        y = np.array([(int(self.z[v]) * scale) % self.m for v in pre], dtype=np.int64)
        cls = _alternating_blocks(y, self.m, L)
        return [frozenset(pre[cls == 0].tolist()), frozenset(pre[cls == 1].tolist())]

    def bound(self, s, T):
        ext = 2 * T
        b = abs(self.n)
        E = ext + 2 * s - 1
        # least D with b^D >= 6L + 1 = 6 s b^E + 7, i.e. D = E + j with
        # b^j >= 6s + 7 / b^E; once b^E >= 7 that is b^j >= 6s + 1
        j = 0
        if b ** min(E, 3) >= 7:
            while b ** j < 6 * s + 1:
                j += 1
        else:
            while b ** (E + j) < 6 * s * b ** E + 7:
                j += 1
        return 2 * (ext + s) + (E + j) * (b // 2 + 2)


class Z2FiberOracle(FiberOracle):
    """Alternating blocks of length ``s`` along the kernel axis of ``Z^2``."""

    class_count = 2

    def __init__(self, fmap):
        super().__init__(fmap)
        self.b = fmap.domain.sub.params[1]
        self.y = np.array([lab[1] for lab in fmap.domain.labels], dtype=np.int64)

    def cover(self, base, s, T):
        _check_bounded(self.fmap, base, T)
        pre = self.fmap.preimage(base)
        cls = _alternating_blocks(self.y[pre], self.b, s)
        if cls is None:
            return [frozenset(pre.tolist()), frozenset()]
        return [frozenset(pre[cls == 0].tolist()), frozenset(pre[cls == 1].tolist())]

    def bound(self, s, T):
        return T + 3 * s


class LamplighterFiberOracle(FiberOracle):
    """One class: over a T-bounded base, s-chains only touch lamps in a window
    of ``w = 2T + 2s + 1`` sites, so a component is crossed by walking the
    window three times and setting each lamp on the way."""

    class_count = 1

    def __init__(self, fmap):
        super().__init__(fmap)
        self.p = fmap.domain.spec.p

    def cover(self, base, s, T):
        _check_bounded(self.fmap, base, T)
        return [frozenset(self.fmap.preimage(base).tolist())]

    def bound(self, s, T):
        w = 2 * T + 2 * s + 1
        return 3 * w + w * (self.p // 2)


def default_oracle(fmap):
    return {"bs": BSFiberOracle, "z2": Z2FiberOracle, "lamplighter": LamplighterFiberOracle,
            "identity": TrivialFiberOracle}[fmap.kind](fmap)


# the schedule ----------------------------------------------------------------

@dataclass
class RadiusSchedule:
    """Radii indexed by ``i = 0 .. n+1`` (lists in ascending ``i``).

    ``s[n+1] = r``; ``t[i] = max(bound at s[i], s[i] + r + 1)``;
    ``s[i-1] = 3 t[i]``.  The floor ``s + r + 1`` makes every step of the
    finite union argument strict.
    """

    r: int
    n: int
    m: int
    s_Y: list
    t_Y: list
    s_X: list
    t_X: list

    def to_json(self):
        return {"s_Y": list(self.s_Y), "t_Y": list(self.t_Y),
                "s_X": list(self.s_X), "t_X": list(self.t_X)}

    @property
    def R_out(self):
        return 3 * self.t_X[1]

    def check(self):
        """Re-derive the nesting and the cube identities by arithmetic alone."""
        for s, t in ((self.s_Y, self.t_Y), (self.s_X, self.t_X)):
            if s[-1] != self.r:
                return False
            for i in range(len(s)):
                if not s[i] < t[i] or t[i] < s[i] + self.r + 1:
                    return False
                if i >= 1 and s[i - 1] != 3 * t[i]:
                    return False
        return True


def _ladder(start, n, bound_fn, r):
    s = [0] * (n + 2)
    t = [0] * (n + 2)
    s[n + 1] = start
    for i in range(n + 1, -1, -1):
        if i < n + 1:
            s[i] = 3 * t[i + 1]
        try:
            t[i] = max(bound_fn(s[i]), s[i] + r + 1)
        except ValidationError as exc:
            raise ValidationError(f"ladder position {i} (s = {s[i]}): {exc}") from exc
    return s, t


def build_schedule(base_ctrl, fiber_oracle, r, m, n):
    """Both radius ladders for target radius ``r``."""
    if r < 1:
        raise ValidationError("r must be >= 1")
    k = m + n + 1
    s_Y, t_Y = _ladder(r, n, lambda s: ladder_bound(base_ctrl.bound, s, k - n - 1), r)
    T = t_Y[0]
    s_X, t_X = _ladder(r, n,
                       lambda s: ladder_bound(lambda x: fiber_oracle.bound(x, T), s, k - m - 1), r)
    sched = RadiusSchedule(r, n, m, s_Y, t_Y, s_X, t_X)
    assert sched.check()
    return sched


# assembly ----------------------------------------------------------------

def lift_cover_over_components(fmap, base, fiber_oracle, s_X, s_Y, T, k):
    """Cover ``f^{-1}(base)`` by ``k`` classes, one fibre cover per s_Y-component.

    Each component of ``base`` (chains of step ``s_Y`` in the codomain) must
    have diameter ``<= T``.  The fibre oracle's cover of its preimage is
    expanded to ``k`` classes at radius ``s_X``; classes with equal index are
    unioned over components.  Preimages of distinct components are more
    than ``s_Y`` apart in the image, so no mixed ``(s_X, s_Y)``-chain joins
    them.
    """
    classes = [set() for _ in range(k)]
    for comp in components(fmap.codomain, base, s_Y):
        pre = fmap.preimage(comp)
        ctrl = fiber_oracle.as_control(comp, T)
        cov = iterate_expand(fmap.domain, ctrl, s_X, k, within=pre)
        for j, c in enumerate(cov.classes):
            classes[j] |= c
    return Cover(tuple(classes), r=s_X, R=ladder_bound(lambda x: fiber_oracle.bound(x, T), s_X,
                                                        k - fiber_oracle.class_count))


@dataclass
class HurewiczResult:
    cover: Cover
    certificate: object
    schedule: RadiusSchedule
    base_certificate: object
    fiber_bound_map: list
    R_out: int
    m: int
    n: int
    stages: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return self.certificate.passed


def hurewicz_cover(fmap, r, base_ctrl=None, fiber_oracle=None):
    """k = m + n + 1 classes ``D^j = union_i B_i^j & f^{-1}(U_i^j)`` covering the domain.

    (a) ``A_1 .. A_{n+1}``: the base cover at ``s_Y[0]``;
    (b) ``U_i^j``: the codomain cover expanded to k classes at ``s_Y[i]``, cut to ``A_i``;
    (c) ``B_i^j``: fibre covers lifted over the components of ``A_i`` at ``s_X[i]``;
    (d) intersect and union over ``i``.
    The output is verified at ``(m + n, r, 3 t_X[1])``.
    """
    X, Y, vmap = fmap.domain, fmap.codomain, fmap.vmap
    base_ctrl = IntervalControl(Y) if base_ctrl is None else base_ctrl
    fiber_oracle = default_oracle(fmap) if fiber_oracle is None else fiber_oracle
    n = base_ctrl.class_count - 1
    m = fiber_oracle.class_count - 1
    k = m + n + 1
    sched = build_schedule(base_ctrl, fiber_oracle, r, m, n)

    # (a)
    base_cover = Cover(tuple(base_ctrl.cover(sched.s_Y[0])), r=sched.s_Y[0],
                       R=base_ctrl.bound(sched.s_Y[0]))
    # certify on the plain cycle: same labels and metric, generators of its own
    plain = build_quotient(FreeAbelian(1), SubgroupSpec.moduli(len(Y)))
    assert plain.labels == Y.labels
    base_cert = verify_cover(plain, base_cover, n, sched.s_Y[0], sched.t_Y[0])
    if not base_cert.passed:
        raise ValidationError(f"base cover failed: {base_cert.failure}", certificate=base_cert)
    A = base_cover.classes

    D = [set() for _ in range(k)]
    served = np.zeros(len(X), dtype=bool)
    stages = {"U": [], "B": []}
    for i in range(1, n + 2):
        Ai = A[i - 1]
        if not Ai:
            stages["U"].append(None)
            stages["B"].append(None)
            continue
        # (b)
        U = iterate_expand(Y, base_ctrl, sched.s_Y[i], k)
        Ui = [c & Ai for c in U.classes]
        # (c)
        Bi = lift_cover_over_components(fmap, Ai, fiber_oracle, sched.s_X[i], sched.s_Y[0],
                                        sched.t_Y[0], k).classes
        stages["U"].append(Ui)
        stages["B"].append(Bi)
        # Kolmogorov: >= k - m indices of B and >= k - n of U over each point
        pre = fmap.preimage(sorted(Ai))
        nb = membership_counts(X, Bi)[pre]
        nu = membership_counts(Y, Ui)[vmap[pre]]
        if nb.min() < k - m or nu.min() < k - n:
            raise ConsistencyError(f"stage {i}: multiplicity below k - m or k - n")
        # (d)
        for j in range(k):
            if not Bi[j] or not Ui[j]:
                continue
            Bj = np.fromiter(Bi[j], dtype=np.int64)
            inU = np.isin(vmap[Bj], np.fromiter(Ui[j], dtype=np.int64))
            Dij = Bj[inU]
            D[j].update(Dij.tolist())
            served[Dij] = True
    if not served.all():
        raise ConsistencyError(f"Kolmogorov coverage failed at vertex {X.label(int(np.flatnonzero(~served)[0]))}")

    cover = Cover(tuple(D), r=r, R=sched.R_out)
    cert = verify_cover(X, cover, m + n, r, sched.R_out)
    T = sched.t_Y[0]
    fiber_map = [[s, fiber_oracle.bound(s, T)] for s in sched.s_X]
    return HurewiczResult(cover, cert, sched, base_cert, fiber_map, sched.R_out, m, n, stages)


def uniform_hurewicz_family(spec, filtration, r, levels, kernel=None, base_ctrl_factory=None,
                            oracle_factory=None, cap=None):
    """Run :func:`hurewicz_cover` on each listed level with the same oracles.

    The oracles' bound maps do not depend on the level, so ``R_out`` must be
    identical across levels; a mismatch raises.
    """
    results = []
    for lv in levels:
        sub = filtration[lv]
        fmap = build_map(spec, sub, kernel=kernel, cap=cap)
        ctrl = base_ctrl_factory(fmap.codomain) if base_ctrl_factory else IntervalControl(fmap.codomain)
        oracle = oracle_factory(fmap) if oracle_factory else default_oracle(fmap)
        results.append(hurewicz_cover(fmap, r, ctrl, oracle))
    outs = {res.R_out for res in results}
    if len(outs) > 1:
        raise ConsistencyError(f"R_out differs across levels: {sorted(outs)}")
    return results
