"""Finite quotients as generator-labelled Cayley graphs.

Vertices are integer indices ``0..V-1`` with canonical coset labels kept
alongside.  Edges are right multiplications ``x -> x * s`` by the image of
each generator, so the graph metric is the word metric of the image
generating set and left multiplication acts by graph automorphisms.

Distances are held as a full ``int32`` table when ``V <= DIST_TABLE_LIMIT``
and computed row by row (breadth-first, cached) above that.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import ConsistencyError, ResourceError, ValidationError
from .groups import BaumslagSolitar, FreeAbelian, Lamplighter, SubgroupSpec, ball

DIST_TABLE_LIMIT = 5000
DEFAULT_VERTEX_CAP = 20_000


def vertex_cap():
    """Vertex cap for quotient construction; ``COARSELAB_CAP`` overrides it."""
    env = os.environ.get("COARSELAB_CAP")
    return int(env) if env else DEFAULT_VERTEX_CAP


class FiniteQuotient:
    """A finite Cayley graph with its word metric.

    Parameters
    ----------
    labels : sequence
        Canonical vertex labels; ``labels[i]`` names vertex ``i``.
    gen_names, gen_labels : sequence
        Generator names and their images (as labels).
    mul, inv : callable
        Group law and inverse on labels.
    identity : label
    spec, sub : optional
        The group family and subgroup this is a quotient of (``None`` for
        synthetic hosts such as product graphs).
    """

    def __init__(self, labels, gen_names, gen_labels, mul, inv, identity,
                 spec=None, sub=None, image=None, name=None):
        self.labels = list(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.gen_names = list(gen_names)
        self.gen_labels = list(gen_labels)
        self.mul = mul
        self.inv = inv
        self.identity_label = identity
        self.spec = spec
        self.sub = sub
        self._image = image
        self.name = name or (f"{spec.family}/{sub.params}" if spec is not None else "graph")
        n = len(self.labels)
        succ = np.empty((len(self.gen_labels), n), dtype=np.int64)
        for g, s in enumerate(self.gen_labels):
            for i, lab in enumerate(self.labels):
                succ[g, i] = self.index[mul(lab, s)]
        self.succ = succ
        self._table = None
        self._row_cache = {}
        if n <= DIST_TABLE_LIMIT:
            self._table = self._all_pairs()
        self.identity = self.index[identity]
        if self._table is not None:
            self.diameter = int(self._table.max())
        else:
            # Cayley graphs are vertex-transitive: eccentricity of e is the diameter
            self.diameter = int(self.rows([self.identity]).max())

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"FiniteQuotient({self.name}, V={len(self)}, diameter={self.diameter})"

    # metric ------------------------------------------------------------------
    def _csr(self):
        n = len(self.labels)
        rows = np.repeat(np.arange(n)[None, :], self.succ.shape[0], axis=0).ravel()
        cols = self.succ.ravel()
        keep = rows != cols
        data = np.ones(int(keep.sum()), dtype=np.int8)
        return csr_matrix((data, (rows[keep], cols[keep])), shape=(n, n))

    def _all_pairs(self):
        n = len(self.labels)
        graph = self._csr()
        out = np.empty((n, n), dtype=np.int32)
        chunk = 512
        for lo in range(0, n, chunk):
            idx = np.arange(lo, min(n, lo + chunk))
            d = shortest_path(graph, directed=True, unweighted=True, indices=idx)
            if np.isinf(d).any():
                raise ConsistencyError(f"{self.name}: quotient graph is not connected")
            out[idx] = d.astype(np.int32)
        return out

    def _bfs_row(self, v):
        n = len(self.labels)
        dist = np.full(n, -1, dtype=np.int32)
        dist[v] = 0
        frontier = np.array([v])
        d = 0
        while frontier.size:
            d += 1
            nb = np.unique(self.succ[:, frontier].ravel())
            nb = nb[dist[nb] < 0]
            dist[nb] = d
            frontier = nb
        if (dist < 0).any():
            raise ConsistencyError(f"{self.name}: quotient graph is not connected")
        return dist

    def rows(self, vertices):
        """Distance rows for the given vertex indices, shape ``(len, V)``."""
        vertices = np.asarray(vertices, dtype=np.int64)
        if self._table is not None:
            return self._table[vertices]
        out = np.empty((len(vertices), len(self.labels)), dtype=np.int32)
        for j, v in enumerate(vertices.tolist()):
            row = self._row_cache.get(v)
            if row is None:
                row = self._bfs_row(v)
                if len(self._row_cache) < 4096:
                    self._row_cache[v] = row
            out[j] = row
        return out

    def dist(self, i, j):
        return int(self.rows([i])[0, j])

    # labels and group law ----------------------------------------------------
    def vertex(self, label):
        try:
            return self.index[label]
        except (KeyError, TypeError):
            raise ValidationError(f"unknown vertex {label!r} in {self.name}") from None

    def label(self, i):
        return self.labels[i]

    def image(self, g):
        """Vertex index of the image of a group element."""
        if self._image is None:
            raise ValidationError(f"{self.name} has no ambient group")
        return self.index[self._image(g)]

    def left_translate(self, g_label):
        """Vertex permutation ``x -> g x`` (a graph automorphism)."""
        return np.array([self.index[self.mul(g_label, lab)] for lab in self.labels])

    def to_json(self):
        return {
            "spec": self.spec.to_json() if self.spec is not None else None,
            "sub": self.sub.to_json() if self.sub is not None else None,
            "vertices": len(self),
            "diameter": self.diameter,
        }

    def to_dot(self):
        """Directed DOT graph: one arrow ``x -> x s`` per vertex and generator."""
        lines = [f'digraph "{self.name}" {{']
        for g, name in enumerate(self.gen_names):
            for i in range(len(self)):
                lines.append(f'  {i} -> {int(self.succ[g, i])} [label="{name}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_quotient(spec, sub, cap=None):
    """Cayley graph of ``spec / sub`` with the image generating set."""
    spec.validate_subgroup(sub)
    cap = vertex_cap() if cap is None else cap
    order = spec.quotient_order(sub)
    if order > cap:
        raise ResourceError(f"quotient {spec.family}/{sub.params} has {order} vertices, cap is {cap}",
                            cap=cap)
    gens = spec.generators()
    return FiniteQuotient(
        labels=spec.quotient_labels(sub),
        gen_names=list(gens),
        gen_labels=[spec.reduce(sub, g) for g in gens.values()],
        mul=lambda u, v: spec.quotient_mul(sub, u, v),
        inv=lambda u: spec.quotient_inv(sub, u),
        identity=spec.quotient_identity(sub),
        spec=spec,
        sub=sub,
        image=lambda g: spec.reduce(sub, g),
    )


def product_quotient(qx, qy):
    """Cartesian product graph (the l1 product metric).

    This is the Cayley graph of the direct product with the union of the two
    generating sets; vertex ``(i, j)`` gets index ``i * len(qy) + j``.
    """
    labels = [(a, b) for a in qx.labels for b in qy.labels]
    ex, ey = qx.identity_label, qy.identity_label
    gen_names = [f"x.{n}" for n in qx.gen_names] + [f"y.{n}" for n in qy.gen_names]
    gen_labels = [(s, ey) for s in qx.gen_labels] + [(ex, s) for s in qy.gen_labels]
    q = FiniteQuotient(
        labels, gen_names, gen_labels,
        mul=lambda u, v: (qx.mul(u[0], v[0]), qy.mul(u[1], v[1])),
        inv=lambda u: (qx.inv(u[0]), qy.inv(u[1])),
        identity=(ex, ey),
        name=f"({qx.name})x({qy.name})",
    )
    q.factors = (qx, qy)
    return q


def distance(q, x, y):
    """Word distance between two vertex labels of ``q``."""
    return q.dist(q.vertex(x), q.vertex(y))


def components(q, vertices, r, fmap=None, base=None, base_r=None):
    """Partition ``vertices`` (indices) into r-components.

    With ``fmap``/``base``/``base_r`` given, a chain step must also move the
    image under ``fmap`` by at most ``base_r`` in ``base`` (mixed chains).
    Returns a list of sorted index arrays.
    """
    idx = np.unique(np.asarray(list(vertices), dtype=np.int64))
    n = idx.size
    if n == 0:
        return []
    if fmap is None and r >= q.diameter:
        return [idx]
    fidx = fmap[idx] if fmap is not None else None
    visited = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if visited[start]:
            continue
        visited[start] = True
        members = [start]
        frontier = np.array([start])
        while frontier.size:
            adj = q.rows(idx[frontier])[:, idx] <= r
            if fmap is not None:
                adj &= base.rows(fidx[frontier])[:, fidx] <= base_r
            new = np.flatnonzero(adj.any(axis=0) & ~visited)
            visited[new] = True
            members.extend(new.tolist())
            frontier = new
        comps.append(np.sort(idx[members]))
    return comps


def set_diameter(q, vertices):
    v = np.asarray(vertices, dtype=np.int64)
    if v.size == 0:
        return 0
    return int(q.rows(v)[:, v].max())


def r_components(q, subset, r):
    """r-components of ``subset`` as ``[(sorted vertex tuple, diameter), ...]``."""
    for v in subset:
        if not 0 <= v < len(q):
            raise ValidationError(f"vertex {v} not in {q.name}")
    return [(tuple(c.tolist()), set_diameter(q, c)) for c in components(q, subset, r)]


def quotient_map(q_deep, q_shallow):
    """Vertex map ``G/N_deep -> G/N_shallow`` as an index array.

    Checks surjectivity and generator equivariance, which together with the
    shared generating set make the map 1-Lipschitz.
    """
    spec = q_deep.spec
    if spec is None or spec != q_shallow.spec:
        raise ValidationError("quotient_map needs two quotients of the same group")
    if not spec.is_nested(q_deep.sub, q_shallow.sub):
        raise ValidationError(f"{q_deep.sub} is not contained in {q_shallow.sub}")
    fmap = np.array([q_shallow.index[spec.project_label(q_deep.sub, q_shallow.sub, lab)]
                     for lab in q_deep.labels], dtype=np.int64)
    if not np.array_equal(fmap[q_deep.succ], q_shallow.succ[:, fmap]):
        raise ConsistencyError("projection is not generator-equivariant")
    if np.unique(fmap).size != len(q_shallow):
        raise ConsistencyError("projection is not surjective")
    return fmap


# filtrations -------------------------------------------------------------

@dataclass
class Filtration:
    """A nested sequence of finite-index normal subgroups ``N_0 > N_1 > ...``.

    ``certified_injectivity`` memoises, per radius, the first level into
    which the ball of that radius maps injectively.  Entries are written once.
    """

    spec: object
    levels: list
    certified_injectivity: dict = field(default_factory=dict)

    def __post_init__(self):
        self.levels = list(self.levels)
        for sub in self.levels:
            self.spec.validate_subgroup(sub)
        for shallow, deep in zip(self.levels, self.levels[1:]):
            if not self.spec.is_nested(deep, shallow):
                raise ValidationError(f"filtration not nested: {deep} is not inside {shallow}")

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    def to_json(self):
        return {"group": self.spec.to_json(), "levels": [s.to_json() for s in self.levels]}


def injectivity_level(spec, filtration, r, element_cap=None):
    """Smallest level index ``i`` with ``ball(r)`` injective into ``G/N_i``.

    Returns ``None`` when no level of the filtration is injective at radius ``r``.
    """
    if r in filtration.certified_injectivity:
        return filtration.certified_injectivity[r]
    kwargs = {} if element_cap is None else {"element_cap": element_cap}
    elements = list(ball(spec, r, **kwargs))
    found = None
    for i, sub in enumerate(filtration.levels):
        if len({spec.reduce(sub, g) for g in elements}) == len(elements):
            found = i
            break
    if found is not None:
        filtration.certified_injectivity.setdefault(r, found)
    return found


def systole(spec, sub, cutoff):
    """Shortest word length of a non-trivial element of ``sub``, or ``None`` if > cutoff."""
    e_img = spec.quotient_identity(sub)
    gens = list(spec.generators().values())
    e = spec.identity()
    seen = {e}
    frontier = [e]
    for depth in range(1, cutoff + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = spec.multiply(g, s)
                if h in seen:
                    continue
                if spec.reduce(sub, h) == e_img:
                    return depth
                seen.add(h)
                nxt.append(h)
        frontier = nxt
    return None


def z_filtration(levels, rank=1):
    """``N_i = (2^i Z)^rank`` for ``i = 0..levels``."""
    return Filtration(FreeAbelian(rank), [SubgroupSpec.moduli(*([2 ** i] * rank))
                                          for i in range(levels + 1)])


def bs_mersenne_filtration(n, levels):
    """``(m_j, k_j) = (|n^(2^j) - 1|, 2^j)`` for ``j = 0..levels``."""
    return Filtration(BaumslagSolitar(n), [SubgroupSpec.congruence(abs(n ** (2 ** j) - 1), 2 ** j)
                                           for j in range(levels + 1)])


def multiplicative_order(n, m):
    if m == 1:
        return 1
    if math.gcd(n, m) != 1:
        raise ValidationError(f"{n} is not a unit mod {m}")
    k, x = 1, n % m
    while x != 1:
        x = (x * n) % m
        k += 1
    return k


def bs_prime_power_filtration(n, levels, q=None):
    """``(m_j, k_j) = (q^j, ord_{q^j}(n))`` for ``j = 0..levels``.

    ``q`` defaults to the smallest prime not dividing ``n``.  The orders are
    nested (``ord_{q^j} | ord_{q^(j+1)}``) and unbounded, so the kernels
    intersect trivially; the index grows far slower than in the Mersenne
    filtration.
    """
    if q is None:
        q = 2
        while n % q == 0 or any(q % d == 0 for d in range(2, q)):
            q += 1
    return Filtration(BaumslagSolitar(n), [SubgroupSpec.congruence(q ** j, multiplicative_order(n, q ** j))
                                           for j in range(levels + 1)])


def lamplighter_filtration(levels, p=2):
    """Periods ``k_j = 2^j`` for ``j = 0..levels``."""
    return Filtration(Lamplighter(p), [SubgroupSpec.period(2 ** j) for j in range(levels + 1)])
