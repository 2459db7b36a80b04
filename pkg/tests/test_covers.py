import random

import numpy as np
import pytest

from coarselab.covers import (Cover, IntervalControl, SingleClassControl, brute_force_min_cover,
                              expand_cover, interval_cover, iterate_expand, ladder_bound,
                              membership_counts, multiplicity, neighborhood, product_cover,
                              pullback_cover, union_components_check, verify_cover)
from coarselab.errors import ValidationError
from coarselab.groups import BaumslagSolitar, FreeAbelian, SubgroupSpec
from coarselab.quotients import build_quotient, components, quotient_map, set_diameter
from oracles import all_distances, naive_components, naive_verify

BS2 = BaumslagSolitar(2)


def C(n):
    return build_quotient(FreeAbelian(1), SubgroupSpec.moduli(n))


def BSq(m, k, n=2):
    return build_quotient(BaumslagSolitar(n), SubgroupSpec.congruence(m, k))


ALT16 = [set(range(0, 4)) | set(range(8, 12)), set(range(4, 8)) | set(range(12, 16))]


# verify_cover -----------------------------------------------------------

def test_verify_examples():
    assert verify_cover(C(8), [range(8)], 0, 1, 4).passed
    cert = verify_cover(C(16), ALT16, 1, 2, 3)
    assert cert.passed and cert.d_effective == 1 and cert.worst_component_diameter == 3
    bad = verify_cover(C(16), ALT16, 1, 2, 2)
    assert not bad.passed and bad.worst_component_diameter == 3
    assert "diameter 3" in bad.failure


def test_verify_failures():
    hole = verify_cover(C(8), [range(7)], 0, 1, 4)
    assert not hole.passed and hole.failure == "coverage hole at vertex 7"
    many = verify_cover(C(8), [range(8), [], []], 1, 1, 4)
    assert not many.passed
    with pytest.raises(ValidationError):
        verify_cover(C(8), [[0, 99]], 0, 1, 4)


def _random_quotient(rng):
    choice = rng.randrange(4)
    if choice == 0:
        return C(rng.randrange(3, 60))
    if choice == 1:
        return build_quotient(FreeAbelian(2), SubgroupSpec.moduli(rng.randrange(2, 12), rng.randrange(2, 12)))
    if choice == 2:
        return BSq(*rng.choice([(15, 4), (3, 2), (5, 4), (7, 3), (31, 5)]))
    return BSq(*rng.choice([(8, 2), (26, 3), (13, 3)]), n=3)


def test_verify_agrees_with_naive_oracle():
    rng = random.Random(11)
    for _ in range(100):
        q = _random_quotient(rng)
        k = rng.randrange(1, 4)
        classes = [set() for _ in range(k)]
        for v in range(len(q)):
            for j in rng.sample(range(k), rng.randrange(1, k + 1)):
                classes[j].add(v)
            if rng.random() < 0.02:  # leave occasional holes
                for c in classes:
                    c.discard(v)
        d, r, R = rng.randrange(0, 4), rng.randrange(1, 4), rng.randrange(0, 8)
        cert = verify_cover(q, classes, d, r, R)
        labels = [{q.label(v) for v in c} for c in classes]
        passed, mult, worst = naive_verify(q, labels, d, r, R)
        assert (cert.passed, cert.multiplicity, cert.worst_component_diameter) == (passed, mult, worst)


# multiplicity -------------------------------------------------------------

def test_multiplicity():
    assert multiplicity(ALT16) == 1
    assert multiplicity([range(16), range(16)]) == 2
    assert multiplicity([range(16), range(8)]) == 1
    assert multiplicity(ALT16, q=C(16)) == 1
    assert multiplicity([range(8)], q=C(16)) == 0


# interval_cover ---------------------------------------------------------

def test_interval_examples():
    c16 = interval_cover(C(16), 2)
    assert [set(c) for c in c16.classes] == ALT16
    assert verify_cover(C(16), c16, 1, 2, 3).passed
    assert verify_cover(C(8), interval_cover(C(8), 1), 1, 1, 1).passed
    c4 = interval_cover(C(4), 1)
    assert [sorted(c) for c in c4.classes] == [[0, 1], [2, 3]]
    assert verify_cover(C(4), c4, 1, 1, 1).passed
    assert interval_cover(C(7), 2) is None


@pytest.mark.parametrize("N,r", [(N, r) for r in (1, 2, 3, 5) for N in range(4 * r, 4 * r + 30)])
def test_interval_general(N, r):
    c = interval_cover(C(N), r)
    R = 2 * r - 1 if N % (4 * r) == 0 else 4 * r - 1
    assert c.R == R
    assert verify_cover(C(N), c, 1, r, R).passed


def test_interval_control_bound_level_independent():
    for N in range(1, 80):
        ctrl = IntervalControl(C(N))
        for s in (1, 2, 3):
            assert verify_cover(C(N), ctrl.cover(s), 1, s, ctrl.bound(s)).passed


def test_interval_rejects_non_cyclic():
    with pytest.raises(ValidationError):
        interval_cover(BSq(15, 4), 1)


# expand_cover -------------------------------------------------------------

def _r_disjoint(q, pieces, r):
    """No pair of points of distinct pieces is within r, checked pairwise."""
    D = q.rows(range(len(q)))
    items = [np.fromiter(p, dtype=np.int64) for p in pieces.values() if p]
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if (D[np.ix_(items[i], items[j])] <= r).any():
                return False
    return True


def test_expand_spec_example():
    q = C(16)
    base = Cover(IntervalControl(q).cover(6), r=6, R=11)
    assert verify_cover(q, base, 1, 6, 11).passed
    out = expand_cover(q, base, 2, 1)
    cert = verify_cover(q, out, 2, 2, 15)
    assert len(out) == 3 and cert.passed and cert.multiplicity == 2
    assert _r_disjoint(q, out.pieces, 2)


def test_expand_aligned_example():
    q = C(48)
    base = interval_cover(q, 6)
    out = expand_cover(q, base, 2, 1)
    cert = verify_cover(q, out, 2, 2, 15)
    assert cert.passed and cert.multiplicity == 2
    assert _r_disjoint(q, out.pieces, 2)
    # no r-chain inside the new class joins two different W_S
    new = out.classes[-1]
    owner = {v: S for S, p in out.pieces.items() for v in p}
    dist = all_distances(q)
    for comp in naive_components(dist, {q.label(v) for v in new}, 2):
        assert len({owner[q.index[lab]] for lab in comp}) == 1


def test_expand_empty_new_class():
    q = C(16)
    full = Cover((range(16), range(16)), r=3, R=8)
    out = expand_cover(q, full, 1, 1)
    assert out.classes[-1] == frozenset()
    assert verify_cover(q, out, 2, 1, 10).passed


def test_expand_precondition():
    q = C(16)
    with pytest.raises(ValidationError) as exc:
        expand_cover(q, Cover(ALT16, R=3), 2, 1)  # needs verification at 3r = 6
    assert exc.value.certificate is not None
    with pytest.raises(ValidationError):
        expand_cover(q, Cover(ALT16, R=3), 1, 0)  # multiplicity 1 < k - n = 2


def _random_expand_instance(rng):
    if rng.random() < 0.5:
        q = C(rng.randrange(8, 120))
    else:
        q = rng.choice([BSq(15, 4), BSq(31, 5), BSq(9, 6), BSq(26, 3, n=3)])
    r = rng.randrange(1, 3)
    k = rng.randrange(1, 4)
    # random partition into k classes, certified at (k-1, 3r, measured bound)
    lab = np.array([rng.randrange(k) for _ in range(len(q))])
    classes = [np.flatnonzero(lab == j) for j in range(k)]
    R_in = max(set_diameter(q, c) for cl in classes for c in components(q, cl, 3 * r)) if len(q) else 0
    n = k - 1  # a partition has multiplicity 1 = k - n
    return q, Cover(tuple(classes), r=3 * r, R=R_in), r, n


def test_expand_properties_random():
    rng = random.Random(5)
    for _ in range(50):
        q, cov, r, n = _random_expand_instance(rng)
        k = len(cov)
        out = expand_cover(q, cov, r, n)
        cert = verify_cover(q, out, k, r, cov.R + 2 * r)
        assert len(out) == k + 1 and cert.passed
        assert cert.multiplicity >= k - n + 1
        cin, cout = membership_counts(q, cov), membership_counts(q, out)
        grown = out.classes[:k]
        for v in range(len(q)):
            S = {i for i in range(k) if v in cov.classes[i]}
            if cin[v] == k - n and not any(v in grown[i] for i in range(k) if i not in S):
                assert cout[v] == k - n + 1
        assert _r_disjoint(q, out.pieces, r)


# iterate_expand --------------------------------------------------------

def test_iterate_expand_examples():
    q = C(64)
    ctrl = IntervalControl(q)
    same = iterate_expand(q, ctrl, 1, 2)
    assert same.classes == tuple(frozenset(c) for c in ctrl.cover(1))
    for k, mult in ((3, 2), (4, 3)):
        c = iterate_expand(q, ctrl, 1, k)
        cert = verify_cover(q, c, k - 1, 1, c.R)
        assert len(c) == k and cert.passed and cert.multiplicity == mult
        assert c.R == c.ladder[-1][1] == ladder_bound(ctrl.bound, 1, k - 2)
        assert [rad for rad, _ in c.ladder] == [3 ** i for i in reversed(range(k - 1))]
    with pytest.raises(ValidationError):
        iterate_expand(q, ctrl, 1, 1)


def test_iterate_expand_ctrl_failure_names_radius():
    q = C(64)
    with pytest.raises(ValidationError, match="radius 3"):
        iterate_expand(q, SingleClassControl(q, 5), 1, 2)


# product_cover --------------------------------------------------------

@pytest.mark.parametrize("r", [1, 2])
def test_product_spec_example(r):
    q = C(16)
    cx = iterate_expand(q, IntervalControl(q), r, 3)
    qp, pc = product_cover(q, cx, 1, q, cx, 1)
    cert = verify_cover(qp, pc, 2, r, cx.R + cx.R)
    assert len(qp) == 256 and len(pc) == 3 and cert.passed
    counts = membership_counts(qp, pc)
    assert counts.min() >= 1


def test_product_with_point():
    q, pt = C(16), C(1)
    cx = iterate_expand(q, IntervalControl(q), 1, 2)
    qp, pc = product_cover(q, cx, 1, pt, Cover((range(1), range(1))), 0)
    assert [set(c) for c in pc.classes] == [set(c) for c in cx.classes]


def test_product_mismatch():
    q = C(16)
    cx = iterate_expand(q, IntervalControl(q), 1, 3)
    with pytest.raises(ValidationError):
        product_cover(q, cx, 1, q, interval_cover(q, 1), 1)


def test_product_random():
    rng = random.Random(9)
    for _ in range(10):
        a, b = C(rng.randrange(8, 30)), C(rng.randrange(8, 30))
        rx, ry = rng.randrange(1, 3), rng.randrange(1, 3)
        cx = iterate_expand(a, IntervalControl(a), rx, 3)
        cy = iterate_expand(b, IntervalControl(b), ry, 3)
        qp, pc = product_cover(a, cx, 1, b, cy, 1)
        assert verify_cover(qp, pc, 2, min(rx, ry), cx.R + cy.R).passed


# union_components_check -----------------------------------------------

def test_union_empty_b():
    q = C(64)
    A = {v for v in range(64) if v % 32 < 16}  # two blocks of 16, 16 apart
    assert union_components_check(q, A, set(), 9, 15, 1, 0).status == "pass"


def test_union_c64_example():
    q = C(64)
    A = {v for v in range(64) if v % 32 < 16}
    B = {v for v in range(64) if v % 16 in (15, 0, 1)}  # small blocks on the seams
    comps = components(q, B, 1)
    R_B = max(set_diameter(q, c) for c in comps)
    assert R_B + 2 < 9
    v = union_components_check(q, A, B, 9, 15, 1, R_B)
    assert v.status == "pass"
    worst = max(set_diameter(q, c) for c in components(q, A | B, 1))
    assert 15 < worst <= 2 * 9 + 15


def test_union_precondition():
    q = C(64)
    assert union_components_check(q, set(), set(), 3, 5, 1, 2).status == "precondition"
    assert union_components_check(q, set(range(64)), set(), 9, 5, 1, 0).status == "precondition"


def random_union_instance(rng):
    q = rng.choice([C(rng.randrange(20, 90)), BSq(15, 4), BSq(31, 5)])
    r_B, R_B = rng.randrange(1, 3), rng.randrange(0, 4)
    r_A = R_B + 2 * r_B + rng.randrange(1, 4)
    R_A = rng.randrange(0, 10)

    def bounded(r, R, density):
        S = [v for v in range(len(q)) if rng.random() < density]
        keep = [c for c in components(q, S, r) if set_diameter(q, c) <= R]
        return set(int(v) for c in keep for v in c)

    A = bounded(r_A, R_A, rng.random())
    B = bounded(r_B, R_B, rng.random())
    return q, A, B, r_A, R_A, r_B, R_B


def test_union_random():
    rng = random.Random(13)
    for _ in range(200):
        q, A, B, r_A, R_A, r_B, R_B = random_union_instance(rng)
        assert union_components_check(q, A, B, r_A, R_A, r_B, R_B).status == "pass"


# brute force --------------------------------------------------------------

def test_brute_force_examples():
    res = brute_force_min_cover(C(12), 1, 2, 3)
    assert res.minimum == 2 and res.refuted == [1]
    assert verify_cover(C(12), res.witness, 1, 1, 2).passed
    res = brute_force_min_cover(C(32), 1, 15, 3)
    assert res.minimum == 2 and res.refuted == [1]
    assert brute_force_min_cover(C(1), 1, 0, 3).minimum == 1


def test_brute_force_exhausted():
    res = brute_force_min_cover(BSq(15, 4), 2, 1, 3, budget=50)
    assert res.exhausted and res.minimum is None


def test_brute_force_monotone():
    q = C(14)
    mins = [brute_force_min_cover(q, 2, R, 4).minimum for R in range(0, 9)]
    assert all(a is None or b is None or b <= a for a, b in zip(mins, mins[1:]))
    assert all(b is not None for a, b in zip(mins, mins[1:]) if a is not None)


def test_brute_force_lower_bound_is_exact():
    # C_6 at r = 1, R = 0 needs classes of isolated points: 2 suffice on an even cycle
    assert brute_force_min_cover(C(6), 1, 0, 3).minimum == 2
    assert brute_force_min_cover(C(7), 1, 0, 3).minimum == 3


# pullback -------------------------------------------------------------------

def test_pullback_z():
    shallow, deep = C(8), C(16)
    cov = interval_cover(shallow, 1)
    pulled = pullback_cover(cov, quotient_map(deep, shallow))
    assert verify_cover(deep, pulled, 1, 1, 1).passed
    for c0, c1 in zip(cov.classes, pulled.classes):
        a, b = components(shallow, c0, 1), components(deep, c1, 1)
        assert len(b) == 2 * len(a)
        assert sorted(len(x) for x in b) == sorted(2 * [len(x) for x in a])
    full = pullback_cover(Cover((range(8),)), quotient_map(deep, shallow))
    assert full.classes[0] == frozenset(range(16))


def test_pullback_bs_preserves_diameters():
    shallow, deep = BSq(15, 4), BSq(255, 8)
    base = brute_force_min_cover(shallow, 1, 1, 2)
    assert base.minimum == 2 and base.refuted == [1]
    pulled = pullback_cover(base.witness, quotient_map(deep, shallow))
    assert verify_cover(shallow, base.witness, 2, 1, 1).passed
    assert verify_cover(deep, pulled, 2, 1, 1).passed
    for c0, c1 in zip(base.witness.classes, pulled.classes):
        d0 = sorted(set_diameter(shallow, c) for c in components(shallow, c0, 1))
        d1 = sorted(set_diameter(deep, c) for c in components(deep, c1, 1))
        assert set(d0) == set(d1)


def test_neighborhood():
    assert neighborhood(C(16), {0}, 2) == frozenset({14, 15, 0, 1, 2})
    assert neighborhood(C(16), {0}, 2, within={0, 1, 5}) == frozenset({0, 1})
