import math
import random

import pytest

from coarselab.errors import ValidationError
from coarselab.hirsch import (Extension, Finite, FreeAbelian, IncreasingUnion, LocalRank, Trivial,
                              VirtuallyAbelian, Wreath, box_dimension_upper_bound, derive, hirsch,
                              parse)


@pytest.mark.parametrize("text,value", [
    ("Ext(Local(1), Z(1))", 2),
    ("Wreath(F(2), Z(1))", 1),
    ("Trivial", 0),
    ("Ext(Z(2), Z(3))", 5),
    ("Z(4)", 4),
    ("F(6)", 0),
    ("Wreath(F(2), VAb(3))", 3),
    ("Union(Z(1), Z(2), Z(2))", 2),
    ("Union(Z(1), limit=inf)", math.inf),
    ("Extension(LocalRank(1), FreeAbelian(1))", 2),
    ("IncreasingUnion(Finite(2), VirtuallyAbelian(1))", 1),
])
def test_values(text, value):
    assert hirsch(text) == value


def test_bound_object():
    b = box_dimension_upper_bound("Ext(Local(1), Z(1))")
    assert b.value == 2 and "at most 2" in str(b)
    assert box_dimension_upper_bound(FreeAbelian(3)).value == 3


def test_derivation_lines():
    value, lines = derive("Ext(Local(1), Z(1))")
    assert value == 2 and len(lines) == 3
    assert lines[0].startswith("h(Ext(Local(1), Z(1))) = 2")
    assert lines[1].startswith("  h(Local(1)) = 1")


def _random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        leaf = rng.choice([Trivial(), Finite(rng.randrange(1, 7)), FreeAbelian(rng.randrange(0, 4)),
                           VirtuallyAbelian(rng.randrange(0, 4)), LocalRank(rng.randrange(0, 3))])
        return leaf
    kind = rng.randrange(3)
    if kind == 0:
        return Extension(_random_tree(rng, depth - 1), _random_tree(rng, depth - 1))
    if kind == 1:
        return IncreasingUnion(tuple(_random_tree(rng, depth - 1) for _ in range(rng.randrange(1, 4))))
    return Wreath(Finite(rng.randrange(1, 5)), _random_tree(rng, depth - 1))


def _leaf_sum(e):
    """Independent evaluator over the tree shape."""
    if isinstance(e, (Trivial, Finite)):
        return 0
    if isinstance(e, (FreeAbelian, VirtuallyAbelian, LocalRank)):
        return e.rank
    if isinstance(e, Extension):
        return _leaf_sum(e.kernel) + _leaf_sum(e.quotient)
    if isinstance(e, IncreasingUnion):
        return max(_leaf_sum(t) for t in e.terms)
    return _leaf_sum(e.acting)


def test_random_trees_roundtrip_and_oracle():
    rng = random.Random(4)
    for _ in range(300):
        e = _random_tree(rng, 4)
        assert parse(str(e)) == e
        assert hirsch(e) == _leaf_sum(e)


def test_reassociation():
    rng = random.Random(6)
    for _ in range(200):
        a, b, c = (_random_tree(rng, 3) for _ in range(3))
        assert hirsch(Extension(Extension(a, b), c)) == hirsch(Extension(a, Extension(b, c)))


def test_union_permutation():
    rng = random.Random(8)
    for _ in range(100):
        terms = [_random_tree(rng, 2) for _ in range(rng.randrange(1, 6))]
        shuffled = terms[:]
        rng.shuffle(shuffled)
        assert hirsch(IncreasingUnion(tuple(terms))) == hirsch(IncreasingUnion(tuple(shuffled)))
        assert hirsch(IncreasingUnion(tuple(terms))) == max(hirsch(t) for t in terms)


@pytest.mark.parametrize("bad", ["", "Ext(Z(1))", "Z(", "Wreath(Z(1), Z(1))", "Foo(1)", "F(0)",
                                 "Union()", "Union(Z(1), limit=5)", "Z(1) Z(2)", "Z(-1)"])
def test_malformed(bad):
    with pytest.raises(ValidationError):
        hirsch(bad)
