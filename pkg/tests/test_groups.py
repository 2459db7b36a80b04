import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from coarselab.errors import ResourceError, ValidationError
from coarselab.groups import (BaumslagSolitar, FreeAbelian, GroupSpec, Lamplighter, ball,
                              bs_element, inverse, multiply, word_length)
from oracles import bs_words_ball, words_ball_generic

BS2 = BaumslagSolitar(2)


def test_free_abelian_multiply():
    assert multiply(FreeAbelian(2), (1, 0), (0, 1)) == (1, 1)


def test_bs_relation_b_a_binv():
    g = BS2.generators()
    bab = multiply(BS2, multiply(BS2, g["b"], g["a"]), g["B"])
    assert bab == multiply(BS2, g["a"], g["a"])
    assert BS2.as_fraction(bab) == (Fraction(2), 0)


def test_lamp_squared_is_identity():
    L = Lamplighter(2)
    lamp = L.generators()["l"]
    assert multiply(L, lamp, lamp) == L.identity()


def test_inverses():
    assert inverse(FreeAbelian(1), (5,)) == (-5,)
    b = BS2.generators()["b"]
    assert BS2.as_fraction(inverse(BS2, b))[1] == -1
    assert multiply(BS2, b, inverse(BS2, b)) == BS2.identity()
    for spec in (FreeAbelian(3), BS2, Lamplighter(3)):
        assert inverse(spec, spec.identity()) == spec.identity()


def test_bs_inverse_formula():
    # (x, t)^-1 = (-x n^-t, -t)
    g = bs_element(BS2, Fraction(3, 4), 2)
    x, t = BS2.as_fraction(inverse(BS2, g))
    assert (x, t) == (-Fraction(3, 4) * Fraction(1, 4), -2)


def test_mismatched_spec_rejected():
    with pytest.raises(ValidationError):
        multiply(BS2, (1, 0), (0, 1))


def test_ball_sizes():
    assert sorted(ball(FreeAbelian(1), 3)) == [(i,) for i in range(-3, 4)]
    assert len(ball(BS2, 1)) == 5
    for r in range(5):
        assert len(ball(FreeAbelian(1), r)) == 2 * r + 1


def test_bs_ball_matches_word_enumerator():
    for r in range(5):
        mine = {BS2.as_fraction(g) for g in ball(BS2, r)}
        assert mine == bs_words_ball(2, r)


def test_lamplighter_ball_matches_word_enumerator():
    L = Lamplighter(2)
    for r in range(5):
        assert set(ball(L, r)) == words_ball_generic(L, r)


def test_ball_nested_and_layered():
    b3, b4 = ball(BS2, 3), ball(BS2, 4)
    assert set(b3) <= set(b4)
    assert all(b4[g] == b3[g] for g in b3)


def test_ball_cap():
    with pytest.raises(ResourceError) as exc:
        ball(BS2, 10, element_cap=100)
    assert exc.value.cap == 100


def test_word_length():
    assert word_length(BS2, BS2.identity(), 5) == 0
    a = BS2.generators()["a"]
    assert word_length(BS2, multiply(BS2, a, a), 5) == 2
    assert word_length(BS2, bs_element(BS2, Fraction(1, 2), 0), 5) == 3
    # beyond the cutoff: a not-found signal, not an error
    assert word_length(BS2, bs_element(BS2, Fraction(1, 2), 0), 2) is None


def test_json_roundtrip():
    for spec in (FreeAbelian(2), BaumslagSolitar(-3), Lamplighter(3)):
        assert GroupSpec.from_json(spec.to_json()) == spec


def test_bs_rejects_small_n():
    with pytest.raises(ValidationError):
        BaumslagSolitar(1)


def _random_element(spec, rng, length=8):
    gens = list(spec.generators().values())
    g = spec.identity()
    for _ in range(rng.randrange(length)):
        g = multiply(spec, g, rng.choice(gens))
    return g


@pytest.mark.parametrize("spec", [FreeAbelian(2), BaumslagSolitar(2), BaumslagSolitar(-3),
                                  Lamplighter(2), Lamplighter(3)], ids=str)
def test_group_axioms_random(spec):
    rng = random.Random(7)
    e = spec.identity()
    for _ in range(1000):
        g, h, k = (_random_element(spec, rng) for _ in range(3))
        assert multiply(spec, multiply(spec, g, h), k) == multiply(spec, g, multiply(spec, h, k))
        assert multiply(spec, g, inverse(spec, g)) == e
        assert multiply(spec, inverse(spec, g), g) == e
        assert multiply(spec, g, e) == g == multiply(spec, e, g)


@given(st.integers(-20, 20), st.sampled_from([2, 3, -2, 5]))
def test_bs_conjugation_relation(k, n):
    spec = BaumslagSolitar(n)
    g = spec.generators()
    ak = bs_element(spec, Fraction(k), 0)
    lhs = multiply(spec, multiply(spec, g["b"], ak), g["B"])
    assert lhs == bs_element(spec, Fraction(k * n), 0)


def test_canonical_form_unique():
    # the same element reached by different words has one form
    g = BS2.generators()
    w1 = multiply(BS2, multiply(BS2, g["B"], g["a"]), g["b"])  # 1/2
    w2 = bs_element(BS2, Fraction(1, 2), 0)
    assert w1 == w2
    num, exp, t = w1
    assert num % 2 != 0 or num == 0
