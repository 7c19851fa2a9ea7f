import pickle
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solprobe.groups import (FamilyMismatch, LamplighterGroup, LatticeVec, LaurentPoly,
                             SixthGroup, SixthRational, SolGroup, make_group)

from oracles import lamp_mul, sol_affine, sol_mul, z16_mul

Z16 = SixthGroup()
LL2 = LamplighterGroup(2)
SOL = SolGroup()


def test_identity_left_multiplication():
    g = Z16.element(3, Fraction(5, 12))
    assert Z16.identity * g == g


def test_z16_product_example():
    assert Z16.element(0, 1) * Z16.element(1) == Z16.element(1, Fraction(3, 2))


def test_lamplighter_product_example():
    x0 = {0: 1}
    assert LL2.element(1, x0) * LL2.element(-1) == LL2.element(0, {-1: 1})


def test_inverse_examples():
    assert Z16.identity.inverse() == Z16.identity
    assert Z16.element(1, Fraction(3, 2)).inverse() == Z16.element(-1, -1)
    assert LL2.element(2, {1: 1}).inverse() == LL2.element(-2, {-1: 1})


def test_act_examples():
    assert Z16.act(2, Z16.coerce(Fraction(1, 3))) == Z16.coerce(Fraction(3, 4))
    assert LL2.act(1, LL2.coerce({2: 1, -1: 1})) == LL2.coerce({3: 1, 0: 1})
    assert SOL.act(1, LatticeVec(1, 0)) == LatticeVec(2, 1)


def test_word_evaluate_examples():
    g = Z16.element(2, Fraction(7, 9))
    assert Z16.word_evaluate([]) == Z16.identity
    assert Z16.word_evaluate([g, g.inverse()]).is_identity()
    s = Z16.element(1)
    assert Z16.word_evaluate([s, s, s]) == Z16.element(3)


def test_suffix_shifts_reproduce_module_part():
    rng = random.Random(3)
    word = [Z16.random_element(rng, size=50, shift_window=3) for _ in range(7)]
    shifts = Z16.suffix_shifts(word)
    assert shifts[-1] == (0,)
    k = Z16.zero()
    for s, a in zip(word, shifts):
        k = Z16.add(k, Z16.act(a, s.base))
    assert k == Z16.word_evaluate(word).base


def test_family_mismatch():
    with pytest.raises(FamilyMismatch):
        Z16.t * LL2.t
    with pytest.raises(FamilyMismatch):
        LamplighterGroup(3).t * LL2.t


def test_sixth_rational_canonical_form():
    k = SixthRational.from_fraction(Fraction(-20, 27))
    assert k == SixthRational(-5, 2, -3)
    assert k.as_fraction() == Fraction(-20, 27)
    with pytest.raises(ValueError):
        SixthRational.from_fraction(Fraction(1, 5))


def test_laurent_zero_and_trimming():
    p = LaurentPoly.from_dict(3, {-2: 3, 0: 4, 5: 0})
    assert p == LaurentPoly(3, 0, (1,))
    assert LaurentPoly.from_dict(2, {1: 2}).is_zero()


def test_sol_rejects_non_hyperbolic():
    with pytest.raises(ValueError):
        SolGroup(((1, 1), (0, 1)))
    with pytest.raises(ValueError):
        SolGroup(((2, 0), (0, 1)))
    with pytest.raises(ValueError):
        SolGroup(((0, 1), (1, 0)))
    # det -1 needs only a nonzero trace
    assert SolGroup(((1, 1), (1, 0))).det == -1


def test_make_group_tags():
    assert make_group("lamplighter-5") == LamplighterGroup(5)
    assert make_group("z16") == Z16
    with pytest.raises(ValueError):
        make_group("heisenberg")


@pytest.mark.parametrize("group", [LL2, LamplighterGroup(5), Z16, SOL], ids=repr)
def test_encoding_roundtrip_and_pickle(group):
    rng = random.Random(11)
    for _ in range(200):
        g = group.random_element(rng)
        assert group.decode(group.encode(g)) == g
        assert pickle.loads(pickle.dumps(g)) == g


def test_decode_rejects_trailing_bytes():
    data = Z16.encode(Z16.t) + b"\x00"
    with pytest.raises(ValueError):
        Z16.decode(data)


# -- cross-check against independent arithmetic ---------------------------------------

small = st.integers(-6, 6)


def _z16_pair(draw_m, num, e2, e3):
    return draw_m, Fraction(num) * Fraction(2) ** e2 * Fraction(3) ** e3


@settings(max_examples=300, deadline=None)
@given(small, st.integers(-500, 500), small, small, small, st.integers(-500, 500), small, small)
def test_z16_matches_fraction_oracle(m1, n1, a1, b1, m2, n2, a2, b2):
    g, h = _z16_pair(m1, n1, a1, b1), _z16_pair(m2, n2, a2, b2)
    want = z16_mul(g, h)
    got = Z16.element(*g) * Z16.element(*h)
    assert got == Z16.element(want[0], want[1])


poly = st.dictionaries(st.integers(-5, 5), st.integers(0, 2), max_size=5)


@settings(max_examples=300, deadline=None)
@given(small, poly, small, poly)
def test_lamplighter_matches_dict_oracle(m1, k1, m2, k2):
    G = LamplighterGroup(3)
    mul = lamp_mul(3)
    norm = lambda d: tuple(sorted((e, c % 3) for e, c in d.items() if c % 3))
    m, k = mul((m1, norm(k1)), (m2, norm(k2)))
    assert G.element(m1, k1) * G.element(m2, k2) == G.element(m, dict(k))


vec = st.tuples(st.integers(-50, 50), st.integers(-50, 50))


@settings(max_examples=300, deadline=None)
@given(small, vec, small, vec)
def test_sol_matches_affine_matrix_oracle(m1, k1, m2, k2):
    M = SOL.matrix
    got = SOL.element(m1, k1) * SOL.element(m2, k2)
    want = sol_mul(sol_affine(M, m1, k1), sol_affine(M, m2, k2))
    assert want == sol_affine(M, got.shift[0], tuple(got.base))
