import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solprobe.goodgen import (DecompositionError, LatticeChain, decompose, fit_F_prime,
                              good_gen_set_for, good_gen_set_lamplighter, good_gen_set_z16,
                              sample_fuzz_box, size_index)
from solprobe.groups import LamplighterGroup, SixthGroup, SolGroup
from solprobe.valuations import dyadic_triadic_pair

from oracles import all_digit_sums

Z16 = SixthGroup()


@pytest.fixture(scope="module")
def z16_good():
    return good_gen_set_z16(F_prime=4)


def test_digit_set_and_constants(z16_good):
    ggs, chain = z16_good
    assert [a.as_fraction() for a in ggs.A] == [0, 1, -1]
    assert (ggs.M, ggs.C, ggs.F) == (0, 2, 8)
    assert chain.t == Fraction(3, 2)
    with pytest.raises(ValueError):
        LatticeChain(P=2, Q=4)


def test_letters_are_a_t_a_prime(z16_good):
    ggs, _ = z16_good
    gens = ggs.gens()
    shifts = sorted({s.shift[0] for s in gens.letters})
    assert shifts == [-1, 0, 1]
    bases = {s.base.as_fraction() for s in gens.letters if s.shift == (1,)}
    assert bases == {Fraction(3, 2) * a + b for a in (0, 1, -1) for b in (0, 1, -1)}
    assert gens.z == 1


def test_size_index_examples():
    assert size_index(Z16.coerce(1)) == 0
    assert size_index(Z16.coerce(Fraction(3, 2))) == 1
    assert size_index(Z16.coerce(Fraction(2, 3))) == -1
    assert size_index(Z16.coerce(Fraction(-9, 4))) == 2


@settings(max_examples=300, deadline=None)
@given(st.integers(-10**9, 10**9).filter(bool), st.integers(-30, 30), st.integers(-30, 30))
def test_size_index_is_exact(n, e2, e3):
    k = Z16.coerce(Fraction(n) * Fraction(2) ** e2 * Fraction(3) ** e3)
    i = size_index(k)
    t = Fraction(3, 2)
    assert abs(k.as_fraction()) <= t**i
    assert abs(k.as_fraction()) > t ** (i - 1)


def test_chain_pair_agrees_with_dyadic_triadic(z16_good):
    ggs, _ = z16_good
    ref = dyadic_triadic_pair()
    rng = random.Random(8)
    for _ in range(1000):
        k = Z16.random_module_element(rng)
        if k.is_zero():
            continue
        assert ggs.primary.I1(k) == ref.I1(k)
        assert ggs.primary.I2(k) == ref.I2(k)


def test_decompose_examples(z16_good):
    ggs, chain = z16_good
    one = decompose(ggs, chain, 1)
    assert one.digits == {0: 1} and one.leftover == []
    d = decompose(ggs, chain, Fraction(3, 2))
    assert d.digits == {1: 1} and d.leftover == []


def test_decompose_five_quarters(z16_good):
    # frozen after exact re-evaluation: -1 + (3/2)^2 = 5/4, window [0, 2]
    ggs, chain = z16_good
    d = decompose(ggs, chain, Fraction(5, 4))
    assert d.digits == {0: -1, 2: 1}
    assert d.leftover == []
    assert d.evaluate() == Fraction(5, 4)
    assert d.window_slack() == 0


def test_decompose_rejects_zero_and_out_of_box(z16_good):
    ggs, chain = z16_good
    with pytest.raises(ValueError):
        decompose(ggs, chain, 0)
    with pytest.raises(ValueError):
        decompose(ggs, chain, 10**6)


def test_decompose_raises_when_F_prime_too_small():
    ggs, chain = good_gen_set_z16(F_prime=0)
    with pytest.raises(DecompositionError):
        decompose(ggs, chain, 2)


def test_digit_only_values_match_enumeration(z16_good):
    # every value with digits in [0, 3] and no leftover decomposes back to itself
    ggs, chain = z16_good
    for v in all_digit_sums(0, 3):
        if v == 0 or not ggs.in_fuzz_box(Z16.coerce(v)):
            continue
        d = decompose(ggs, chain, v, check_window=False)
        assert d.evaluate() == v


def test_fuzz_box_samples_decompose(z16_good):
    ggs, chain = z16_good
    rng = random.Random(1)
    ks = [sample_fuzz_box(ggs, rng) for _ in range(300)]
    assert all(ggs.in_fuzz_box(k) for k in ks)
    assert fit_F_prime(ggs, chain, ks) <= 4
    for k in ks:
        d = decompose(ggs, chain, k)
        assert d.evaluate() == k.as_fraction()
        assert all(a in (-1, 1) for a in d.digits.values())
        assert all(a in (-1, 1) for _, a in d.leftover)


def test_lamplighter_good_set():
    ggs = good_gen_set_lamplighter(3)
    assert len(ggs.A) == 3 and len(ggs.nonzero()) == 2
    assert len(ggs.gens()) == len(set(ggs.gens().letters))
    assert good_gen_set_for(LamplighterGroup(2)).group == LamplighterGroup(2)
    with pytest.raises(ValueError):
        good_gen_set_for(SolGroup())
