"""Executable experiments: almost-convexity witnesses, the quarter bound,
the triangle-lemma count and deep pockets."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .groups import Group, GroupElement
from .goodgen import GoodGenSet
from .metric import BallTable, GenSet, LowerBound, depth, restricted_distance
from .valuations import BOTTOM, ValuationPair


# -- almost convexity ---------------------------------------------------------


def max_B_letter(gens: GenSet) -> GroupElement:
    """First letter (in generating-set order) with the largest B(shift)."""
    best = max(gens.B(s.shift) for s in gens.letters)
    return next(s for s in gens.letters if gens.B(s.shift) == best)


@dataclass
class WitnessConfig:
    s: GroupElement
    a: object
    J: int
    n_range: Sequence[int] = ()

    def __post_init__(self):
        if self.a.is_zero():
            raise ValueError("witness module element a must be nonzero")
        if self.J < 1:
            raise ValueError("J must be a positive integer")

    @classmethod
    def for_gens(cls, gens: GenSet, a=None, J: int = 1, n_range: Sequence[int] = ()) -> WitnessConfig:
        group = gens.group
        a = group.default_a() if a is None else group.coerce(a)
        return cls(max_B_letter(gens), a, J, tuple(n_range))


def default_J(F: float, a_length: int, z: float, I1_a: float, C: float) -> int:
    """Smallest J with J > (4/z)(F + |a| z/2 - I1(a) + 3C)."""
    bound = (4 / z) * (F + a_length * z / 2 - I1_a + 3 * C)
    return max(1, math.floor(bound) + 1)


def _power(group: Group, s: GroupElement, e: int) -> list[GroupElement]:
    return [s] * e if e >= 0 else [group.inverse(s)] * (-e)


def witness_word(cfg: WitnessConfig, n: int, i: int) -> list[GroupElement]:
    """The word s^(n+i) a s^(-2n) a s^n, with a embedded as (0, a)."""
    group = cfg.s.group
    A = group.embed(cfg.a)
    return _power(group, cfg.s, n + i) + [A] + _power(group, cfg.s, -2 * n) + [A] + _power(group, cfg.s, n)


def witness(cfg: WitnessConfig, n: int, i: int) -> GroupElement:
    return cfg.s.group.word_evaluate(witness_word(cfg, n, i))


def witness_pair(cfg: WitnessConfig, n: int) -> tuple[GroupElement, GroupElement]:
    """(h_n^+, h_n^-) = (g_n(J), g_n(-J)); requires n >= J."""
    if n < cfg.J:
        raise ValueError(f"need n >= J, got n = {n}, J = {cfg.J}")
    return witness(cfg, n, cfg.J), witness(cfg, n, -cfg.J)


@dataclass
class ACRow:
    n: int
    len_plus: int | None
    len_minus: int | None
    len_s2J: int | None
    detour: int | None
    bound: int | None

    @property
    def absent(self) -> bool:
        return self.detour is None


def ac_probe(gens: GenSet, cfg: WitnessConfig, table: BallTable) -> list[ACRow]:
    """One row per n: lengths of h_n^+-, |s^2J| and the detour distance
    between h_n^+ and h_n^- inside the ball of radius max(|h_n^+|, |h_n^-|).
    Rows whose witnesses fall outside the table have ``detour = None``."""
    if table.gens != gens:
        raise ValueError("ball table was built over a different generating set")
    group = gens.group
    s2J = group.word_evaluate(_power(group, cfg.s, 2 * cfg.J))
    len_s2J = table.word_length(s2J)
    a_len = table.word_length(group.embed(cfg.a))
    rows = []
    for n in cfg.n_range:
        hp, hm = witness_pair(cfg, n)
        lp, lm = table.word_length(hp), table.word_length(hm)
        bound = 4 * n - cfg.J + 2 * a_len if a_len is not None else None
        detour = None
        if lp is not None and lm is not None:
            detour = restricted_distance(table, hp, hm, max(lp, lm))
        rows.append(ACRow(n, lp, lm, len_s2J, detour, bound))
    return rows


def witness_valuation_threshold(cfg: WitnessConfig, vp: ValuationPair, z: float) -> int:
    """Smallest n >= J from which z n + I(a) strictly dominates the other two
    summands of h_n^+- for both I1 and I2 (so equality holds when C = 0)."""
    group = cfg.s.group
    n = cfg.J
    beta = [group.word_evaluate(_power(group, cfg.s, e)).base for e in (cfg.J, -cfg.J)]
    while True:
        ok = True
        for f in (vp.eval1, vp.eval2):
            fa = f(cfg.a)
            for bj in beta:
                if not (z * n + fa > max(fa - z * n, f(bj)) + 2 * vp.C):
                    ok = False
        if ok:
            return n
        n += 1


# -- quarter bound -------------------------------------------------------------


@dataclass
class QuarterRow:
    r: int
    slab_count: int
    max_excess: float


@dataclass
class QuarterFit:
    rows: list[QuarterRow]
    F: float
    z: float


def excess(g: GroupElement, length: int, vp: ValuationPair, z: float) -> float:
    """min(I1(k), I2(k)) - |g| z / 4 for g = (m, k); BOTTOM when k = 0."""
    k = g.base
    return min(vp.eval1(k), vp.eval2(k)) - length * z / 4


def quarter_bound_fit(gens: GenSet, vp: ValuationPair, table: BallTable) -> QuarterFit:
    """Per-sphere maximum of the excess over slab elements |B(m)| <= z."""
    z = gens.z
    rows = []
    F = BOTTOM
    for r in range(table.radius + 1):
        best = BOTTOM
        count = 0
        for g in table.sphere(r):
            if abs(gens.B(g.shift)) > z:
                continue
            count += 1
            e = excess(g, r, vp, z)
            if e > best:
                best = e
        rows.append(QuarterRow(r, count, best))
        F = max(F, best)
    return QuarterFit(rows, F, z)


# -- triangle lemma ---------------------------------------------------------------


@dataclass
class LemmaResult:
    admissible: bool
    passed: bool
    p: int | None
    needed_D: float
    value: float          # I1(k) (or I2(k) for the mirrored form)
    terms: int


def _lemma_terms(gens: GenSet, word: Sequence[GroupElement], side: int):
    group = gens.group
    shifts = group.suffix_shifts(word)
    if len(word) < 2 or not word[-1].base.is_zero():
        return None
    heights = [side * gens.B(a) for a in shifts[:-1]]
    if any(h <= 0 for h in heights) or heights[0] > gens.z:
        return None
    return heights


def lemma_needed_D(gens: GenSet, vp: ValuationPair, word: Sequence[GroupElement],
                   side: int = 1) -> tuple[float, float, list[float]] | None:
    """Smallest D for which the word passes, with I(k) and the heights.

    Returns None for inadmissible words.  Enumerates every p: with the
    heights sorted descending as v_1 >= v_2 >= ..., "more than 2p heights
    are >= max(I - D - p, 1)" holds iff v_{2p+1} >= I - D - p, because
    every height is already >= 1.
    """
    heights = _lemma_terms(gens, word, side)
    if heights is None:
        return None
    k = gens.group.word_evaluate(word).base
    value = vp.eval1(k) if side > 0 else vp.eval2(k)
    if value == BOTTOM:
        return BOTTOM, value, heights
    v = sorted(heights, reverse=True)
    need = min(value - p - v[2 * p] for p in range((len(v) + 1) // 2))
    return need, value, heights


def triangle_lemma_check(gens: GenSet, vp: ValuationPair, word: Sequence[GroupElement],
                         D: float, side: int = 1) -> LemmaResult:
    """Check the counting statement for one word.

    The word w_1 .. w_n must end in a pure shift letter (module part 0);
    the terms are positions 1 .. n-1 with suffix shifts a_i, which must
    all satisfy side * B(a_i) > 0, and |B(a_1)| <= z.  Inadmissible words
    are reported, not rejected.
    """
    res = lemma_needed_D(gens, vp, word, side)
    if res is None:
        return LemmaResult(False, True, None, BOTTOM, BOTTOM, 0)
    need, value, heights = res
    if value == BOTTOM:
        return LemmaResult(True, True, 0, BOTTOM, value, len(heights))
    v = sorted(heights, reverse=True)
    witness_p = None
    for p in range((len(v) + 1) // 2):
        if v[2 * p] >= max(value - D - p, 1):
            witness_p = p
            break
    return LemmaResult(True, witness_p is not None, witness_p, need, value, len(heights))


def random_lemma_word(gens: GenSet, rng: random.Random, max_length: int = 30,
                      side: int = 1) -> list[GroupElement]:
    """Random admissible word, built right to left.

    The last letter is a pure shift with side * B > 0 (the return letter);
    every other letter is chosen so the running suffix height stays
    positive and can still come back down to at most z by position 1.
    """
    z = gens.z
    returns = [s for s in gens.letters if s.base.is_zero() and side * gens.B(s.shift) > 0]
    if not returns:
        raise ValueError("generating set has no pure shift letter in the required direction")
    length = rng.randint(2, max_length)
    word = [rng.choice(returns)]
    h = side * gens.B(word[0].shift)
    # word[0] is w_n; positions n-1 .. 2 set the next height
    for pos in range(length - 1, 1, -1):
        remaining = pos - 2          # steps left before a_1 is fixed
        cands = []
        for s in gens.letters:
            h2 = h + side * gens.B(s.shift)
            if h2 > 0 and h2 <= z + remaining * z:
                cands.append(s)
        s = rng.choice(cands)
        word.append(s)
        h += side * gens.B(s.shift)
    if length >= 2:
        word.append(rng.choice(gens.letters))
    word.reverse()
    return word


def fit_lemma_D(gens: GenSet, vp: ValuationPair, words: Iterable[Sequence[GroupElement]],
                side: int = 1) -> int:
    """Smallest natural D passing every admissible word."""
    worst = 0
    for w in words:
        res = lemma_needed_D(gens, vp, w, side)
        if res is None or res[0] == BOTTOM:
            continue
        worst = max(worst, math.ceil(res[0]))
    return worst


# -- deep pockets -----------------------------------------------------------------


@dataclass
class PocketRow:
    i: int
    length: int | None
    depth: int | LowerBound | None
    valuation_bound: float


def pocket_element(ggs: GoodGenSet, a, i: int) -> GroupElement:
    """k_i = t^i a + t^-i a as an element of K inside G."""
    g = ggs.group
    return g.embed(g.add(g.act(i, a), g.act(-i, a)))


def deep_pocket_probe(ggs: GoodGenSet, table: BallTable, i_range: Iterable[int], a=None,
                      H: float = 0.0, max_steps: int | None = None) -> list[PocketRow]:
    """Depth of k_i for each i, over S = {a t a'} u A.

    ``valuation_bound`` is 4(i - C - M - H)/|b|, the lower bound on |k_i|
    implied by the quarter bound; it is a diagnostic only.
    """
    group = ggs.group
    a = ggs.nonzero()[0] if a is None else group.coerce(a)
    if a.is_zero():
        raise ValueError("pocket family needs a != 0")
    if set(table.gens.letters) != set(ggs.gens().letters):
        raise ValueError("ball table must be built over the good generating set")
    b = abs(ggs.b[0])
    rows = []
    for i in i_range:
        k = pocket_element(ggs, a, i)
        n = table.word_length(k)
        d = depth(table, k, max_steps) if n is not None else None
        rows.append(PocketRow(i, n, d, 4 * (i - ggs.C - ggs.M - H) / b))
    return rows
