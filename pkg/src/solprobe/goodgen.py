"""Good generating sets and windowed digit expansions.

For Z[1/6] with t = 3/2 the digit set is A = {0, 1, -1} and every k in
the fuzz box expands as

    k = sum_i (3/2)^i a_i + sum_j (3/2)^{i_j} a_j      (a_i, a_j in A)

with digits supported in a window set by the valuations of k and at most
F' leftover terms.  The primary pair is (-v_2, -v_3); the auxiliary pair
replaces -v_2 by the archimedean size index min{i : |k| <= (3/2)^i}.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .groups import Group, LamplighterGroup, SixthGroup, SixthRational
from .metric import GenSet
from .valuations import BOTTOM, ValuationPair, laurent_pair


class DecompositionError(RuntimeError):
    """No expansion within the window / leftover allowance was found."""


@dataclass(frozen=True)
class LatticeChain:
    """Z = L inside Z[1/6] with P = *2, Q = *3 and reference cube B = [-1, 1]."""

    P: int = 2
    Q: int = 3
    cube_radius: Fraction = Fraction(1)

    def __post_init__(self):
        if math.gcd(self.P, self.Q) != 1:
            raise ValueError("|det P| and |det Q| must be coprime")

    @property
    def t(self) -> Fraction:
        return Fraction(self.Q, self.P)

    def in_lattice(self, k: SixthRational) -> bool:
        return k.unit == 0 or (k.e2 >= 0 and k.e3 >= 0)

    def in_scaled_cube(self, k: SixthRational, i: int) -> bool:
        """k in t^i B, i.e. |k| <= (3/2)^i, decided with integers only."""
        return _abs_le_power(k, i)


@dataclass
class GoodGenSet:
    A: list
    F: float
    F_prime: int | None
    primary: ValuationPair
    auxiliary: ValuationPair
    group: Group
    M: float = 0.0
    C: float = 0.0

    @property
    def b(self) -> tuple:
        return self.primary.b

    def nonzero(self) -> list:
        return [a for a in self.A if not a.is_zero()]

    def in_fuzz_box(self, k) -> bool:
        if k.is_zero():
            return True
        return (self.auxiliary.eval1(k) <= self.primary.eval1(k) + self.F
                and self.auxiliary.eval2(k) <= self.primary.eval2(k) + self.F)

    def letters(self) -> list:
        """{a t a' : a, a' in A} followed by {(0, a) : a in A}."""
        g = self.group
        out = []
        for a in self.A:
            for a2 in self.A:
                out.append(g.element(1, g.add(g.act(1, a), a2)))
        for a in self.A:
            out.append(g.embed(a))
        return out

    def gens(self) -> GenSet:
        return GenSet(self.group, self.letters(), b=self.b, name="good-gen-set")


# -- Z[1/6] -----------------------------------------------------------------


def _abs_le_power(k: SixthRational, i: int) -> bool:
    # |u| 2^e2 3^e3 <= 3^i 2^-i  <=>  |u| 2^(e2+i) 3^(e3-i) <= 1
    n = abs(k.unit)
    p2 = k.e2 + i
    p3 = k.e3 - i
    lhs, rhs = n, 1
    if p2 >= 0:
        lhs <<= p2
    else:
        rhs <<= -p2
    if p3 >= 0:
        lhs *= 3**p3
    else:
        rhs *= 3**-p3
    return lhs <= rhs


def size_index(k: SixthRational) -> float:
    """min{i : |k| <= (3/2)^i}; BOTTOM at zero."""
    if k.unit == 0:
        return BOTTOM
    logk = math.log(abs(k.unit)) + k.e2 * math.log(2) + k.e3 * math.log(3)
    i = math.ceil(logk / math.log(1.5)) - 1
    while not _abs_le_power(k, i):
        i += 1
    while _abs_le_power(k, i - 1):
        i -= 1
    return i


def size_pair() -> ValuationPair:
    """(size index, -v_3): a pair with b = 1 and C = floor(log_{3/2} 2) + 1 = 2."""
    C = math.floor(math.log(2) / math.log(1.5)) + 1
    return ValuationPair("size-triadic", C, (1,), size_index,
                         lambda k: -k.e3 if k.unit else BOTTOM, True)


# I1 = -max{i : k in union_j P^i Q^j L} and I2 = max-index over P^j Q^i L,
# written out as membership tests rather than read off the canonical form
def _chain_I1(k: SixthRational):
    if k.unit == 0:
        return BOTTOM
    f = k.as_fraction()
    i = 0
    # k in 2^i 3^j Z for some j <= 0 iff 2^-i k has no 2 in its denominator
    while (f / Fraction(2) ** i).denominator % 2 == 0:
        i -= 1
    while (f / Fraction(2) ** (i + 1)).denominator % 2 != 0:
        i += 1
    return -i


def _chain_I2(k: SixthRational):
    if k.unit == 0:
        return BOTTOM
    f = k.as_fraction()
    i = 0
    while (f / Fraction(3) ** i).denominator % 3 == 0:
        i -= 1
    while (f / Fraction(3) ** (i + 1)).denominator % 3 != 0:
        i += 1
    return -i


def chain_pair() -> ValuationPair:
    """The primary pair computed from lattice-chain membership."""
    return ValuationPair("chain", 0, (1,), _chain_I1, _chain_I2, True)


def good_gen_set_z16(F: float | None = None, F_prime: int | None = None) -> tuple[GoodGenSet, LatticeChain]:
    group = SixthGroup()
    chain = LatticeChain()
    A = [group.coerce(x) for x in (0, 1, -1)]
    primary = chain_pair()
    aux = size_pair()
    C = max(primary.C, aux.C)
    M = max(max(abs(primary.eval1(a)), abs(primary.eval2(a)), abs(aux.eval1(a)), abs(aux.eval2(a)))
            for a in A if not a.is_zero())
    if F is None:
        F = 2 * M + 4 * C
    ggs = GoodGenSet(A, F, F_prime, primary, aux, group, M=M, C=C)
    return ggs, chain


def good_gen_set_lamplighter(q: int = 2) -> GoodGenSet:
    """All constant polynomials; I1 = I1' = top degree, I2 = I2' = -bottom degree."""
    group = LamplighterGroup(q)
    A = [group.coerce(c) for c in range(q)]
    vp = laurent_pair()
    return GoodGenSet(A, 0, 0, vp, vp, group, M=0, C=0)


def good_gen_set_for(group: Group) -> GoodGenSet:
    if isinstance(group, SixthGroup):
        return good_gen_set_z16()[0]
    if isinstance(group, LamplighterGroup):
        return good_gen_set_lamplighter(group.q)
    raise ValueError(f"no good generating set is shipped for {group!r}")


# -- decomposition ------------------------------------------------------------


@dataclass
class Decomposition:
    k: SixthRational
    digits: dict[int, int]
    leftover: list[tuple[int, int]] = field(default_factory=list)

    @property
    def indices(self) -> list[int]:
        return sorted(set(self.digits) | {i for i, _ in self.leftover})

    def evaluate(self) -> Fraction:
        t = Fraction(3, 2)
        return (sum(t**i * a for i, a in self.digits.items())
                + sum(t**i * a for i, a in self.leftover))

    def window_slack(self) -> int:
        """Smallest F' whose window contains every index used."""
        I1 = -self.k.e2
        I2 = -self.k.e3
        lo = min(-I2, 0)
        hi = max(I1, 0)
        idx = self.indices
        if not idx:
            return 0
        return max(0, idx[-1] - hi, lo - idx[0])

    def required_F_prime(self) -> int:
        return max(len(self.leftover), self.window_slack())


def _residue3(rem: SixthRational, i: int) -> int:
    """Balanced residue mod 3 of rem * (2/3)^i, which must be 3-integral."""
    if rem.unit == 0:
        return 0
    p3 = rem.e3 - i
    if p3 < 0:
        raise AssertionError("remainder lost 3-integrality")
    if p3 > 0:
        return 0
    # 2 = -1 mod 3, and so is 1/2
    r = (rem.unit * (-1 if (rem.e2 + i) % 2 else 1)) % 3
    return -1 if r == 2 else r


def _best_tail(w: int, slack: int, extra: int, bound: float = math.inf):
    """Cheapest way to write 2w(3/2)^i, i = top + slack, as signed digits.

    Each entry (slack', d) puts |d| copies of sign(d) at index top + slack',
    one as a digit and |d| - 1 as leftovers.  Cost is max(leftovers,
    largest slack).  Either stop here (d = 2w) or place d in {-2..2} with
    d = 2w mod 3 and continue with w' = (2w - d)/3.
    """
    if w == 0:
        return max(extra, slack - 1), []
    best_cost = max(extra + 2 * abs(w) - 1, slack)
    best = [(slack, 2 * w)]
    bound = min(bound, best_cost)
    for d in (-2, -1, 0, 1, 2):
        if (2 * w - d) % 3:
            continue
        step_extra = extra + max(abs(d) - 1, 0)
        if max(step_extra, slack + 1) >= bound:
            continue
        cost, rest = _best_tail((2 * w - d) // 3, slack + 1, step_extra, bound)
        if cost < best_cost:
            best_cost, best = cost, ([(slack, d)] if d else []) + rest
            bound = min(bound, cost)
    return best_cost, best


def decompose(ggs: GoodGenSet, chain: LatticeChain, k, check_window: bool = True) -> Decomposition:
    """Expand k in base t = Q/P with digits in A plus a short leftover list.

    Digits are fixed from the lowest index upward: at index i the digit
    is the residue making the remainder divisible by 3^(i+1) 2^-i, which
    is forced because 2 and 3 are coprime.  Once past the top of the
    2-adic window the remainder is 2w(3/2)^i for an integer w, and the
    tail is finished by a small exhaustive search (``_best_tail``) that
    minimises max(leftover count, overshoot of the window).
    """
    group = ggs.group
    k = group.coerce(k)
    if k.is_zero():
        raise ValueError("decompose needs k != 0")
    if not ggs.in_fuzz_box(k):
        raise ValueError(f"{k} is outside the fuzz box for F = {ggs.F}")
    I1 = -k.e2
    I2 = -k.e3
    lo = min(-I2, 0)
    top = max(I1, 0)
    digits: dict[int, int] = {}
    leftover: list[tuple[int, int]] = []
    rem = k
    i = lo
    while rem.unit != 0:
        if i > top:
            # rem = 2 w (3/2)^i: finish with the cheapest tail
            w = group.act(-i, rem).as_fraction() / 2
            if w.denominator != 1:
                raise AssertionError("remainder is not an integer multiple of 2 t^i")
            _, tail = _best_tail(int(w), i - top, 0)
            for j, d in tail:
                sign = 1 if d > 0 else -1
                digits[top + j] = sign
                leftover.extend([(top + j, sign)] * (abs(d) - 1))
            break
        a = _residue3(rem, i)
        if a:
            digits[i] = a
            rem = group.sub(rem, group.act(i, SixthRational(a, 0, 0)))
        i += 1
    result = Decomposition(k, digits, leftover)
    if result.evaluate() != k.as_fraction():
        raise AssertionError(f"decomposition of {k} does not re-evaluate")
    if check_window and ggs.F_prime is not None:
        need = result.required_F_prime()
        if need > ggs.F_prime:
            raise DecompositionError(
                f"{k} needs F' >= {need} (window slack {result.window_slack()}, "
                f"{len(leftover)} leftover terms) but F' = {ggs.F_prime}")
    return result


def sample_fuzz_box(ggs: GoodGenSet, rng: random.Random, val_range: int = 8,
                    max_tries: int = 1000) -> SixthRational:
    """Random nonzero k with |k| <= (3/2)^(I1(k) + F).

    Picks I1 = e and I2 = f uniformly in [-val_range, val_range], then a
    unit u prime to 6 with |u 2^-e 3^-f| inside the box.
    """
    F = int(math.floor(ggs.F))
    for _ in range(max_tries):
        e = rng.randint(-val_range, val_range)
        f = rng.randint(-val_range, val_range)
        # bound on |u|: (3/2)^(e+F) 2^e 3^f = 3^(e+F+f) / 2^F
        num = 3 ** (e + F + f) if e + F + f >= 0 else Fraction(1, 3 ** -(e + F + f))
        bound = Fraction(num) / 2**F
        limit = math.floor(bound)
        if limit < 1:
            continue
        for _ in range(50):
            u = rng.randint(1, limit)
            if u % 2 and u % 3:
                break
        else:
            continue
        u *= rng.choice((1, -1))
        k = SixthRational(u, -e, -f)
        if ggs.in_fuzz_box(k):
            return k
    raise RuntimeError("could not sample the fuzz box")


def fit_F_prime(ggs: GoodGenSet, chain: LatticeChain, samples: Sequence) -> int:
    """Smallest F' under which every sample decomposes inside its window."""
    need = 0
    for k in samples:
        need = max(need, decompose(ggs, chain, k, check_window=False).required_F_prime())
    return need
