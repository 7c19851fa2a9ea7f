"""Exact arithmetic in K x| Z^l for three concrete module families.

Elements are pairs ``(m, k)`` with ``m`` a shift vector and ``k`` in the
module ``K``.  The product is

    (m1, k1)(m2, k2) = (m1 + m2, t^m2 k1 + k2)

Three modules are shipped, all of rank l = 1:

* ``LamplighterGroup(q)``: K = (Z/q)[x, 1/x], t multiplies by x.
* ``SixthGroup()``: K = Z[1/6], t multiplies by 3/2.
* ``SolGroup(M)``: K = Z^2, t acts by an integer hyperbolic matrix M.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

ENCODING_VERSION = 1


class FamilyMismatch(TypeError):
    """Raised when elements of different groups are combined."""


# -- module elements --------------------------------------------------------


class LaurentPoly(NamedTuple):
    """Laurent polynomial over Z/q, stored densely from its lowest exponent.

    ``coeffs[j]`` is the coefficient of ``x**(low + j)``.  The zero
    polynomial is ``low == 0, coeffs == ()``; otherwise the first and last
    coefficients are nonzero.
    """

    q: int
    low: int
    coeffs: tuple[int, ...]

    @classmethod
    def from_dict(cls, q: int, terms: dict[int, int]) -> LaurentPoly:
        terms = {e: c % q for e, c in terms.items() if c % q}
        if not terms:
            return cls(q, 0, ())
        lo, hi = min(terms), max(terms)
        return cls(q, lo, tuple(terms.get(e, 0) for e in range(lo, hi + 1)))

    @classmethod
    def monomial(cls, q: int, exponent: int, coeff: int = 1) -> LaurentPoly:
        return cls.from_dict(q, {exponent: coeff})

    def to_dict(self) -> dict[int, int]:
        return {self.low + j: c for j, c in enumerate(self.coeffs) if c}

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def max_exponent(self) -> int:
        return self.low + len(self.coeffs) - 1

    @property
    def min_exponent(self) -> int:
        return self.low

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e, c in sorted(self.to_dict().items(), reverse=True):
            parts.append(f"x^{e}" if c == 1 else f"{c}*x^{e}")
        return " + ".join(parts)


def _laurent_add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    if not a.coeffs:
        return b
    if not b.coeffs:
        return a
    q = a.q
    lo = min(a.low, b.low)
    hi = max(a.low + len(a.coeffs), b.low + len(b.coeffs))
    out = [0] * (hi - lo)
    off = a.low - lo
    for j, c in enumerate(a.coeffs):
        out[off + j] = c
    off = b.low - lo
    for j, c in enumerate(b.coeffs):
        out[off + j] = (out[off + j] + c) % q
    start = 0
    while start < len(out) and out[start] == 0:
        start += 1
    if start == len(out):
        return LaurentPoly(q, 0, ())
    end = len(out)
    while out[end - 1] == 0:
        end -= 1
    return LaurentPoly(q, lo + start, tuple(out[start:end]))


def _laurent_neg(a: LaurentPoly) -> LaurentPoly:
    q = a.q
    return LaurentPoly(q, a.low, tuple((-c) % q for c in a.coeffs))


def _strip_23(x: int, e2: int, e3: int) -> SixthRational:
    if x == 0:
        return SixthRational(0, 0, 0)
    tz = (x & -x).bit_length() - 1
    if tz:
        x >>= tz
        e2 += tz
    while x % 3 == 0:
        x //= 3
        e3 += 1
    return SixthRational(x, e2, e3)


class SixthRational(NamedTuple):
    """Element ``unit * 2**e2 * 3**e3`` of Z[1/6] with ``unit`` prime to 6.

    Zero is ``(0, 0, 0)``.  This is a canonical form: the 2-adic and
    3-adic valuations are ``e2`` and ``e3``, and the lowest-terms
    fraction can be recovered with :meth:`as_fraction`.
    """

    unit: int
    e2: int
    e3: int

    @classmethod
    def from_fraction(cls, value: Fraction | int) -> SixthRational:
        value = Fraction(value)
        den = value.denominator
        e2 = e3 = 0
        while den % 2 == 0:
            den //= 2
            e2 -= 1
        while den % 3 == 0:
            den //= 3
            e3 -= 1
        if den != 1:
            raise ValueError(f"{value} is not in Z[1/6]")
        return _strip_23(value.numerator, e2, e3)

    def as_fraction(self) -> Fraction:
        f = Fraction(self.unit)
        f *= Fraction(2) ** self.e2
        f *= Fraction(3) ** self.e3
        return f

    @property
    def numerator(self) -> int:
        return self.as_fraction().numerator

    @property
    def denominator(self) -> int:
        return self.as_fraction().denominator

    def is_zero(self) -> bool:
        return self.unit == 0

    def __str__(self) -> str:
        return str(self.as_fraction())


def _sixth_add(a: SixthRational, b: SixthRational) -> SixthRational:
    if a.unit == 0:
        return b
    if b.unit == 0:
        return a
    e2 = min(a.e2, b.e2)
    e3 = min(a.e3, b.e3)
    x = (a.unit << (a.e2 - e2)) * 3 ** (a.e3 - e3) + (b.unit << (b.e2 - e2)) * 3 ** (b.e3 - e3)
    return _strip_23(x, e2, e3)


class LatticeVec(NamedTuple):
    x: int
    y: int

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def __str__(self) -> str:
        return f"({self.x},{self.y})"


ModuleElement = LaurentPoly | SixthRational | LatticeVec


# -- group elements ---------------------------------------------------------


class GroupElement:
    """Immutable pair (shift, base) in a fixed group."""

    __slots__ = ("shift", "base", "group", "_hash")

    def __init__(self, shift: tuple[int, ...], base, group: Group):
        self.shift = shift
        self.base = base
        self.group = group
        self._hash = hash((shift, base))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return (self._hash == other._hash and self.shift == other.shift
                and self.base == other.base
                and (self.group is other.group or self.group == other.group))

    def __mul__(self, other: GroupElement) -> GroupElement:
        return self.group.multiply(self, other)

    def __pow__(self, n: int) -> GroupElement:
        g = self if n >= 0 else self.group.inverse(self)
        return self.group.word_evaluate([g] * abs(n))

    def inverse(self) -> GroupElement:
        return self.group.inverse(self)

    def is_identity(self) -> bool:
        return not any(self.shift) and self.base.is_zero()

    def __repr__(self) -> str:
        m = self.shift[0] if len(self.shift) == 1 else self.shift
        return f"({m}, {self.base})"

    def __getstate__(self):
        return (self.shift, self.base, self.group)

    def __setstate__(self, state):
        shift, base, group = state
        self.shift = shift
        self.base = base
        self.group = group
        self._hash = hash((shift, base))


class Group:
    """Base class: the semidirect product K x| <t_1..t_l>.

    Subclasses supply the module arithmetic (``add``, ``neg``, ``act``,
    ``zero``) and the byte encoding of module elements.
    """

    tag: str = ""
    rank: int = 1

    # module-level arithmetic, overridden per family
    def zero(self):
        raise NotImplementedError

    def add(self, k1, k2):
        raise NotImplementedError

    def neg(self, k):
        raise NotImplementedError

    def act(self, m: Sequence[int] | int, k):
        """Return t^m k."""
        raise NotImplementedError

    def sub(self, k1, k2):
        return self.add(k1, self.neg(k2))

    def coerce(self, k):
        """Convert a convenient Python value to a module element."""
        return k

    def params(self) -> dict:
        return {}

    # group structure
    def element(self, m: Sequence[int] | int, k=None) -> GroupElement:
        if isinstance(m, int):
            m = (m,)
        m = tuple(m)
        if len(m) != self.rank:
            raise ValueError(f"shift has length {len(m)}, group rank is {self.rank}")
        k = self.zero() if k is None else self.coerce(k)
        return GroupElement(m, k, self)

    @property
    def identity(self) -> GroupElement:
        return self.element((0,) * self.rank)

    @property
    def t(self) -> GroupElement:
        return self.element((1,) + (0,) * (self.rank - 1))

    def embed(self, k) -> GroupElement:
        """The element (0, k) of K inside G."""
        return self.element((0,) * self.rank, k)

    def _check(self, g: GroupElement):
        if g.group != self:
            raise FamilyMismatch(f"element of {g.group!r} used in {self!r}")

    def multiply(self, g1: GroupElement, g2: GroupElement) -> GroupElement:
        if g1.group is not self and g1.group != self:
            raise FamilyMismatch(f"cannot multiply elements of {g1.group!r} and {self!r}")
        if g2.group is not self and g2.group != self:
            raise FamilyMismatch(f"cannot multiply elements of {g1.group!r} and {g2.group!r}")
        m2 = g2.shift
        if len(m2) == 1:
            shift = (g1.shift[0] + m2[0],)
        else:
            shift = tuple(a + b for a, b in zip(g1.shift, m2))
        return GroupElement(shift, self.add(self.act(m2, g1.base), g2.base), self)

    def inverse(self, g: GroupElement) -> GroupElement:
        self._check(g)
        neg_m = tuple(-x for x in g.shift)
        return GroupElement(neg_m, self.neg(self.act(neg_m, g.base)), self)

    def word_evaluate(self, letters: Iterable[GroupElement]) -> GroupElement:
        g = self.identity
        for s in letters:
            g = self.multiply(g, s)
        return g

    def suffix_shifts(self, letters: Sequence[GroupElement]) -> list[tuple[int, ...]]:
        """a_i = sum of the shifts strictly to the right of position i.

        With these, the module part of the word product is
        ``sum(t^{a_i} k_i)``.
        """
        out = []
        acc = [0] * self.rank
        for s in reversed(letters):
            out.append(tuple(acc))
            acc = [x + y for x, y in zip(acc, s.shift)]
        out.reverse()
        return out

    # encoding
    def encode(self, g: GroupElement) -> bytes:
        buf = bytearray()
        _put_int(buf, len(g.shift))
        for x in g.shift:
            _put_int(buf, x)
        self._encode_base(buf, g.base)
        return bytes(buf)

    def decode(self, data: bytes) -> GroupElement:
        pos = 0
        l, pos = _get_int(data, pos)
        shift = []
        for _ in range(l):
            x, pos = _get_int(data, pos)
            shift.append(x)
        base, pos = self._decode_base(data, pos)
        if pos != len(data):
            raise ValueError("trailing bytes in element encoding")
        return GroupElement(tuple(shift), base, self)

    def _encode_base(self, buf: bytearray, k):
        raise NotImplementedError

    def _decode_base(self, data: bytes, pos: int):
        raise NotImplementedError

    # sampling
    def random_module_element(self, rng: random.Random, size: int | None = None):
        raise NotImplementedError

    def random_element(self, rng: random.Random, size: int | None = None,
                       shift_window: int = 8) -> GroupElement:
        m = tuple(rng.randint(-shift_window, shift_window) for _ in range(self.rank))
        return GroupElement(m, self.random_module_element(rng, size), self)

    def default_a(self):
        """Smallest convenient nonzero module element."""
        raise NotImplementedError

    def standard_generators(self) -> list[GroupElement]:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self) -> int:
        return hash((self.tag, tuple(sorted((k, str(v)) for k, v in self.params().items()))))

    def __repr__(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{type(self).__name__}({ps})"


def _shift_scalar(m) -> int:
    if isinstance(m, int):
        return m
    if len(m) != 1:
        raise ValueError("shipped families have rank 1")
    return m[0]


def _put_int(buf: bytearray, x: int):
    raw = x.to_bytes((x.bit_length() + 8) // 8, "big", signed=True)
    buf += len(raw).to_bytes(4, "big")
    buf += raw


def _get_int(data: bytes, pos: int) -> tuple[int, int]:
    n = int.from_bytes(data[pos:pos + 4], "big")
    pos += 4
    return int.from_bytes(data[pos:pos + n], "big", signed=True), pos + n


class LamplighterGroup(Group):
    """(Z/q)[x, 1/x] x| Z with t acting as multiplication by x."""

    tag = "lamplighter"

    def __init__(self, q: int = 2):
        if q < 2:
            raise ValueError("q must be at least 2")
        self.q = q
        self._zero = LaurentPoly(q, 0, ())

    def params(self) -> dict:
        return {"q": self.q}

    def zero(self) -> LaurentPoly:
        return self._zero

    def coerce(self, k) -> LaurentPoly:
        if isinstance(k, LaurentPoly):
            if k.q != self.q:
                raise FamilyMismatch(f"coefficients mod {k.q} in a group mod {self.q}")
            return k
        if isinstance(k, dict):
            return LaurentPoly.from_dict(self.q, k)
        if isinstance(k, int):
            return LaurentPoly.from_dict(self.q, {0: k})
        raise TypeError(f"cannot build a Laurent polynomial from {k!r}")

    def add(self, k1, k2):
        return _laurent_add(k1, k2)

    def neg(self, k):
        return _laurent_neg(k)

    def act(self, m, k):
        m = _shift_scalar(m)
        if m == 0 or not k.coeffs:
            return k
        return LaurentPoly(k.q, k.low + m, k.coeffs)

    def default_a(self):
        return LaurentPoly(self.q, 0, (1,))

    def standard_generators(self):
        # t and ta
        return [self.t, self.element(1, self.default_a())]

    def _encode_base(self, buf, k):
        _put_int(buf, k.low)
        _put_int(buf, len(k.coeffs))
        for c in k.coeffs:
            _put_int(buf, c)

    def _decode_base(self, data, pos):
        low, pos = _get_int(data, pos)
        n, pos = _get_int(data, pos)
        coeffs = []
        for _ in range(n):
            c, pos = _get_int(data, pos)
            coeffs.append(c)
        k = LaurentPoly(self.q, low, tuple(coeffs))
        if coeffs and (coeffs[0] == 0 or coeffs[-1] == 0):
            raise ValueError("non-canonical Laurent polynomial encoding")
        return k, pos

    def random_module_element(self, rng, size=None):
        w = 8 if size is None else size
        return LaurentPoly.from_dict(self.q, {e: rng.randrange(self.q) for e in range(-w, w + 1)})


class SixthGroup(Group):
    """Z[1/6] x| Z with t acting as multiplication by 3/2."""

    tag = "z16"

    def params(self) -> dict:
        return {}

    def zero(self) -> SixthRational:
        return SixthRational(0, 0, 0)

    def coerce(self, k) -> SixthRational:
        if isinstance(k, SixthRational):
            return k
        if isinstance(k, (int, Fraction)):
            return SixthRational.from_fraction(k)
        if isinstance(k, str):
            return SixthRational.from_fraction(Fraction(k))
        raise TypeError(f"cannot build an element of Z[1/6] from {k!r}")

    def add(self, k1, k2):
        return _sixth_add(k1, k2)

    def neg(self, k):
        return SixthRational(-k.unit, k.e2, k.e3)

    def act(self, m, k):
        m = _shift_scalar(m)
        if m == 0 or k.unit == 0:
            return k
        return SixthRational(k.unit, k.e2 - m, k.e3 + m)

    def default_a(self):
        return SixthRational(1, 0, 0)

    def standard_generators(self):
        return [self.t, self.embed(self.default_a())]

    def _encode_base(self, buf, k):
        f = k.as_fraction()
        _put_int(buf, f.numerator)
        _put_int(buf, f.denominator)

    def _decode_base(self, data, pos):
        num, pos = _get_int(data, pos)
        den, pos = _get_int(data, pos)
        f = Fraction(num, den)
        if f.numerator != num or f.denominator != den:
            raise ValueError("non-canonical rational encoding")
        return SixthRational.from_fraction(f), pos

    def random_module_element(self, rng, size=None):
        n = 10**6 if size is None else size
        num = rng.randint(-n, n)
        den = 2 ** rng.randint(0, 8) * 3 ** rng.randint(0, 8)
        return SixthRational.from_fraction(Fraction(num, den))


Matrix = tuple[tuple[int, int], tuple[int, int]]


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    return ((a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]))


class SolGroup(Group):
    """Z^2 x|_M Z for an integer hyperbolic M with det M = +-1."""

    tag = "sol"

    def __init__(self, matrix: Sequence[Sequence[int]] = ((2, 1), (1, 1))):
        m = tuple(tuple(int(x) for x in row) for row in matrix)
        if len(m) != 2 or any(len(r) != 2 for r in m):
            raise ValueError("matrix must be 2x2")
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        tr = m[0][0] + m[1][1]
        if abs(det) != 1:
            raise ValueError(f"matrix must have determinant +-1, got {det}")
        # real eigenvalues off the unit circle: |tr| > 2 for det 1, tr != 0 for det -1
        if (det == 1 and abs(tr) <= 2) or (det == -1 and tr == 0):
            raise ValueError(f"matrix {m} is not hyperbolic")
        self.matrix: Matrix = m
        self.det = det
        self.trace = tr
        inv = ((m[1][1] * det, -m[0][1] * det), (-m[1][0] * det, m[0][0] * det))
        self.inverse_matrix: Matrix = inv
        self._powers: dict[int, Matrix] = {0: ((1, 0), (0, 1)), 1: m, -1: inv}

    def params(self) -> dict:
        return {"matrix": self.matrix}

    def power(self, n: int) -> Matrix:
        p = self._powers.get(n)
        if p is None:
            step = 1 if n > 0 else -1
            p = _matmul(self.power(n - step), self._powers[step])
            self._powers[n] = p
        return p

    def zero(self) -> LatticeVec:
        return LatticeVec(0, 0)

    def coerce(self, k) -> LatticeVec:
        if isinstance(k, LatticeVec):
            return k
        x, y = k
        return LatticeVec(int(x), int(y))

    def add(self, k1, k2):
        return LatticeVec(k1.x + k2.x, k1.y + k2.y)

    def neg(self, k):
        return LatticeVec(-k.x, -k.y)

    def act(self, m, k):
        m = _shift_scalar(m)
        if m == 0:
            return k
        p = self.power(m)
        return LatticeVec(p[0][0] * k.x + p[0][1] * k.y, p[1][0] * k.x + p[1][1] * k.y)

    def default_a(self):
        return LatticeVec(1, 0)

    def standard_generators(self):
        return [self.t, self.embed(LatticeVec(1, 0)), self.embed(LatticeVec(0, 1))]

    def _encode_base(self, buf, k):
        _put_int(buf, k.x)
        _put_int(buf, k.y)

    def _decode_base(self, data, pos):
        x, pos = _get_int(data, pos)
        y, pos = _get_int(data, pos)
        return LatticeVec(x, y), pos

    def random_module_element(self, rng, size=None):
        n = 10**6 if size is None else size
        return LatticeVec(rng.randint(-n, n), rng.randint(-n, n))


def make_group(family: str, q: int = 2, matrix=None) -> Group:
    """Build a group from a family tag: ``lamplighter``, ``z16`` or ``sol``."""
    if family in ("lamplighter", "lamplighter-q"):
        return LamplighterGroup(q)
    if family.startswith("lamplighter-"):
        return LamplighterGroup(int(family.split("-", 1)[1]))
    if family == "z16":
        return SixthGroup()
    if family == "sol":
        return SolGroup(matrix if matrix is not None else ((2, 1), (1, 1)))
    raise ValueError(f"unknown group family {family!r}")
