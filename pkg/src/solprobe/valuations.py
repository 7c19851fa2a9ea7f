"""Pairs of valuations (I1, I2) on a module K and an axiom checker.

A pair of valuations shifts oppositely under each t_i,

    I1(t_i k) = I1(k) + b_i,    I2(t_i k) = I2(k) - b_i,

is symmetric under k -> -k, and is subadditive up to a constant C.
Both functions are defined on K minus 0; here they return ``BOTTOM``
(negative infinity) at zero so that minima and maxima over arbitrary
group elements need no special cases.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .groups import Group, LamplighterGroup, SixthGroup, SolGroup

BOTTOM = -math.inf


@dataclass(frozen=True)
class ValuationPair:
    name: str
    C: float
    b: tuple[float, ...]
    eval1: Callable
    eval2: Callable
    exact: bool

    def I1(self, k):
        return self.eval1(k)

    def I2(self, k):
        return self.eval2(k)


def b_functional(vp: ValuationPair | Sequence[float], m: Sequence[int] | int) -> float:
    """B(m) = sum b_i m_i."""
    b = vp.b if isinstance(vp, ValuationPair) else tuple(vp)
    if isinstance(m, int):
        m = (m,)
    if len(m) != len(b):
        raise ValueError(f"shift of length {len(m)} against b of length {len(b)}")
    return sum(bi * mi for bi, mi in zip(b, m))


# -- lamplighter: degree bounds ---------------------------------------------


def _lp_max(k):
    return k.low + len(k.coeffs) - 1 if k.coeffs else BOTTOM


def _lp_negmin(k):
    return -k.low if k.coeffs else BOTTOM


def laurent_pair() -> ValuationPair:
    """I1 = top exponent, I2 = -(bottom exponent); exact, C = 0."""
    return ValuationPair("laurent", 0, (1,), _lp_max, _lp_negmin, True)


# -- Z[1/6]: negated 2-adic and 3-adic valuations -----------------------------


def _neg_v2(k):
    return -k.e2 if k.unit else BOTTOM


def _neg_v3(k):
    return -k.e3 if k.unit else BOTTOM


def dyadic_triadic_pair() -> ValuationPair:
    """I1 = -v_2, I2 = -v_3 on Z[1/6] with t = 3/2; exact, C = 0."""
    return ValuationPair("dyadic-triadic", 0, (1,), _neg_v2, _neg_v3, True)


# -- Sol lattice: logarithms of eigenprojections ----------------------------


def _sqrt_form(p: int, q: int, disc: int) -> float:
    """Evaluate p + q*sqrt(disc) without cancellation."""
    if p == 0 or q == 0 or (p > 0) == (q > 0):
        return p + q * math.sqrt(disc)
    # opposite signs: use the conjugate so the subtraction is exact
    return (p * p - q * q * disc) / (p - q * math.sqrt(disc))


@dataclass(frozen=True)
class _EigenData:
    a: int
    c: int
    d: int
    disc: int
    sign: int          # +1 selects (d-a + sqrt D)/2, -1 the other root
    log_base: float    # log of the expanding factor
    offset: float      # log of the constant norm factor of the projection


def _eigen_setup(M) -> tuple[_EigenData, _EigenData, float]:
    (a, b), (c, d) = M
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4 * det
    if abs(det) != 1 or disc <= 0 or (det == 1 and abs(tr) <= 2) or tr == 0:
        raise ValueError(f"matrix {M} is not a hyperbolic det +-1 matrix")
    root = math.sqrt(disc)
    lam_hi = (tr + root) / 2 if tr > 0 else (tr - root) / 2   # |lam_hi| > 1
    lam_lo = det / lam_hi                                    # the contracting root
    sign_hi = 1 if tr > 0 else -1
    out = []
    for lam, sign, expand in ((lam_hi, sign_hi, abs(lam_hi)), (lam_lo, -sign_hi, 1 / abs(lam_lo))):
        # left eigenvector w = (c, lam - a); right eigenvector v = (lam - d, c)
        w = (c, lam - a)
        v = (lam - d, c)
        wv = w[0] * v[0] + w[1] * v[1]
        # |phi(k)| = |w.k| * |v| / |w.v|
        offset = math.log(math.hypot(*v) / abs(wv))
        out.append(_EigenData(a, c, d, disc, sign, math.log(expand), offset))
    return out[0], out[1], abs(lam_hi)


def _eigen_log(data: _EigenData, k) -> float:
    # 2 w.k = 2c*x + (d - a)*y + sign*y*sqrt(D)
    p = 2 * data.c * k.x + (data.d - data.a) * k.y
    q = data.sign * k.y
    val = _sqrt_form(p, q, data.disc)
    if val == 0:
        return BOTTOM
    return (math.log(abs(val) / 2) + data.offset) / data.log_base


def sol_eigen_pair(M=((2, 1), (1, 1))) -> ValuationPair:
    """I1 = log_{|lam+|} |phi+(k)|, I2 = log_{|lam-|} |phi-(k)|.

    phi+ projects onto the expanding eigenline of M, phi- onto the
    expanding eigenline of M^-1.  Floating point; the shift axiom holds to
    about 1e-12 for coordinates up to 2**40.
    """
    M = tuple(tuple(int(x) for x in row) for row in M)
    hi, lo, lam = _eigen_setup(M)
    C = math.log(2) / math.log(lam) + 1
    return ValuationPair(f"sol-eigen{M}", C, (1,),
                         lambda k: _eigen_log(hi, k) if k.x or k.y else BOTTOM,
                         lambda k: _eigen_log(lo, k) if k.x or k.y else BOTTOM,
                         False)


def pair_for(group: Group) -> ValuationPair:
    """The shipped valuation pair of a group's module."""
    if isinstance(group, LamplighterGroup):
        return laurent_pair()
    if isinstance(group, SixthGroup):
        return dyadic_triadic_pair()
    if isinstance(group, SolGroup):
        return sol_eigen_pair(group.matrix)
    raise TypeError(f"no valuation pair for {group!r}")


# -- axiom checker -----------------------------------------------------------


@dataclass
class AxiomRow:
    axiom: str
    samples: int
    max_violation: float
    passed: bool


@dataclass
class AxiomReport:
    pair: str
    tol: float
    rows: list[AxiomRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["axiom", "samples", "max_violation", "pass"])
        for r in self.rows:
            w.writerow([r.axiom, r.samples, format_real(r.max_violation), "pass" if r.passed else "fail"])
        return buf.getvalue()


def format_real(x: float) -> str:
    if x == BOTTOM:
        return "BOTTOM"
    if isinstance(x, int) or float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def _default_size(group: Group, vp: ValuationPair) -> int | None:
    if isinstance(group, SolGroup):
        # keep M^{+-1} k inside the 2**40 contract
        row = max(sum(abs(x) for x in r) for r in group.matrix + group.inverse_matrix)
        return 2**40 // row
    return None


def check_axioms(vp: ValuationPair, group: Group, samples: int, tol: float = 0.0,
                 seed: int = 0, size: int | None = None) -> AxiomReport:
    """Measure the worst violation of each axiom over random module elements.

    Shift: |I1(t k) - I1(k) - b| and |I2(t k) - I2(k) + b| (and for t^-1).
    Symmetry: |I(-k) - I(k)|.  Subadditivity: excess of I(k1 + k2) over
    max(I(k1), I(k2)) + C.  Every axiom passes iff its violation <= tol.
    """
    rng = random.Random(seed)
    if size is None:
        size = _default_size(group, vp)
    viol = {name: 0.0 for name in ("shift-I1", "shift-I2", "symmetry-I1", "symmetry-I2",
                                   "subadditivity-I1", "subadditivity-I2")}
    counts = dict.fromkeys(viol, 0)
    if samples < 1:
        return AxiomReport(vp.name, tol, [])
    for _ in range(samples):
        k1 = group.random_module_element(rng, size)
        k2 = group.random_module_element(rng, size)
        if not k1.is_zero():
            for i, bi in enumerate(vp.b):
                unit = tuple(1 if j == i else 0 for j in range(len(vp.b)))
                back = tuple(-x for x in unit)
                for m, sgn in ((unit, 1), (back, -1)):
                    tk = group.act(m, k1)
                    v1 = abs(vp.eval1(tk) - vp.eval1(k1) - sgn * bi)
                    v2 = abs(vp.eval2(tk) - vp.eval2(k1) + sgn * bi)
                    viol["shift-I1"] = max(viol["shift-I1"], v1)
                    viol["shift-I2"] = max(viol["shift-I2"], v2)
            counts["shift-I1"] += 1
            counts["shift-I2"] += 1
            nk = group.neg(k1)
            viol["symmetry-I1"] = max(viol["symmetry-I1"], abs(vp.eval1(nk) - vp.eval1(k1)))
            viol["symmetry-I2"] = max(viol["symmetry-I2"], abs(vp.eval2(nk) - vp.eval2(k1)))
            counts["symmetry-I1"] += 1
            counts["symmetry-I2"] += 1
        s = group.add(k1, k2)
        if not (k1.is_zero() or k2.is_zero() or s.is_zero()):
            for name, f in (("subadditivity-I1", vp.eval1), ("subadditivity-I2", vp.eval2)):
                excess = f(s) - max(f(k1), f(k2)) - vp.C
                viol[name] = max(viol[name], excess)
                counts[name] += 1
    rows = [AxiomRow(name, counts[name], viol[name], viol[name] <= tol) for name in viol]
    return AxiomReport(vp.name, tol, rows)
