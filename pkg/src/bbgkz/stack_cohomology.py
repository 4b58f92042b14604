"""Orbifold cohomology H, its dual module H^c and the Euler pairing chi_H.

Bases (rank 2):
    H   : 1_(0,0), D_{i_1}, ..., D_{i_r}, 1_gamma (gamma twisted)
    H^c : F,       F_{i_1}, ..., F_{i_r}, F_{0,gamma}

All products of divisor classes vanish, so the untwisted sector is a ring of
dual numbers in r variables.  Coefficients are generic: Fraction for exact
work, sympy expressions where trigonometric Todd weights appear, complex for
numerics.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import sympy

from .lattice_fan import Fan, TwistedSector, box_count, dual_sector, twisted_sectors


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v != 0}


@dataclass(frozen=True)
class HElement:
    """unit * 1_(0,0) + sum d[i] D_i + sum tw[m] 1_(m,1)."""

    fan: Fan
    unit: object = 0
    d: dict = field(default_factory=dict)
    tw: dict = field(default_factory=dict)

    @classmethod
    def one(cls, fan: Fan) -> "HElement":
        """Multiplicative identity: the unit of every sector."""
        return cls(fan, 1, {}, {s.m: 1 for s in twisted_sectors(fan)})

    @classmethod
    def basis(cls, fan: Fan, label) -> "HElement":
        kind, idx = label
        if kind == "1":
            return cls(fan, 1)
        if kind == "D":
            return reduce_D(idx, fan)
        return cls(fan, 0, {}, {idx: 1})

    def __add__(self, other: "HElement") -> "HElement":
        d = dict(self.d)
        for k, val in other.d.items():
            d[k] = d.get(k, 0) + val
        tw = dict(self.tw)
        for k, val in other.tw.items():
            tw[k] = tw.get(k, 0) + val
        return HElement(self.fan, self.unit + other.unit, _clean(d), _clean(tw))

    def scale(self, s) -> "HElement":
        return HElement(self.fan, s * self.unit, _clean({k: s * val for k, val in self.d.items()}),
                        _clean({k: s * val for k, val in self.tw.items()}))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "HElement") -> "HElement":
        return multiply(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HElement):
            return NotImplemented
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        return self.unit == 0 and not _clean(self.d) and not _clean(self.tw)

    def vector(self) -> list:
        return [self.unit] + [self.d.get(k, 0) for k in self.fan.interior_rays] + \
            [self.tw.get(s.m, 0) for s in twisted_sectors(self.fan)]


@dataclass(frozen=True)
class HcElement:
    """f * F + sum fk[i] F_i + sum tw[m] F_{0,(m,1)}."""

    fan: Fan
    f: object = 0
    fk: dict = field(default_factory=dict)
    tw: dict = field(default_factory=dict)

    @classmethod
    def basis(cls, fan: Fan, label) -> "HcElement":
        kind, idx = label
        if kind == "F":
            return cls(fan, 1)
        if kind == "Fk":
            return cls(fan, 0, {idx: 1})
        return cls(fan, 0, {}, {idx: 1})

    def __add__(self, other: "HcElement") -> "HcElement":
        fk = dict(self.fk)
        for k, val in other.fk.items():
            fk[k] = fk.get(k, 0) + val
        tw = dict(self.tw)
        for k, val in other.tw.items():
            tw[k] = tw.get(k, 0) + val
        return HcElement(self.fan, self.f + other.f, _clean(fk), _clean(tw))

    def scale(self, s) -> "HcElement":
        return HcElement(self.fan, s * self.f, _clean({k: s * val for k, val in self.fk.items()}),
                         _clean({k: s * val for k, val in self.tw.items()}))

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HcElement):
            return NotImplemented
        diff = self - other
        return diff.f == 0 and not diff.fk and not diff.tw

    def vector(self) -> list:
        return [self.f] + [self.fk.get(k, 0) for k in self.fan.interior_rays] + \
            [self.tw.get(s.m, 0) for s in twisted_sectors(self.fan)]


def h_basis(fan: Fan) -> list[tuple]:
    return [("1", None)] + [("D", k) for k in fan.interior_rays] + \
        [("1g", s.m) for s in twisted_sectors(fan)]


def hc_basis(fan: Fan) -> list[tuple]:
    return [("F", None)] + [("Fk", k) for k in fan.interior_rays] + \
        [("Fg", s.m) for s in twisted_sectors(fan)]


def basis_names(fan: Fan) -> tuple[list[str], list[str]]:
    h = ["1"] + [f"D{k}" for k in fan.interior_rays] + [f"1_({s.m},1)" for s in twisted_sectors(fan)]
    hc = ["F"] + [f"F{k}" for k in fan.interior_rays] + [f"F_0,({s.m},1)" for s in twisted_sectors(fan)]
    return h, hc


# -- ring structure -------------------------------------------------------------


def reduce_D(i: int, fan: Fan) -> HElement:
    """D_i in the basis of interior divisors.

    Uses sum_{rays} D_k = 0 and sum_{rays} k D_k = 0; D_i = 0 off the fan.
    """
    n = fan.n
    if not fan.is_ray(i):
        return HElement(fan)
    if i == n:
        return HElement(fan, 0, _clean({k: Fraction(-k, n) for k in fan.interior_rays}))
    if i == 0:
        return HElement(fan, 0, _clean({k: Fraction(k - n, n) for k in fan.interior_rays}))
    return HElement(fan, 0, {i: Fraction(1)})


def multiply(a: HElement, b: HElement) -> HElement:
    """Sector-wise product; all degree-two divisor monomials vanish."""
    d = {}
    for k in set(a.d) | set(b.d):
        d[k] = a.unit * b.d.get(k, 0) + b.unit * a.d.get(k, 0)
    tw = {m: a.tw[m] * b.tw[m] for m in set(a.tw) & set(b.tw)}
    return HElement(a.fan, a.unit * b.unit, _clean(d), _clean(tw))


def m_entry(fan: Fan, i: int, j: int) -> Fraction:
    """Coefficient of F in D_i F_j for interior rays i, j."""
    if i == j:
        left, right = fan.neighbours(j)
        return -Fraction(1, j - left) - Fraction(1, right - j)
    if fan.is_cone(i, j):
        return Fraction(1, abs(j - i))
    return Fraction(0)


def d_times_f(i: int, j: int, fan: Fan) -> Fraction:
    """Coefficient of F in D_i F_j straight from the module relations.

    Valid for any index i (boundary rays included); j interior.
    """
    if not fan.is_ray(i):
        return Fraction(0)
    return m_entry(fan, i, j)


def module_action(a: HElement, beta: HcElement) -> HcElement:
    f = a.unit * beta.f
    for i, si in a.d.items():
        for j, tj in beta.fk.items():
            f += si * tj * m_entry(a.fan, i, j)
    fk = {j: a.unit * tj for j, tj in beta.fk.items()}
    tw = {m: a.tw[m] * beta.tw[m] for m in set(a.tw) & set(beta.tw)}
    return HcElement(a.fan, f, _clean(fk), _clean(tw))


def star(a: HElement) -> HElement:
    """Duality involution: D_i -> -D_i, 1_gamma -> 1_gamma*."""
    tw = {}
    for s in twisted_sectors(a.fan):
        if s.m in a.tw:
            tw[dual_sector(s).m] = a.tw[s.m]
    return HElement(a.fan, a.unit, {k: -val for k, val in a.d.items()}, tw)


# -- Todd classes and chi_H -------------------------------------------------------


@lru_cache(maxsize=None)
def _four_sin_sq(g: Fraction):
    """4 sin^2(pi g) as an exact sympy number."""
    g = min(g, 1 - g)
    return sympy.radsimp(4 * sympy.sin(sympy.pi * sympy.Rational(g.numerator, g.denominator)) ** 2)


def todd(sector: TwistedSector):
    """Td(gamma): 1 untwisted, 1/(4 sin^2(pi gamma_i)) twisted, exact."""
    if not sector.twisted:
        return sympy.Integer(1)
    return sympy.radsimp(1 / _four_sin_sq(sector.gamma_i))


def todd_product_formula(sector: TwistedSector) -> complex:
    """Td(gamma) from prod_{i in sigma} 1/(1 - exp(-2 pi i gamma_i)), numerically."""
    if not sector.twisted:
        return 1.0
    out = 1.0
    for g in sector.coordinates().values():
        out /= 1 - cmath.exp(-2j * math.pi * float(g))
    return out


def integrate(sector: TwistedSector, beta: HcElement):
    """Top-degree coefficient: int F = 1, int F_k = 0, int_gamma F_{0,gamma} = 1."""
    if not sector.twisted:
        return beta.f
    return beta.tw.get(sector.m, 0)


def chi_pair(alpha: HElement, beta: HcElement):
    fan = alpha.fan
    prod = module_action(star(alpha), beta)
    total = integrate(TwistedSector.untwisted(), prod)
    for s in twisted_sectors(fan):
        val = integrate(s, prod)
        if val != 0:
            total = total + todd(s) * val / box_count(s.i, s.j)
    return total


def chi_matrix(fan: Fan) -> sympy.Matrix:
    hb, hcb = h_basis(fan), hc_basis(fan)
    rows = [[sympy.nsimplify(chi_pair(HElement.basis(fan, a), HcElement.basis(fan, b)))
             for b in hcb] for a in hb]
    return sympy.Matrix(rows)


def m_matrix(fan: Fan) -> list[list[Fraction]]:
    inner = fan.interior_rays
    return [[m_entry(fan, i, j) for j in inner] for i in inner]


def g_matrix(fan: Fan) -> list[list[Fraction]]:
    n = fan.n
    inner = fan.interior_rays
    out = []
    for k in inner:
        row = []
        for l in inner:
            lo, hi = min(k, l), max(k, l)
            row.append(-Fraction(lo, n) * (n - hi))
        out.append(row)
    return out


def matmul(a: list[list], b: list[list]) -> list[list]:
    if not a:
        return []
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
            for i in range(len(a))]


def is_identity(mat: list[list]) -> bool:
    return all(mat[i][j] == (1 if i == j else 0) for i in range(len(mat)) for j in range(len(mat)))


def block_chi_matrix(fan: Fan) -> sympy.Matrix:
    """Assembled form: [[1, 0], [0, -M]] plus twisted entries at (gamma, gamma*)."""
    size = fan.n
    out = sympy.zeros(size, size)
    out[0, 0] = 1
    r = fan.r
    mm = m_matrix(fan)
    for a in range(r):
        for b in range(r):
            out[1 + a, 1 + b] = -sympy.Rational(mm[a][b].numerator, mm[a][b].denominator)
    tws = twisted_sectors(fan)
    pos = {s.m: 1 + r + t for t, s in enumerate(tws)}
    for s in tws:
        out[pos[s.m], pos[dual_sector(s).m]] = sympy.radsimp(
            1 / (box_count(s.i, s.j) * _four_sin_sq(s.gamma_i)))
    return out


def chi_inverse(fan: Fan) -> sympy.Matrix:
    """chi_H^{-1} in H (x) H^c as a matrix indexed by (H basis, H^c basis)."""
    size = fan.n
    out = sympy.zeros(size, size)
    out[0, 0] = 1
    r = fan.r
    gg = g_matrix(fan)
    for a in range(r):
        for b in range(r):
            out[1 + a, 1 + b] = -sympy.Rational(gg[a][b].numerator, gg[a][b].denominator)
    tws = twisted_sectors(fan)
    pos = {s.m: 1 + r + t for t, s in enumerate(tws)}
    for s in tws:
        out[pos[s.m], pos[dual_sector(s).m]] = box_count(s.i, s.j) * _four_sin_sq(s.gamma_i)
    return out


def exact_equal(a: sympy.Matrix, b: sympy.Matrix) -> bool:
    if a.shape != b.shape:
        return False
    return all(sympy.simplify(x - y) == 0 for x, y in zip(a, b))


def inverse_check(fan: Fan) -> bool:
    """chi_matrix . chi_inverse^T == I exactly."""
    prod = chi_matrix(fan) * chi_inverse(fan).T
    return exact_equal(prod, sympy.eye(fan.n))


# -- Chern character on Laurent monomials -------------------------------------------


def ch_monomial(l: Iterable[int], sector: TwistedSector, fan: Fan, exact: bool = True):
    """ch_gamma(prod R_i^{l_i}).

    Untwisted: 1 + sum l_i D_i (exact, HElement).  Twisted: the phase
    exp(2 pi i sum_{i in sigma(gamma)} gamma_i l_i), as a sympy number when
    ``exact`` and a Python complex otherwise.
    """
    l = list(l)
    if not sector.twisted:
        out = HElement(fan, Fraction(1))
        for i, li in enumerate(l):
            if li:
                out = out + reduce_D(i, fan).scale(Fraction(li))
        return out
    q = sum((g * l[i] for i, g in sector.coordinates().items()), Fraction(0))
    if exact:
        return sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(q.numerator, q.denominator))
    return cmath.exp(2j * math.pi * float(q))


def k0_relations(fan: Fan) -> list[tuple[str, dict]]:
    """Presentation relations of K_0 as Laurent polynomials {exponent: coeff}."""
    n = fan.n
    zero = (0,) * (n + 1)

    def unit(*idx, power=None):
        e = [0] * (n + 1)
        for t, k in enumerate(idx):
            e[k] += 1 if power is None else power[t]
        return tuple(e)

    rels = []
    rels.append(("prod R_i - 1", {unit(*fan.rays): 1, zero: -1}))
    rels.append(("prod R_i^i - 1", {unit(*fan.rays, power=list(fan.rays)): 1, zero: -1}))
    for k in range(n + 1):
        if not fan.is_ray(k):
            rels.append((f"R_{k} - 1", {unit(k): 1, zero: -1}))
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            if not fan.is_cone(i, j):
                poly: dict = {}
                for e, cval in ((unit(i, j), 1), (unit(i), -1), (unit(j), -1), (zero, 1)):
                    poly[e] = poly.get(e, 0) + cval
                rels.append((f"(R_{i}-1)(R_{j}-1)", poly))
    return rels


def ch_relation(poly: dict, sector: TwistedSector, fan: Fan, exact: bool = True):
    """ch_gamma of a Laurent polynomial; HElement untwisted, scalar twisted."""
    if not sector.twisted:
        total = HElement(fan)
        for e, cval in poly.items():
            total = total + ch_monomial(e, sector, fan).scale(Fraction(cval))
        return total
    total = 0
    for e, cval in poly.items():
        total = total + cval * ch_monomial(e, sector, fan, exact)
    return sympy.simplify(total) if exact else total
