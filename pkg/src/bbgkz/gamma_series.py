"""Cohomology-valued Gamma series solutions and their duality with chi_H.

Every series term is a product over k = 0..n of

    x_k^{l_k + D_k/2pi i} / Gamma(1 + l_k + D_k/2pi i)

expanded to first order in the nilpotent divisor classes.  Exponent vectors
are enumerated by fixing a pivot pair of rays (p, q) whose coordinates are
solved from the two linear constraints sum l_k v_k = -c, while the remaining
coordinates run over non-negative integers.  The truncation level is the sum
of these free coordinates.

At the basepoint |x_m| = eps^{h(m)} with h convex on the fan, a free unit at
index m costs at least eps relative to the pivot cone, so level-L terms decay
geometrically.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy import special

from .lattice_fan import Fan, LatticePoint, TwistedSector, is_interior, twisted_sectors
from .pairing import pair, pairing_terms
from .poly_roots import DegenerateParameterError, as_parameter, find_roots
from .stack_cohomology import chi_inverse, m_entry, reduce_D

TWO_PI_I = 2j * math.pi


class ReciprocalGamma:
    """phi(z) = 1/Gamma(z) and its first two derivatives at real z.

    Rational arguments are memoized: series terms revisit the same few values.
    """

    @staticmethod
    def _pole_order(z) -> int | None:
        """m if z = -m for an integer m >= 0, else None."""
        if isinstance(z, (int, Fraction)):
            if Fraction(z).denominator == 1 and z <= 0:
                return int(-z)
            return None
        if float(z) <= 0 and float(z) == round(float(z)):
            return int(-round(float(z)))
        return None

    @classmethod
    def value(cls, z) -> float:
        if isinstance(z, (int, Fraction)):
            return _exact_phi(z)[0]
        return cls._value(z)

    @classmethod
    def d1(cls, z) -> float:
        if isinstance(z, (int, Fraction)):
            return _exact_phi(z)[1]
        return cls._d1(z)

    @classmethod
    def d2(cls, z) -> float:
        if isinstance(z, (int, Fraction)):
            return _exact_phi(z)[2]
        return cls._d2(z)

    @classmethod
    def _value(cls, z) -> float:
        if cls._pole_order(z) is not None:
            return 0.0
        if isinstance(z, (int, Fraction)) and Fraction(z).denominator == 1:
            return 1.0 / math.factorial(int(z) - 1)
        return float(special.rgamma(float(z)))

    @classmethod
    def _d1(cls, z) -> float:
        m = cls._pole_order(z)
        if m is not None:
            return float((-1) ** m * math.factorial(m))
        return -float(special.digamma(float(z))) * cls._value(z)

    @classmethod
    def _d2(cls, z) -> float:
        m = cls._pole_order(z)
        if m is not None:
            return -2.0 * (-1) ** m * math.factorial(m) * float(special.digamma(m + 1))
        zf = float(z)
        psi = float(special.digamma(zf))
        return cls._value(z) * (psi * psi - float(special.polygamma(1, zf)))


@lru_cache(maxsize=None)
def _exact_phi(z: int | Fraction) -> tuple[float, float, float]:
    return ReciprocalGamma._value(z), ReciprocalGamma._d1(z), ReciprocalGamma._d2(z)


phi = ReciprocalGamma


@dataclass(frozen=True)
class ExponentVector:
    l: tuple[int | Fraction, ...]
    level: int
    sector: TwistedSector = field(default_factory=TwistedSector.untwisted)

    def negative_set(self) -> tuple[int, ...]:
        return tuple(k for k, lk in enumerate(self.l) if lk < 0)

    def constraint(self) -> LatticePoint:
        """sum_k l_k (k, 1); equals -c for a member of L_{c,gamma}."""
        a = sum((k * lk for k, lk in enumerate(self.l)), Fraction(0))
        b = sum(self.l, Fraction(0))
        return LatticePoint(a, b)


@dataclass(frozen=True)
class Truncation:
    level: int = 16
    tail_threshold: float = 1e-5
    eps: float = 0.1
    seed: int = 7

    def __post_init__(self):
        if self.level < 2:
            raise ValueError("truncation level must be at least 2")
        if not 0 < self.eps <= 0.1:
            raise ValueError("basepoint eps must lie in (0, 0.1]")


@lru_cache(maxsize=4096)
def _compositions(k: int, total: int) -> tuple[tuple[int, ...], ...]:
    """All k-tuples of non-negative integers with the given sum, lexicographic."""
    if k == 0:
        return ((),) if total == 0 else ()
    return tuple((head, *rest) for head in range(total, -1, -1)
                 for rest in _compositions(k - 1, total - head))


def pivot_solutions(c, n: int, p: int, q: int, level: int,
                    coset: dict[int, Fraction] | None = None) -> Iterator[ExponentVector]:
    """Vectors with free coordinates (indices other than p, q) summing to ``level``.

    The pivot coordinates are solved exactly; those outside the coset
    (l_k - gamma_k integral) are dropped.  Untwisted vectors hold ints,
    twisted ones Fractions.
    """
    free = [k for k in range(n + 1) if k not in (p, q)]
    a, b = c
    for vals in _compositions(len(free), level):
        ra = -a - sum(k * t for k, t in zip(free, vals))
        rb = -b - sum(vals)
        if not coset:
            # untwisted: integer vectors only, kept as plain ints
            num, den = ra - p * rb, q - p
            if num % den:
                continue
            lq = num // den
            l = [0] * (n + 1)
        else:
            lq = Fraction(ra - p * rb, q - p)
            if (rb - lq - coset.get(p, 0)).denominator != 1 or (lq - coset.get(q, 0)).denominator != 1:
                continue
            l = [Fraction(0)] * (n + 1)
        for k, t in zip(free, vals):
            l[k] = t
        l[p], l[q] = rb - lq, lq
        yield ExponentVector(tuple(l), level)


def _ray_partner(fan: Fan, k: int) -> int:
    idx = fan.rays.index(k)
    return fan.rays[idx + 1] if idx + 1 < len(fan.rays) else fan.rays[idx - 1]


def enumerate_exponents(c, sector: TwistedSector, fan: Fan, level: int,
                        dual: bool = False) -> list[ExponentVector]:
    """Exponent vectors of L_{c,gamma} at one truncation level that can contribute.

    Vectors that vanish identically (two negative integer entries, a negative
    entry off the fan, or for ``dual`` a negative set that is not a cone of
    the fan) are omitted.  Levels are disjoint, so summing levels 0..L gives
    the truncation at L.
    """
    n = fan.n
    c = LatticePoint(*c)
    out: list[ExponentVector] = []
    if sector.twisted:
        i, j = sector.cone
        for ev in pivot_solutions(c, n, i, j, level, sector.coordinates()):
            out.append(ExponentVector(ev.l, level, sector))
        return out
    if not dual and c == (0, 0) and level == 0:
        out.append(ExponentVector((Fraction(0),) * (n + 1), 0))
    singles = fan.interior_rays if dual else fan.rays
    for k in singles:
        p = _ray_partner(fan, k)
        for ev in pivot_solutions(c, n, k, p, level):
            if ev.l[k] < 0 and ev.l[p] >= 0:
                out.append(ev)
    if dual:
        for i, j in fan.adjacent_pairs():
            for ev in pivot_solutions(c, n, i, j, level):
                if ev.l[i] < 0 and ev.l[j] < 0:
                    out.append(ev)
    return out


def _monomial(l, logx: np.ndarray, coeff: float) -> complex:
    """coeff * prod x_k^{l_k} in log space (principal branch)."""
    if coeff == 0:
        return 0j
    expo = sum(float(lk) * logx[k] for k, lk in enumerate(l) if lk != 0)
    return complex(np.sign(coeff) * np.exp(expo + math.log(abs(coeff))))


def _nilpotent_factors(l, logx):
    """Per-index (phi, phi' + phi ln x) at 1 + l_k."""
    vals, lin = [], []
    for k, lk in enumerate(l):
        z = 1 + lk
        f = phi.value(z)
        vals.append(f)
        lin.append(phi.d1(z) + (f * logx[k] if f else 0.0))
    return vals, lin


def _reduce_vector(fan: Fan, k: int) -> np.ndarray:
    """reduce_D(k) as a vector over the interior rays."""
    red = reduce_D(k, fan)
    return np.array([complex(red.d.get(t, 0)) for t in fan.interior_rays])


class GammaEvaluator:
    """Evaluates Gamma and Gamma-circ components at a fixed parameter point."""

    def __init__(self, fan: Fan, x):
        self.fan = fan
        self.x = as_parameter(x)
        if len(self.x) != fan.n + 1:
            raise ValueError("parameter length must be n + 1")
        with np.errstate(divide="ignore"):
            self.logx = np.log(self.x.astype(complex))
        self.reduced = {k: _reduce_vector(fan, k) for k in range(fan.n + 1)}
        self.twisted = twisted_sectors(fan)
        self.r = fan.r
        inner = fan.interior_rays
        # D_t F_k -> m_entry(t, k) F, as a matrix over interior rays
        self.mmat = np.array([[complex(m_entry(fan, t, k)) for k in inner] for t in inner])

    # -- H-valued ----------------------------------------------------------------

    def gamma_term(self, ev: ExponentVector) -> np.ndarray:
        """One term of Gamma_c as a vector in the H basis."""
        out = np.zeros(self.fan.n, dtype=complex)
        l = ev.l
        if ev.sector.twisted:
            coeff = math.prod(phi.value(1 + lk) for lk in l)
            out[self._twisted_pos(ev.sector)] = _monomial(l, self.logx, coeff)
            return out
        vals, lin = _nilpotent_factors(l, self.logx)
        neg = ev.negative_set()
        if not neg:
            base = math.prod(vals)
            out[0] = _monomial(l, self.logx, base)
            for k in range(len(l)):
                rest = math.prod(vals[:k] + vals[k + 1:])
                coeff = _monomial(l, self.logx, 1.0) * lin[k] * rest / TWO_PI_I
                out[1:1 + self.r] += coeff * self.reduced[k]
            return out
        (k,) = neg
        rest = math.prod(vals[:k] + vals[k + 1:])
        coeff = _monomial(l, self.logx, phi.d1(1 + l[k]) * rest) / TWO_PI_I
        out[1:1 + self.r] += coeff * self.reduced[k]
        return out

    # -- H^c-valued --------------------------------------------------------------

    def gamma_circ_term(self, ev: ExponentVector) -> np.ndarray:
        """One term of Gamma-circ_d as a vector in the H^c basis."""
        out = np.zeros(self.fan.n, dtype=complex)
        l = ev.l
        if ev.sector.twisted:
            coeff = math.prod(phi.value(1 + lk) for lk in l)
            out[self._twisted_pos(ev.sector)] = _monomial(l, self.logx, coeff)
            return out
        neg = ev.negative_set()
        vals, lin = _nilpotent_factors(l, self.logx)
        mono = _monomial(l, self.logx, 1.0)
        if len(neg) == 2:
            i, j = neg
            rest = math.prod(v for t, v in enumerate(vals) if t not in neg)
            out[0] = mono * phi.d1(1 + l[i]) * phi.d1(1 + l[j]) * rest / TWO_PI_I ** 2 / (j - i)
            return out
        (k,) = neg
        z = 1 + l[k]
        d1, d2 = phi.d1(z), phi.d2(z)
        others = [t for t in range(len(l)) if t != k]
        rest = math.prod(vals[t] for t in others)
        kpos = self.fan.interior_rays.index(k)
        # scalar part times F_k
        out[1 + kpos] = mono * d1 * rest / TWO_PI_I
        # divisor part: sum_t coeff_t D_t, then D_t F_k = m_entry F
        dvec = np.zeros(self.r, dtype=complex)
        dvec += mono * (0.5 * d2 + d1 * self.logx[k]) * rest / TWO_PI_I ** 2 * self.reduced[k]
        for t in others:
            rest_t = math.prod(vals[s] for s in others if s != t)
            dvec += mono * d1 * lin[t] * rest_t / TWO_PI_I ** 2 * self.reduced[t]
        out[0] = dvec @ self.mmat[:, kpos]
        return out

    def _twisted_pos(self, sector: TwistedSector) -> int:
        return 1 + self.r + [s.m for s in self.twisted].index(sector.m)

    # -- tables ------------------------------------------------------------------

    def level_table(self, c, level: int, dual: bool) -> np.ndarray:
        """Contribution of one truncation level to Gamma_c (or Gamma-circ_c)."""
        total = np.zeros(self.fan.n, dtype=complex)
        term = self.gamma_circ_term if dual else self.gamma_term
        for sector in [TwistedSector.untwisted(), *self.twisted]:
            for ev in enumerate_exponents(c, sector, self.fan, level, dual):
                total += term(ev)
        return total

    def series(self, c, level: int, dual: bool = False) -> np.ndarray:
        """Per-level contributions, shape (level + 1, n)."""
        return np.array([self.level_table(c, lv, dual) for lv in range(level + 1)])


def gamma_untwisted(c, x, fan: Fan, level: int) -> np.ndarray:
    """Untwisted block (1, D_{i_1}, ..., D_{i_r}) of Gamma_c truncated at ``level``."""
    ev = GammaEvaluator(fan, x)
    total = sum(ev.level_table(c, lv, False) for lv in range(level + 1))
    return total[:1 + fan.r]


def gamma_twisted(c, sector: TwistedSector, x, fan: Fan, level: int) -> complex:
    ev = GammaEvaluator(fan, x)
    total = sum(ev.level_table(c, lv, False) for lv in range(level + 1))
    return complex(total[ev._twisted_pos(sector)])


def gamma_circ_untwisted(d, x, fan: Fan, level: int) -> np.ndarray:
    """Untwisted block (F, F_{i_1}, ..., F_{i_r}) of Gamma-circ_d."""
    if not is_interior(d, fan.n):
        raise ValueError(f"{tuple(d)} is not in the interior cone")
    ev = GammaEvaluator(fan, x)
    total = sum(ev.level_table(d, lv, True) for lv in range(level + 1))
    return total[:1 + fan.r]


def gamma_circ_twisted(d, sector: TwistedSector, x, fan: Fan, level: int) -> complex:
    if not is_interior(d, fan.n):
        raise ValueError(f"{tuple(d)} is not in the interior cone")
    ev = GammaEvaluator(fan, x)
    total = sum(ev.level_table(d, lv, True) for lv in range(level + 1))
    return complex(total[ev._twisted_pos(sector)])


# -- basepoint ---------------------------------------------------------------------


def height(fan: Fan) -> list[float]:
    """Convex heights: i^2 at rays, linear in between, plus 1 off the rays."""
    h = []
    for m in range(fan.n + 1):
        i, j = fan.enclosing_cone(m)
        if fan.is_ray(m):
            h.append(float(m * m))
        else:
            t = (m - i) / (j - i)
            h.append((1 - t) * i * i + t * j * j + 1.0)
    return h


def choose_basepoint(fan: Fan, eps: float = 0.05, seed: int = 7, max_tries: int = 20) -> np.ndarray:
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 0.1]")
    rng = np.random.default_rng(seed)
    mags = np.array([eps ** hm for hm in height(fan)])
    for _ in range(max_tries):
        x = mags * np.exp(2j * math.pi * rng.random(fan.n + 1))
        try:
            find_roots(x, tol=1e-300)
        except DegenerateParameterError:
            continue
        return x
    raise DegenerateParameterError("no nondegenerate basepoint found")


# -- pairing ------------------------------------------------------------------------


def _needed_points(n: int):
    terms = pairing_terms(n)
    cs = sorted({t.c for t in terms})
    ds = sorted({t.d for t in terms})
    return cs, ds


def pairing_by_level(fan: Fan, x, max_level: int, min_level: int = 4,
                     stop_tail: float | None = None) -> list[np.ndarray]:
    """<Gamma, Gamma-circ> truncated at levels 0, 1, ...

    Stops early once ``tail_certificate`` drops below ``stop_tail`` (after
    ``min_level``), otherwise runs to ``max_level``.
    """
    ev = GammaEvaluator(fan, x)
    cs, ds = _needed_points(fan.n)
    phi_tab = {c: np.zeros(fan.n, dtype=complex) for c in cs}
    psi_tab = {d: np.zeros(fan.n, dtype=complex) for d in ds}
    mats = []
    for level in range(max_level + 1):
        for c in cs:
            phi_tab[c] = phi_tab[c] + ev.level_table(c, level, False)
        for d in ds:
            psi_tab[d] = psi_tab[d] + ev.level_table(d, level, True)
        mats.append(pair(phi_tab, psi_tab, ev.x, product=np.multiply.outer))
        if stop_tail is not None and level >= min_level and tail_certificate(mats) <= stop_tail:
            break
    return mats


def tail_certificate(mats: list[np.ndarray]) -> float:
    """Largest change over the last two levels, relative to the largest entry.

    Two levels are used because some series only have terms at every other
    level.
    """
    if len(mats) < 3:
        return math.inf
    top = mats[-1]
    change = max(np.max(np.abs(top - mats[-2])), np.max(np.abs(top - mats[-3])))
    return float(change) / float(np.max(np.abs(top)))


def pair_gamma(fan: Fan, x, trunc: Truncation | None = None) -> np.ndarray:
    trunc = trunc or Truncation()
    return pairing_by_level(fan, x, trunc.level)[-1]


def expected_duality(fan: Fan) -> np.ndarray:
    """-(n / 4 pi^2) chi_H^{-1} as a complex matrix."""
    mat = np.array(chi_inverse(fan).evalf(30).tolist(), dtype=complex)
    return -fan.n / (4 * math.pi ** 2) * mat


@dataclass
class DualityReport:
    fan: Fan
    x: np.ndarray
    computed: np.ndarray
    expected: np.ndarray
    deviation: float
    tail: float
    level: int
    seconds: float
    tolerance: float = 1e-3
    tail_limit: float = 1e-5

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance and self.tail <= self.tail_limit

    def to_json(self) -> dict:
        def cm(mat):
            return [[[float(z.real), float(z.imag)] for z in row] for row in mat]

        return {
            "fan": self.fan.to_dict(),
            "basepoint": [[float(z.real), float(z.imag)] for z in self.x],
            "computed": cm(self.computed),
            "expected": cm(self.expected),
            "deviation": self.deviation,
            "tail": self.tail,
            "level": self.level,
            "pass": self.passed,
        }


def verify_duality(fan: Fan, trunc: Truncation | None = None, tolerance: float = 1e-3) -> DualityReport:
    """Compare <Gamma, Gamma-circ> at the basepoint with -(n/4 pi^2) chi_H^{-1}.

    The truncation level grows until the tail certificate is a hundredth of
    its threshold or the configured maximum level is reached.
    """
    trunc = trunc or Truncation()
    start = time.perf_counter()
    x = choose_basepoint(fan, trunc.eps, trunc.seed)
    mats = pairing_by_level(fan, x, trunc.level, stop_tail=1e-2 * trunc.tail_threshold)
    top = mats[-1]
    expected = expected_duality(fan)
    deviation = float(np.max(np.abs(top - expected))) / float(np.max(np.abs(expected)))
    return DualityReport(fan, x, top, expected, deviation, tail_certificate(mats), len(mats) - 1,
                         time.perf_counter() - start, tolerance, trunc.tail_threshold)
