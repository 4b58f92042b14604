"""Contour-integral solutions of bbGKZ(C, 0) and bbGKZ(C°, 0).

Solutions are tabulated on all lattice points up to a degree bound.  Residue
solutions use trapezoidal quadrature on a small circle around a root of f
(spectrally accurate); the line solution integrates along the negative real
axis from 0 to infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .lattice_fan import LatticePoint, points_up_to
from .poly_roots import (
    DegenerateParameterError,
    RootSet,
    as_parameter,
    find_roots,
    poly_eval,
)

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class QuadratureConfig:
    radius_fraction: float = 0.25
    tol: float = 1e-12
    min_nodes: int = 32
    max_nodes: int = 1 << 14
    detour_fraction: float = 1 / 6
    line_epsabs: float = 1e-14
    line_epsrel: float = 1e-12
    axis_tol: float = 1e-14
    path_clearance: float = 1e-6

    def __post_init__(self):
        if not 0 < self.radius_fraction < 0.5:
            raise ValueError("radius_fraction must lie in (0, 1/2)")
        if self.tol <= 0 or self.detour_fraction <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass
class SolutionTable:
    label: str
    interior: bool
    n: int
    degree_bound: int
    values: dict[LatticePoint, complex]
    branches: dict[str, complex] = field(default_factory=dict)

    def __getitem__(self, c) -> complex:
        return self.values[LatticePoint(*c)]

    def __contains__(self, c) -> bool:
        return LatticePoint(*c) in self.values

    def points(self) -> list[LatticePoint]:
        return list(self.values)

    def combine(self, other: "SolutionTable", coeff: complex = 1.0, label: str | None = None) -> "SolutionTable":
        """self + coeff * other on the common domain."""
        vals = {c: self.values[c] + coeff * other.values[c] for c in self.values}
        return SolutionTable(label or self.label, self.interior, self.n, self.degree_bound, vals,
                             dict(self.branches))

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "system": "C_interior" if self.interior else "C",
            "degree_bound": self.degree_bound,
            "values": [[c.a, c.b, v.real, v.imag] for c, v in self.values.items()],
            "branches": {k: [v.real, v.imag] for k, v in self.branches.items()},
        }


def _integrand_factor(l: int) -> float:
    return (-1) ** l * math.factorial(l - 1)


def _csum(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def phi_trivial(n: int, degree_bound: int = 3) -> SolutionTable:
    vals = {c: 0j for c in points_up_to(n, degree_bound)}
    vals[LatticePoint(0, 0)] = 1 + 0j
    return SolutionTable("phi0", False, n, degree_bound, vals)


def _circle_radius(xi: complex, roots, cfg: QuadratureConfig) -> float:
    # the nearest root is xi itself (possibly perturbed by continuation)
    dists = sorted(abs(other - xi) for other in roots)
    dist = min([abs(xi)] + dists[1:2])
    return cfg.radius_fraction * dist


def circle_residues(x: np.ndarray, xi: complex, radius: float,
                    points: list[LatticePoint], cfg: QuadratureConfig = DEFAULT_QUADRATURE
                    ) -> dict[LatticePoint, complex]:
    """(1/2 pi i) * circle integral of (-1)^l (l-1)! w^(k-1) / f(w)^l dw around xi.

    Nodes are doubled until two successive trapezoid sums agree.
    """
    prev = None
    nodes = cfg.min_nodes
    while nodes <= cfg.max_nodes:
        theta = 2 * math.pi * np.arange(nodes) / nodes
        e = np.exp(1j * theta)
        w = xi + radius * e
        fw = poly_eval(x, w)
        jac = radius * e / nodes
        cur = {}
        for c in points:
            k, l = c
            g = _integrand_factor(l) * w ** (k - 1) / fw ** l
            cur[c] = _csum(g * jac)
        if prev is not None:
            diff = max(abs(cur[c] - prev[c]) for c in points)
            scale = max(1.0, max(abs(cur[c]) for c in points))
            if diff <= cfg.tol * scale:
                return cur
        prev = cur
        nodes *= 2
    raise DegenerateParameterError(f"circle quadrature around {xi} did not converge")


def _logs(x: np.ndarray, xi: complex, branches: dict | None) -> dict[str, complex]:
    out = {
        "log_xi": cmath.log(xi),
        "log_x0": cmath.log(x[0]),
        "log_xn": cmath.log(x[-1]),
    }
    if branches:
        out.update(branches)
    return out


def phi_at_root(x, xi: complex, degree_bound: int = 3, roots: RootSet | None = None,
                cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                branches: dict[str, complex] | None = None, label: str = "phi_root") -> SolutionTable:
    """Residue solution of bbGKZ(C, 0) for a small loop around the root xi.

    ``branches`` may override the principal logarithms (keys log_xi, log_x0,
    log_xn); this is how analytic continuation is expressed.
    """
    x = as_parameter(x)
    n = len(x) - 1
    if roots is None:
        roots = find_roots(x)
    radius = _circle_radius(xi, roots, cfg)
    pts = [c for c in points_up_to(n, degree_bound) if c.b >= 1]
    vals = circle_residues(x, xi, radius, pts, cfg)
    for c in pts:
        k, l = c
        if k == 0:
            vals[c] += _integrand_factor(l) / (n * x[0] ** l)
        elif k == n * l:
            vals[c] -= _integrand_factor(l) / (n * x[-1] ** l)
    logs = _logs(x, xi, branches)
    vals[LatticePoint(0, 0)] = logs["log_xi"] + (logs["log_xn"] - logs["log_x0"]) / n
    ordered = {c: vals[c] for c in points_up_to(n, degree_bound)}
    return SolutionTable(label, False, n, degree_bound, ordered, logs)


def psi_at_root(x, xi: complex, degree_bound: int = 3, roots: RootSet | None = None,
                cfg: QuadratureConfig = DEFAULT_QUADRATURE, label: str = "psi_root") -> SolutionTable:
    x = as_parameter(x)
    n = len(x) - 1
    if roots is None:
        roots = find_roots(x)
    radius = _circle_radius(xi, roots, cfg)
    pts = points_up_to(n, degree_bound, interior=True)
    vals = circle_residues(x, xi, radius, pts, cfg)
    return SolutionTable(label, True, n, degree_bound, {c: vals[c] for c in pts})


def closed_form_degree_one(x, xi: complex) -> dict[LatticePoint, complex]:
    """Residue solution on degree-one points, written out explicitly."""
    x = as_parameter(x)
    n = len(x) - 1
    dfx = complex(poly_eval(np.arange(1, n + 1) * x[1:], xi))
    out = {}
    for k in range(n + 1):
        out[LatticePoint(k, 1)] = -xi ** k / (dfx * xi)
    out[LatticePoint(0, 1)] -= 1 / (n * x[0])
    out[LatticePoint(n, 1)] += 1 / (n * x[-1])
    return out


# -- the line solution ------------------------------------------------------


def root_above_axis(xi: complex, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> bool:
    """Side of the negative real axis a root is treated as lying on.

    Roots numerically on the axis count as below, i.e. the path detours upward.
    """
    return xi.imag > cfg.axis_tol * max(1.0, abs(xi))


@dataclass(frozen=True)
class _Piece:
    kind: str  # "segment", "arc" or "tail"
    a: float
    b: float
    center: float = 0.0
    radius: float = 0.0
    upward: bool = True


def line_path(roots: RootSet, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> list[_Piece]:
    """Pieces of the deformed path from 0 to -infinity (parametrised by t = -Re w)."""
    detours = []
    for xi in roots:
        if xi.real >= 0:
            continue
        dist = abs(xi)
        for other in roots:
            if other != xi:
                dist = min(dist, abs(other - xi))
        delta = cfg.detour_fraction * dist
        if abs(xi.imag) < delta:
            upward = not root_above_axis(xi, cfg)
            detours.append((-xi.real, 2 * delta, upward))
    detours.sort()
    big = 2.0 * max(abs(z) for z in roots) + 1.0
    pieces = []
    t = 0.0
    for centre, rad, upward in detours:
        pieces.append(_Piece("segment", t, centre - rad))
        pieces.append(_Piece("arc", 0.0, math.pi, centre, rad, upward))
        t = centre + rad
    pieces.append(_Piece("segment", t, big))
    pieces.append(_Piece("tail", 0.0, 1.0, big))
    return pieces


def _piece_points(piece: _Piece, s):
    """w(s) and dw/ds for a path piece."""
    if piece.kind == "segment":
        return -s, -1.0
    if piece.kind == "tail":
        u = 1.0 - s
        return -(piece.center + s / u), -1.0 / u ** 2
    # arc from -(centre - radius) to -(centre + radius), above or below the axis
    sign = 1.0 if piece.upward else -1.0
    phase = cmath.exp(1j * sign * s)
    w = -piece.center + piece.radius * phase
    return w, 1j * sign * piece.radius * phase


def _path_clearance(pieces, roots) -> float:
    best = math.inf
    for piece in pieces:
        if piece.kind == "arc":
            for xi in roots:
                best = min(best, abs(abs(xi + piece.center) - piece.radius))
        elif piece.kind == "segment":
            for xi in roots:
                t = min(max(-xi.real, piece.a), piece.b)
                best = min(best, abs(xi + t))
        else:
            for xi in roots:
                if -xi.real >= piece.center:
                    best = min(best, abs(xi.imag))
    return best


def psi_line(x, degree_bound: int = 3, roots: RootSet | None = None,
             cfg: QuadratureConfig = DEFAULT_QUADRATURE, label: str = "psi_line") -> SolutionTable:
    """Solution of bbGKZ(C°, 0) integrated over the negative real axis from 0 to infinity."""
    x = as_parameter(x)
    n = len(x) - 1
    if roots is None:
        roots = find_roots(x)
    pts = points_up_to(n, degree_bound, interior=True)
    pieces = line_path(roots, cfg)
    clearance = _path_clearance(pieces, roots)
    if clearance < cfg.path_clearance * max(1.0, max(abs(z) for z in roots)):
        raise DegenerateParameterError(f"root within {clearance:.2e} of the integration path")

    ks = np.array([c.a for c in pts])
    ls = np.array([c.b for c in pts])
    factors = np.array([_integrand_factor(int(l)) for l in ls], dtype=float)

    def integrand(piece):
        def fn(s):
            w, dw = _piece_points(piece, s)
            if piece.kind == "tail":
                # w^(k-1) / f^l rewritten so that large |w| cannot overflow
                ratio = complex(poly_eval(x[::-1], 1 / w))
                return factors * w ** (ks - 1 - n * ls) / ratio ** ls * dw
            fw = complex(poly_eval(x, w))
            return factors * w ** (ks - 1) / fw ** ls * dw

        return fn

    total = np.zeros(len(pts), dtype=complex)
    for piece in pieces:
        if piece.kind == "segment" and piece.b <= piece.a:
            continue
        val, _err = integrate.quad_vec(integrand(piece), piece.a, piece.b,
                                       epsabs=cfg.line_epsabs, epsrel=cfg.line_epsrel, limit=400)
        total += val
    total /= TWO_PI_I
    return SolutionTable(label, True, n, degree_bound, dict(zip(pts, total)))


# -- identities ----------------------------------------------------------------


def euler_check(table: SolutionTable, x) -> float:
    """Max residual of the two homogeneity equations, with derivatives replaced by shifts."""
    x = as_parameter(x)
    n = table.n
    worst = 0.0
    for c in table.points():
        if c.b >= table.degree_bound:
            continue
        a, b = c
        s0 = b * table[c]
        s1 = a * table[c]
        for j in range(n + 1):
            t = table[(a + j, b + 1)]
            s0 += x[j] * t
            s1 += j * x[j] * t
        worst = max(worst, abs(s0), abs(s1))
    return worst


def derivative_check(factory: Callable[[np.ndarray], SolutionTable], x, c, j: int,
                     h: float = 1e-4) -> float:
    """Relative error between a Richardson-extrapolated central difference of the
    c-entry in x_j and the shifted entry c + v_j."""
    x = as_parameter(x)
    c = LatticePoint(*c)

    def central(step):
        e = np.zeros_like(x)
        e[j] = step
        return (factory(x + e)[c] - factory(x - e)[c]) / (2 * step)

    approx = (4 * central(h / 2) - central(h)) / 3
    exact = factory(x)[(c.a + j, c.b + 1)]
    denom = max(abs(exact), 1e-300)
    if exact == 0:
        return abs(approx)
    return abs(approx - exact) / denom


def nearest_root_factory(kind: str, x_ref, k: int, degree_bound: int = 3,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> Callable[[np.ndarray], SolutionTable]:
    """x -> residue solution for the root of f(x) nearest the k-th root at x_ref."""
    ref = find_roots(as_parameter(x_ref))[k]
    log_ref = cmath.log(ref)

    def factory(x):
        rs = find_roots(x)
        xi = min(rs, key=lambda z: abs(z - ref))
        if kind == "phi":
            # continue log(xi) from the reference point
            branches = {"log_xi": log_ref + cmath.log(xi / ref)}
            return phi_at_root(x, xi, degree_bound, rs, cfg, branches=branches)
        return psi_at_root(x, xi, degree_bound, rs, cfg)

    return factory


def residue_bases(x, degree_bound: int = 3, roots: RootSet | None = None,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """The spanning families {phi0, phi^gamma_k} and {psi_line, psi^gamma_k}."""
    x = as_parameter(x)
    n = len(x) - 1
    if roots is None:
        roots = find_roots(x)
    phis = [phi_trivial(n, degree_bound)]
    psis = [psi_line(x, degree_bound, roots, cfg)]
    for k, xi in enumerate(roots):
        phis.append(phi_at_root(x, xi, degree_bound, roots, cfg, label=f"phi_root{k + 1}"))
        psis.append(psi_at_root(x, xi, degree_bound, roots, cfg, label=f"psi_root{k + 1}"))
    return phis, psis


def sum_tables(tables: list[SolutionTable]) -> dict[LatticePoint, complex]:
    out: dict[LatticePoint, complex] = {}
    for t in tables:
        for c, val in t.values.items():
            out[c] = out.get(c, 0j) + val
    return out


def residue_sum_alpha(phis: list[SolutionTable]) -> tuple[complex, float]:
    """Sum of the root solutions Phi^{root_k}: returns (alpha, largest entry of degree >= 1).

    The sum is expected to be alpha * Phi^0; alpha is measured, not prescribed.
    """
    total = sum_tables(phis)
    alpha = total[LatticePoint(0, 0)]
    rest = max((abs(v) for c, v in total.items() if c.b >= 1), default=0.0)
    return alpha, rest
