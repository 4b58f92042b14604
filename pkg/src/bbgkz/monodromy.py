"""Analytic continuation of the residue solutions along paths in parameter space.

Roots are tracked with a linear predictor and a Newton corrector.  The
logarithms entering Phi_(0,0) are continued by summing small increments, and
the line solution picks up -Psi^{root} (resp. +Psi^{root}) whenever a tracked
root crosses the negative real axis from above to below (resp. below to above).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .contour_solutions import (DEFAULT_QUADRATURE, QuadratureConfig, SolutionTable, phi_at_root,
                                phi_trivial, psi_at_root, psi_line, root_above_axis)
from .pairing import constancy_spread, pairing_matrix
from .poly_roots import (DegenerateParameterError, as_parameter, find_roots, poly_derivative_coeffs,
                         poly_eval, random_parameter)


@dataclass(frozen=True)
class ParameterPath:
    """t in [0, 1] -> x(t)."""

    func: Callable[[float], np.ndarray]
    name: str = "path"

    def __call__(self, t: float) -> np.ndarray:
        return as_parameter(self.func(float(t)))

    def samples(self, count: int) -> list[np.ndarray]:
        return [self(t) for t in np.linspace(0.0, 1.0, count)]

    @property
    def closed(self) -> bool:
        return bool(np.allclose(self(0.0), self(1.0), atol=1e-13))

    def then(self, other: "ParameterPath") -> "ParameterPath":
        first, second = self, other

        def func(t):
            return first(2 * t) if t <= 0.5 else second(2 * t - 1)

        return ParameterPath(func, f"{first.name}*{second.name}")

    @classmethod
    def constant(cls, x) -> "ParameterPath":
        x = as_parameter(x)
        return cls(lambda t: x, "constant")

    @classmethod
    def polygon(cls, vertices: Sequence) -> "ParameterPath":
        verts = [as_parameter(v) for v in vertices]
        segs = len(verts) - 1
        if segs < 1:
            raise ValueError("a polygon needs at least two vertices")

        def func(t):
            s = min(int(t * segs), segs - 1)
            u = t * segs - s
            return (1 - u) * verts[s] + u * verts[s + 1]

        return cls(func, "polygon")

    @classmethod
    def coordinate_circle(cls, base, index: int, center: complex = 0.0, turns: int = 1) -> "ParameterPath":
        """Loop moving x_index once (or ``turns`` times) around ``center``."""
        base = as_parameter(base)
        offset = base[index] - center

        def func(t):
            x = base.copy()
            x[index] = center + offset * cmath.exp(2j * math.pi * turns * t)
            return x

        return cls(func, f"circle(x{index})")


def root_swap_loop() -> ParameterPath:
    """x(theta) = (e^{i theta}, 0, 1): the two roots +-i e^{i theta/2} trade places."""
    return ParameterPath.coordinate_circle([1.0, 0.0, 1.0], 0, 0.0)


def small_loop(base, index: int, radius: float) -> ParameterPath:
    """Circle of the given radius around the current value of x_index."""
    base = as_parameter(base)
    start = base.copy()
    start[index] = base[index] + radius
    return ParameterPath.coordinate_circle(start, index, base[index])


def smooth_random_path(n: int, rng: np.random.Generator, gaps: Sequence[int] = ()) -> ParameterPath:
    """Straight segment between two random points plus a sine bump."""
    a = random_parameter(n, rng, gaps)
    b = random_parameter(n, rng, gaps)
    bump = 0.3 * (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1))
    for g in gaps:
        bump[g] = 0.0

    def func(t):
        return a + (b - a) * t + bump * math.sin(math.pi * t)

    return ParameterPath(func, "smooth")


@dataclass
class ContinuationState:
    """Continued data at one point of the path, in the initial root labelling."""

    t: float
    x: np.ndarray
    roots: np.ndarray
    log_xi: np.ndarray
    log_x0: complex
    log_xn: complex
    crossings: np.ndarray  # signed crossing count of each root through the negative axis


@dataclass
class Trajectory:
    path: ParameterPath
    states: list[ContinuationState]
    steps: int
    permutation: tuple[int, ...] = field(default=())

    @property
    def start(self) -> ContinuationState:
        return self.states[0]

    @property
    def end(self) -> ContinuationState:
        return self.states[-1]

    def branch_increments(self) -> dict:
        s, e = self.start, self.end
        return {
            "log_xi": [complex(v) for v in e.log_xi - s.log_xi],
            "log_x0": complex(e.log_x0 - s.log_x0),
            "log_xn": complex(e.log_xn - s.log_xn),
        }


def _newton(x: np.ndarray, dx: np.ndarray, xi: complex, iterations: int = 12) -> tuple[complex, bool]:
    for _ in range(iterations):
        d = complex(poly_eval(dx, xi))
        if d == 0:
            return xi, False
        step = complex(poly_eval(x, xi)) / d
        xi -= step
        if abs(step) <= 1e-14 * max(1.0, abs(xi)):
            return xi, True
    return xi, False


def _separation(roots: np.ndarray) -> float:
    if len(roots) < 2:
        return math.inf
    d = np.abs(roots[:, None] - roots[None, :])
    d[np.diag_indices(len(roots))] = np.inf
    return float(d.min())


def _crossing(old: complex, new: complex, cfg: QuadratureConfig) -> int:
    """+1 below -> above, -1 above -> below, across the negative real axis."""
    up_old, up_new = root_above_axis(old, cfg), root_above_axis(new, cfg)
    if up_old == up_new:
        return 0
    dy = new.imag - old.imag
    u = -old.imag / dy if dy != 0 else 0.5
    u = min(max(u, 0.0), 1.0)
    if old.real + u * (new.real - old.real) >= 0:
        return 0
    return 1 if up_new else -1


def _step(x_old, x_new, roots, dx_old_coeffs, cfg):
    """Predict-correct one step; None if the step must be refined."""
    dx_new = poly_derivative_coeffs(x_new)
    delta = x_new - x_old
    sep = _separation(roots)
    out = np.empty_like(roots)
    for k, xi in enumerate(roots):
        pred = xi - complex(poly_eval(delta, xi)) / complex(poly_eval(dx_old_coeffs, xi))
        corr, ok = _newton(x_new, dx_new, pred)
        if not ok or abs(corr - xi) > sep / 3 or abs(corr / xi - 1) > 0.5:
            return None
        out[k] = corr
    if _separation(out) < 0.5 * sep and _separation(out) < 1e-8 * max(1.0, np.max(np.abs(out))):
        return None
    for old, new in ((x_old[0], x_new[0]), (x_old[-1], x_new[-1])):
        if abs(new / old - 1) > 0.5:
            return None
    return out


def track_roots(path: ParameterPath, checkpoints: Sequence[float] = (1.0,),
                max_step: float = 1 / 64, min_step: float = 1e-10,
                cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> Trajectory:
    """Follow the roots of f along ``path``, recording states at the checkpoints.

    Raises DegenerateParameterError when the step size underflows (the path
    runs into the discriminant).
    """
    x = path(0.0)
    rs = find_roots(x)
    roots = np.array(rs.roots, dtype=complex)
    log_xi = np.array([cmath.log(z) for z in roots])
    log_x0, log_xn = cmath.log(x[0]), cmath.log(x[-1])
    crossings = np.zeros(len(roots), dtype=int)
    t = 0.0
    h = max_step
    steps = 0
    states = [ContinuationState(0.0, x, roots.copy(), log_xi.copy(), log_x0, log_xn, crossings.copy())]
    targets = sorted(float(c) for c in checkpoints if c > 0)
    for target in targets:
        while t < target - 1e-15:
            h_try = min(h, target - t)
            x_new = path(t + h_try)
            new = _step(x, x_new, roots, poly_derivative_coeffs(x), cfg)
            if new is None:
                h = h_try / 2
                if h < min_step:
                    raise DegenerateParameterError(f"step size underflow at t = {t:.6g}")
                continue
            for k in range(len(roots)):
                log_xi[k] += cmath.log(new[k] / roots[k])
                crossings[k] += _crossing(roots[k], new[k], cfg)
            log_x0 += cmath.log(x_new[0] / x[0])
            log_xn += cmath.log(x_new[-1] / x[-1])
            x, roots, t = x_new, new, t + h_try
            steps += 1
            h = min(max_step, 2 * h_try)
        states.append(ContinuationState(target, x, roots.copy(), log_xi.copy(), log_x0, log_xn,
                                        crossings.copy()))
    traj = Trajectory(path, states, steps)
    traj.permutation = endpoint_permutation(traj)
    return traj


def endpoint_permutation(traj: Trajectory) -> tuple[int, ...]:
    """perm[k] = position among the freshly sorted end roots of the tracked root k."""
    fresh = np.array(find_roots(traj.end.x).roots)
    perm = []
    for xi in traj.end.roots:
        perm.append(int(np.argmin(np.abs(fresh - xi))))
    if sorted(perm) != list(range(len(perm))):
        raise DegenerateParameterError("tracked roots do not match the endpoint roots")
    return tuple(perm)


def compose(first: Sequence[int], second: Sequence[int]) -> tuple[int, ...]:
    """Permutation of the concatenated loop ``first`` then ``second``."""
    return tuple(second[k] for k in first)


@dataclass
class ContinuedBasis:
    phis: list[SolutionTable]
    psis: list[SolutionTable]
    state: ContinuationState


def solutions_at(state: ContinuationState, degree_bound: int = 3,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> ContinuedBasis:
    """Continued {Phi^0, Phi^{root_k}} and {Psi^{lambda0}, Psi^{root_k}} at a state."""
    x = state.x
    n = len(x) - 1
    rs = find_roots(x)
    phis = [phi_trivial(n, degree_bound)]
    root_psis = []
    for k, xi in enumerate(state.roots):
        branches = {"log_xi": state.log_xi[k], "log_x0": state.log_x0, "log_xn": state.log_xn}
        phis.append(phi_at_root(x, complex(xi), degree_bound, rs, cfg, branches=branches,
                                label=f"phi_root{k + 1}"))
        root_psis.append(psi_at_root(x, complex(xi), degree_bound, rs, cfg, label=f"psi_root{k + 1}"))
    line = psi_line(x, degree_bound, rs, cfg)
    for k, s in enumerate(state.crossings):
        if s:
            line = line.combine(root_psis[k], float(s), label="psi_line")
    return ContinuedBasis(phis, [line, *root_psis], state)


def continue_solutions(path: ParameterPath, degree_bound: int = 3,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> tuple[ContinuedBasis, Trajectory]:
    traj = track_roots(path, cfg=cfg)
    return solutions_at(traj.end, degree_bound, cfg), traj


def table_deviation(a: SolutionTable, b: SolutionTable) -> float:
    return max(abs(a[c] - b[c]) for c in a.points())


@dataclass
class InvarianceReport:
    permutation: tuple[int, ...]
    deviation: float
    permuted_deviation: float
    table_deviation: float
    branch_increments: dict
    start_matrix: np.ndarray
    end_matrix: np.ndarray

    def passed(self, tol: float = 1e-6) -> bool:
        return self.deviation <= tol and self.permuted_deviation <= tol

    def to_json(self) -> dict:
        inc = self.branch_increments
        return {
            "permutation": list(self.permutation),
            "pairing_deviation": self.deviation,
            "permuted_pairing_deviation": self.permuted_deviation,
            "root_table_deviation": self.table_deviation,
            "branch_increments": {
                "log_xi": [[z.real, z.imag] for z in inc["log_xi"]],
                "log_x0": [inc["log_x0"].real, inc["log_x0"].imag],
                "log_xn": [inc["log_xn"].real, inc["log_xn"].imag],
            },
        }


def verify_pairing_invariance(path: ParameterPath, degree_bound: int = 3,
                              cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> InvarianceReport:
    """Compare the pairing matrix of the start basis with that of the continued basis.

    For a closed loop it also checks that the continued root solutions on
    positive-degree points are the fresh ones permuted, and that the start
    matrix is invariant under conjugation by the permutation.
    """
    traj = track_roots(path, cfg=cfg)
    start = solutions_at(traj.start, degree_bound, cfg)
    end = solutions_at(traj.end, degree_bound, cfg)
    p0 = pairing_matrix(start.phis, start.psis, traj.start.x).matrix
    p1 = pairing_matrix(end.phis, end.psis, traj.end.x).matrix
    perm = traj.permutation
    idx = [0] + [1 + p for p in perm]
    permuted = p0[np.ix_(idx, idx)]
    tab_dev = 0.0
    if path.closed:
        for k, p in enumerate(perm):
            for fam in ("phis", "psis"):
                a = getattr(end, fam)[1 + k]
                b = getattr(start, fam)[1 + p]
                tab_dev = max(tab_dev, max(abs(a[c] - b[c]) for c in a.points() if c.b >= 1))
    return InvarianceReport(perm, float(np.max(np.abs(p1 - p0))), float(np.max(np.abs(permuted - p0))),
                            tab_dev, traj.branch_increments(), p0, p1)


def path_constancy(path: ParameterPath, samples: int = 8, degree_bound: int = 3,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> tuple[float, list[np.ndarray]]:
    """Spread of the continued pairing matrix over equally spaced samples."""
    checkpoints = list(np.linspace(0.0, 1.0, samples))[1:]
    traj = track_roots(path, checkpoints, cfg=cfg)
    mats = []
    for state in traj.states:
        basis = solutions_at(state, degree_bound, cfg)
        mats.append(pairing_matrix(basis.phis, basis.psis, state.x).matrix)
    return constancy_spread(mats), mats
