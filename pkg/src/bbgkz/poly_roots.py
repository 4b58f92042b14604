"""The polynomial f(z) = x_0 + x_1 z + ... + x_n z^n and its roots."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

EPS = np.finfo(float).eps


class DegenerateParameterError(ValueError):
    """Raised when x lies on (or numerically at) the discriminant."""


def as_parameter(x) -> np.ndarray:
    """Coerce x to a complex vector; accepts numbers or [re, im] pairs."""
    if isinstance(x, np.ndarray) and x.dtype.kind == "c":
        return x.astype(complex)
    items = []
    for entry in x:
        if isinstance(entry, (list, tuple)):
            re, im = entry
            items.append(complex(re, im))
        else:
            items.append(complex(entry))
    return np.asarray(items, dtype=complex)


def parameter_to_json(x) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in as_parameter(x)]


def coefficient_scale(x: np.ndarray) -> float:
    return float(np.max(np.abs(x)))


def poly_eval(x: np.ndarray, z):
    """Horner evaluation of f at z (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for coeff in x[::-1]:
        acc = acc * z + coeff
    return acc


def poly_derivative_coeffs(x: np.ndarray, order: int = 1) -> np.ndarray:
    c = np.asarray(x, dtype=complex)
    for _ in range(order):
        c = c[1:] * np.arange(1, len(c))
    return c


def _polish(x: np.ndarray, xi: complex, iterations: int = 8) -> complex:
    dx = poly_derivative_coeffs(x)
    for _ in range(iterations):
        fval = complex(poly_eval(x, xi))
        dval = complex(poly_eval(dx, xi))
        if dval == 0:
            break
        step = fval / dval
        xi -= step
        if abs(step) <= 4 * EPS * abs(xi):
            break
    return xi


def _residual_bound(x: np.ndarray, xi: complex) -> float:
    k = np.arange(len(x))
    return float(np.sum(np.abs(x) * max(1.0, abs(xi)) ** k))


def _sort_key(xi: complex):
    im = xi.imag if abs(xi.imag) > 1e-14 * abs(xi) else 0.0
    return (round(float(np.angle(complex(xi.real, im))), 12), abs(xi))


@dataclass(frozen=True)
class RootSet:
    roots: tuple[complex, ...]
    residual: float

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, k: int) -> complex:
        return self.roots[k]

    def min_separation(self) -> float:
        r = np.asarray(self.roots)
        if len(r) < 2:
            return float("inf")
        d = np.abs(r[:, None] - r[None, :])
        d[np.diag_indices(len(r))] = np.inf
        return float(d.min())

    def to_json(self) -> dict:
        return {
            "roots": [[z.real, z.imag] for z in self.roots],
            "residual": self.residual,
        }


def sort_roots(roots: Sequence[complex]) -> list[complex]:
    """Deterministic order: by argument in (-pi, pi], then modulus."""
    return sorted((complex(z) for z in roots), key=_sort_key)


def find_roots(x, tol: float = 1e-8) -> RootSet:
    """Roots of f via companion-matrix eigenvalues plus Newton polishing.

    Raises DegenerateParameterError when x_0 or x_n vanishes or two roots
    cannot be separated at the working precision.
    """
    x = as_parameter(x)
    n = len(x) - 1
    if n < 1:
        raise DegenerateParameterError("need at least two coefficients")
    scale = coefficient_scale(x)
    if abs(x[0]) <= tol * scale or abs(x[-1]) <= tol * scale:
        raise DegenerateParameterError("x_0 and x_n must be nonzero")

    raw = np.roots(x[::-1])
    roots = [_polish(x, complex(z)) for z in raw]

    dx = poly_derivative_coeffs(x)
    residual = 0.0
    for a, xi in enumerate(roots):
        fval = abs(complex(poly_eval(x, xi)))
        bound = _residual_bound(x, xi)
        if fval > 1e-12 * bound:
            raise DegenerateParameterError(f"Newton polishing stalled at {xi}: |f| = {fval:.3e}")
        residual = max(residual, fval)
        if abs(xi) <= tol:
            raise DegenerateParameterError(f"root {xi} is numerically zero")
        # forward error estimate of a simple root
        dval = abs(complex(poly_eval(dx, xi)))
        err = 1e3 * EPS * bound / dval if dval > 0 else np.inf
        for b, other in enumerate(roots):
            if b == a:
                continue
            sep = abs(other - xi)
            if sep <= tol * max(1.0, abs(xi)) or sep <= err:
                raise DegenerateParameterError(
                    f"roots {xi} and {other} collide (separation {sep:.3e})"
                )
    return RootSet(tuple(sort_roots(roots)), residual)


def check_nondegenerate(x, tol: float = 1e-8) -> bool:
    x = as_parameter(x)
    if len(x) < 2 or abs(x[0]) <= tol or abs(x[-1]) <= tol:
        return False
    try:
        rs = find_roots(x, tol)
    except DegenerateParameterError:
        return False
    return all(abs(z) > tol for z in rs) and rs.min_separation() > tol


def vieta_residuals(x, roots: RootSet) -> tuple[float, float]:
    """Relative errors of prod(xi) = (-1)^n x_0/x_n and sum(xi) = -x_{n-1}/x_n."""
    x = as_parameter(x)
    n = len(x) - 1
    r = np.asarray(roots.roots)
    prod_expected = (-1) ** n * x[0] / x[-1]
    sum_expected = -x[-2] / x[-1]
    prod_err = abs(np.prod(r) - prod_expected) / abs(prod_expected)
    sum_err = abs(np.sum(r) - sum_expected) / max(1.0, abs(sum_expected), float(np.max(np.abs(r))))
    return float(prod_err), float(sum_err)


def random_parameter(n: int, rng: np.random.Generator, gaps: Sequence[int] = (),
                     min_separation: float = 0.15, max_tries: int = 200) -> np.ndarray:
    """Seeded generic parameter point with well-separated roots.

    Entries are standard complex normals; ``gaps`` indices are forced to 0.
    Draws whose roots are closer than ``min_separation`` (relative to the
    root scale) or nearer than that to the origin are rejected.
    """
    for _ in range(max_tries):
        x = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        for g in gaps:
            x[g] = 0.0
        if not check_nondegenerate(x):
            continue
        rs = find_roots(x)
        rscale = max(1.0, max(abs(z) for z in rs))
        if rs.min_separation() < min_separation * rscale:
            continue
        if min(abs(z) for z in rs) < min_separation:
            continue
        return x
    raise DegenerateParameterError("could not draw a well-conditioned parameter point")
