"""Duality pairing between solutions of bbGKZ(C, 0) and bbGKZ(C°, 0).

<Phi, Psi> = Phi_(0,0) * sum_{i<j} (j-i)^2 x_i x_j Psi_{v_i+v_j}
             - sum_{i<j} n (j-i) x_i x_j sum_c delta^c_ij Phi_c Psi_{v_i+v_j-c}

where c runs over degree-one points of the cone sigma_ij, delta = 1 in its
interior and 1/2 on its rays, and only partners d in C° are kept.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .lattice_fan import LatticePoint, is_interior
from .poly_roots import as_parameter


@dataclass(frozen=True)
class PairingTerm:
    """coeff * x_i * x_j * Phi_c * Psi_d."""

    c: LatticePoint
    d: LatticePoint
    coeff: Fraction
    i: int
    j: int


def pairing_terms(n: int) -> list[PairingTerm]:
    """The finitely many nonzero polynomials p_{c,d}, each a monomial x_i x_j."""
    terms = []
    origin = LatticePoint(0, 0)
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            terms.append(PairingTerm(origin, LatticePoint(i + j, 2), Fraction((j - i) ** 2), i, j))
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            for m in range(i, j + 1):
                d = LatticePoint(i + j - m, 1)
                if not is_interior(d, n):
                    continue
                delta = Fraction(1) if i < m < j else Fraction(1, 2)
                terms.append(PairingTerm(LatticePoint(m, 1), d, -n * (j - i) * delta, i, j))
    return terms


def pair(phi, psi, x, product: Callable = operator.mul, terms: Sequence[PairingTerm] | None = None):
    """Evaluate the pairing.

    ``phi`` and ``psi`` are anything indexable by lattice points (solution
    tables, dicts).  ``product`` combines one Phi and one Psi entry; for
    cohomology-valued solutions pass ``np.multiply.outer``.
    """
    x = as_parameter(x)
    n = len(x) - 1
    if terms is None:
        terms = pairing_terms(n)
    total = None
    for t in terms:
        w = x[t.i] * x[t.j]
        if w == 0:
            continue  # gap index
        try:
            a, b = phi[t.c], psi[t.d]
        except KeyError as exc:
            raise KeyError(f"solution table is missing entry {exc}") from None
        contrib = complex(t.coeff) * w * product(a, b)
        total = contrib if total is None else total + contrib
    return total


@dataclass
class PairingMatrix:
    matrix: np.ndarray
    rank: int
    singular_values: np.ndarray

    def to_json(self) -> dict:
        return {
            "matrix": [[[z.real, z.imag] for z in row] for row in self.matrix],
            "rank": self.rank,
            "singular_values": [float(s) for s in self.singular_values],
        }


def numerical_rank(matrix: np.ndarray, rel_tol: float = 1e-6) -> tuple[int, np.ndarray]:
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.sum(s > rel_tol * s[0])), s


def pairing_matrix(phis: Sequence, psis: Sequence, x) -> PairingMatrix:
    terms = pairing_terms(len(as_parameter(x)) - 1)
    mat = np.array([[pair(p, q, x, terms=terms) for q in psis] for p in phis], dtype=complex)
    rank, s = numerical_rank(mat)
    return PairingMatrix(mat, rank, s)


def expected_residue_block(n: int) -> np.ndarray:
    """<Phi^{gamma_k}, Psi^{gamma_l}> = n delta_kl - 1."""
    return n * np.eye(n) - np.ones((n, n))


def constancy_spread(matrices: Sequence[np.ndarray]) -> float:
    """Largest pairwise distance between samples of the same entry."""
    if len(matrices) < 2:
        return 0.0
    stack = np.stack(matrices)
    worst = 0.0
    for a in range(len(stack)):
        diff = np.abs(stack[a + 1:] - stack[a])
        if diff.size:
            worst = max(worst, float(diff.max()))
    return worst
