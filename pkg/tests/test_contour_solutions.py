from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bbgkz import contour_solutions as cs
from bbgkz.lattice_fan import LatticePoint
from bbgkz.poly_roots import find_roots, poly_derivative_coeffs, poly_eval, random_parameter

X_CIRCLE = np.array([1, 0, 1], dtype=complex)


def fprime(x, z):
    return complex(poly_eval(poly_derivative_coeffs(x), z))


def line_degree_one_oracle(x, k):
    """(1/2 pi i) sum_j xi_j^{k-1} Log(xi_j) / f'(xi_j), from partial fractions of w^{k-1}/f."""
    total = sum(xi ** (k - 1) * cmath.log(xi) / fprime(x, xi) for xi in find_roots(x))
    return total / (2j * math.pi)


def test_phi_trivial():
    t = cs.phi_trivial(2, 2)
    assert t[(0, 0)] == 1
    assert t[(1, 1)] == 0 and t[(2, 2)] == 0
    assert cs.euler_check(t, X_CIRCLE) == 0


def test_phi_at_root_i_matches_closed_values():
    t = cs.phi_at_root(X_CIRCLE, 1j)
    assert abs(t[(1, 1)] - 0.5j) < 1e-13
    assert abs(t[(0, 1)]) < 1e-13
    assert abs(t[(0, 0)] - cmath.log(1j)) < 1e-15


def test_degree_one_euler_sum_vanishes(rng):
    x = random_parameter(4, rng)
    for xi in find_roots(x):
        t = cs.phi_at_root(x, xi)
        assert abs(sum(x[j] * t[(j, 1)] for j in range(5))) < 1e-12


def test_psi_at_root_i():
    a = cs.psi_at_root(X_CIRCLE, 1j)
    b = cs.psi_at_root(X_CIRCLE, -1j)
    assert abs(a[(1, 1)] - 0.5j) < 1e-13
    assert abs(a[(1, 1)] + b[(1, 1)]) < 1e-13


def test_psi_at_root_second_order_pole(rng):
    # residue of 1/f^2 at a simple root: -f''/f'^3
    x = random_parameter(3, rng)
    d2 = poly_derivative_coeffs(x, 2)
    for xi in find_roots(x):
        expected = -complex(poly_eval(d2, xi)) / fprime(x, xi) ** 3
        assert abs(cs.psi_at_root(x, xi)[(1, 2)] - expected) < 1e-9 * max(1, abs(expected))


def test_psi_table_has_only_interior_points():
    t = cs.psi_at_root(X_CIRCLE, 1j)
    assert (0, 1) not in t and (2, 1) not in t and (1, 1) in t


def test_psi_line_arctan_value():
    # (1/2 pi i) * int_0^inf dt/(1+t^2) = (pi/2)/(2 pi i)
    t = cs.psi_line(X_CIRCLE)
    assert abs(t[(1, 1)] - (math.pi / 2) / (2j * math.pi)) < 1e-12


@pytest.mark.parametrize("eta", [0.4, 0.26, 0.2, 0.05, 1e-3, -1e-3, -0.05, -0.3])
def test_psi_line_with_root_near_negative_axis(eta):
    xi = -1 + 1j * eta
    x = np.convolve([-xi, 1], [-(3 - 0.5j), 1]).astype(complex)  # roots xi, 3 - 0.5i
    t = cs.psi_line(x)
    assert abs(t[(1, 1)] - line_degree_one_oracle(x, 1)) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_psi_line_degree_one_oracle(n):
    x = random_parameter(n, np.random.default_rng(n))
    t = cs.psi_line(x)
    for k in range(1, n):
        assert abs(t[(k, 1)] - line_degree_one_oracle(x, k)) < 1e-10


@settings(max_examples=10)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_euler_identities(n, seed):
    x = random_parameter(n, np.random.default_rng(seed))
    phis, psis = cs.residue_bases(x)
    assert max(cs.euler_check(t, x) for t in phis + psis[1:]) < 1e-9
    assert cs.euler_check(psis[0], x) < 1e-7


@settings(max_examples=10)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_residue_relations(n, seed):
    x = random_parameter(n, np.random.default_rng(seed))
    phis, psis = cs.residue_bases(x)
    assert max(abs(v) for v in cs.sum_tables(psis[1:]).values()) < 1e-8
    alpha, rest = cs.residue_sum_alpha(phis[1:])
    assert rest < 1e-8
    # the constant is a multiple of pi i
    assert abs(alpha.real) < 1e-10
    assert abs(alpha.imag / math.pi - round(alpha.imag / math.pi)) < 1e-10


@pytest.mark.parametrize("n", [2, 4, 6])
def test_closed_forms(n):
    x = random_parameter(n, np.random.default_rng(10 + n))
    for xi in find_roots(x):
        t = cs.phi_at_root(x, xi)
        for c, val in cs.closed_form_degree_one(x, xi).items():
            assert abs(t[c] - val) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 5])
def test_derivative_identities(n):
    x = random_parameter(n, np.random.default_rng(20 + n))
    phi = cs.nearest_root_factory("phi", x, 0)
    psi = cs.nearest_root_factory("psi", x, 1)
    for j in range(n + 1):
        assert cs.derivative_check(phi, x, (0, 0), j) < 1e-5
        assert cs.derivative_check(phi, x, (1, 1), j) < 1e-5
        assert cs.derivative_check(psi, x, (1, 1), j) < 1e-5
        assert cs.derivative_check(lambda y: cs.psi_line(y), x, (1, 1), j) < 1e-5


def test_trivial_solution_derivative_is_zero():
    assert cs.derivative_check(lambda y: cs.phi_trivial(2), X_CIRCLE, (0, 0), 1) == 0


def test_combine_and_branches():
    a = cs.phi_at_root(X_CIRCLE, 1j, branches={"log_xi": cmath.log(1j) + 2j * math.pi})
    b = cs.phi_at_root(X_CIRCLE, 1j)
    assert abs(a[(0, 0)] - b[(0, 0)] - 2j * math.pi) < 1e-15
    c = a.combine(b, -1.0)
    assert abs(c[LatticePoint(1, 1)]) < 1e-15
