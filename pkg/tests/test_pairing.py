from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bbgkz import contour_solutions as cs
from bbgkz.lattice_fan import LatticePoint, is_interior
from bbgkz.monodromy import path_constancy, smooth_random_path
from bbgkz.pairing import (constancy_spread, expected_residue_block, numerical_rank, pair,
                           pairing_matrix, pairing_terms)
from bbgkz.poly_roots import random_parameter


def test_terms_n2():
    terms = pairing_terms(2)
    # three quadratic terms plus the degree-one terms with partner (1,1)
    quad = [t for t in terms if t.c == LatticePoint(0, 0)]
    assert [(t.i, t.j, t.coeff) for t in quad] == [(0, 1, 1), (0, 2, 4), (1, 2, 1)]
    lin = {(t.i, t.j, t.c.a): t.coeff for t in terms if t.c.b == 1}
    # ray terms carry weight 1/2; partners on the boundary of the cone drop out
    assert lin == {(0, 1, 0): Fraction(-1), (1, 2, 2): Fraction(-1), (0, 2, 1): Fraction(-4)}


@pytest.mark.parametrize("n", range(2, 7))
def test_terms_partners_are_interior(n):
    for t in pairing_terms(n):
        assert is_interior(t.d, n)
        assert t.c.a + t.d.a == t.i + t.j and t.c.b + t.d.b == 2


@pytest.mark.parametrize("n", range(2, 7))
def test_pairing_matrix_structure(n):
    x = random_parameter(n, np.random.default_rng(100 + n))
    phis, psis = cs.residue_bases(x)
    pm = pairing_matrix(phis, psis, x)
    assert abs(pm.matrix[0, 0] - n / (2j * math.pi)) < 1e-9
    assert np.max(np.abs(pm.matrix[0, 1:])) < 1e-9
    assert np.max(np.abs(pm.matrix[1:, 1:] - expected_residue_block(n))) < 1e-9
    assert pm.rank == n


@pytest.mark.parametrize("n", [2, 3, 5])
def test_root_vs_line_column_is_half_integer(n):
    # the entries <Phi^root, Psi^line> are not fixed by the identities above;
    # they come out in (1/2)Z
    x = random_parameter(n, np.random.default_rng(200 + n))
    phis, psis = cs.residue_bases(x)
    col = pairing_matrix(phis, psis, x).matrix[1:, 0]
    assert np.max(np.abs(2 * col - np.round(2 * col.real))) < 1e-8


@pytest.mark.parametrize("n,gaps", [(3, [1]), (4, [2]), (5, [1, 3]), (6, [2, 4])])
def test_pairing_with_zero_coordinates(n, gaps):
    x = random_parameter(n, np.random.default_rng(n), gaps=gaps)
    assert all(x[g] == 0 for g in gaps)
    phis, psis = cs.residue_bases(x)
    pm = pairing_matrix(phis, psis, x)
    assert np.max(np.abs(pm.matrix[1:, 1:] - expected_residue_block(n))) < 1e-9


@pytest.mark.parametrize("n,gaps", [(4, [2]), (5, [1, 3])])
def test_constancy_along_gapped_path(n, gaps):
    path = smooth_random_path(n, np.random.default_rng(n), gaps)
    spread, mats = path_constancy(path, 6)
    assert spread < 1e-6


@settings(max_examples=6)
@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1))
def test_constancy_along_random_paths(n, seed):
    spread, _ = path_constancy(smooth_random_path(n, np.random.default_rng(seed)), 5)
    assert spread < 1e-6


def test_pair_is_bilinear():
    x = random_parameter(3, np.random.default_rng(1))
    phis, psis = cs.residue_bases(x)
    a = pair(phis[1].combine(phis[2], 2.0), psis[1], x)
    assert abs(a - pair(phis[1], psis[1], x) - 2 * pair(phis[2], psis[1], x)) < 1e-12


def test_pair_accepts_outer_product():
    x = random_parameter(2, np.random.default_rng(2))
    phis, psis = cs.residue_bases(x)
    vec_phi = {c: np.array([phis[1][c], phis[2][c]]) for c in phis[1].points()}
    vec_psi = {c: np.array([psis[1][c], psis[2][c]]) for c in psis[1].points()}
    out = pair(vec_phi, vec_psi, x, product=np.multiply.outer)
    assert np.max(np.abs(out - expected_residue_block(2))) < 1e-9


def test_missing_entry_is_reported():
    x = random_parameter(2, np.random.default_rng(3))
    with pytest.raises(KeyError, match="missing"):
        pair({}, {}, x)


def test_rank_and_spread_helpers():
    assert numerical_rank(np.zeros((2, 2)))[0] == 0
    assert numerical_rank(np.diag([1.0, 1e-9]))[0] == 1
    m = np.eye(2)
    assert constancy_spread([m]) == 0.0
    assert constancy_spread([m, m + 1e-3, m]) == pytest.approx(1e-3)
