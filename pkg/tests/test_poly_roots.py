from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bbgkz.poly_roots import (DegenerateParameterError, as_parameter, check_nondegenerate, find_roots,
                              parameter_to_json, poly_eval, random_parameter, sort_roots, vieta_residuals)


def test_roots_of_one_plus_z_squared():
    rs = find_roots([1, 0, 1])
    assert np.allclose(sorted(rs.roots, key=lambda z: z.imag), [-1j, 1j], atol=1e-15)


def test_roots_of_factored_quadratic():
    rs = find_roots([1, 3, 2])
    assert np.allclose(sorted(z.real for z in rs), [-1.0, -0.5], atol=1e-15)
    assert all(abs(z.imag) < 1e-15 for z in rs)


def test_double_root_is_rejected():
    with pytest.raises(DegenerateParameterError):
        find_roots([1, 2, 1])


def test_vanishing_end_coefficients_rejected():
    with pytest.raises(DegenerateParameterError):
        find_roots([0, 1, 1])
    with pytest.raises(DegenerateParameterError):
        find_roots([1, 1, 0])


@pytest.mark.parametrize("x,expected", [([1, 0, 1], True), ([1, 2, 1], False), ([0, 1, 1], False)])
def test_check_nondegenerate(x, expected):
    assert check_nondegenerate(x, 1e-6) is expected


def test_parameter_accepts_re_im_pairs():
    x = as_parameter([[1, 2], 3, [0, -1]])
    assert list(x) == [1 + 2j, 3, -1j]
    assert parameter_to_json(x) == [[1.0, 2.0], [3.0, 0.0], [0.0, -1.0]]


def test_sort_order_is_by_argument_then_modulus():
    roots = sort_roots([1j, -1 + 0j, 2 + 0j, 1 + 0j, -1j])
    assert roots == [-1j, 1, 2, 1j, -1]


def test_random_parameter_with_gaps(rng):
    x = random_parameter(4, rng, gaps=(1, 2))
    assert x[1] == 0 and x[2] == 0
    assert check_nondegenerate(x)


@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_roots_satisfy_vieta_and_vanish(n, seed):
    x = random_parameter(n, np.random.default_rng(seed))
    rs = find_roots(x)
    assert len(rs) == n
    prod_err, sum_err = vieta_residuals(x, rs)
    assert prod_err < 1e-9 and sum_err < 1e-9
    scale = np.sum(np.abs(x)) * max(1, max(abs(z) for z in rs)) ** n
    assert max(abs(poly_eval(x, z)) for z in rs) < 1e-12 * scale


@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_roots_move_continuously(n, seed):
    rng = np.random.default_rng(seed)
    x = random_parameter(n, rng)
    rs = find_roots(x)
    dx = 1e-7 * (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1))
    moved = find_roots(x + dx)
    for z in rs:
        assert min(abs(z - w) for w in moved) < 1e-4 * rs.min_separation()
