from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from bbgkz.monodromy import (ParameterPath, compose, endpoint_permutation, root_swap_loop,
                             small_loop, smooth_random_path, track_roots, verify_pairing_invariance)
from bbgkz.poly_roots import DegenerateParameterError, find_roots, random_parameter


def test_constant_path_is_identity():
    x = random_parameter(3, np.random.default_rng(0))
    traj = track_roots(ParameterPath.constant(x))
    assert traj.permutation == (0, 1, 2)
    inc = traj.branch_increments()
    assert max(abs(z) for z in inc["log_xi"]) < 1e-14


def test_root_swap():
    rep = verify_pairing_invariance(root_swap_loop())
    assert rep.permutation == (1, 0)
    assert abs(rep.branch_increments["log_x0"] - 2j * math.pi) < 1e-12
    assert rep.passed(1e-6)
    assert rep.table_deviation < 1e-9


def test_root_swap_twice_is_identity():
    loop = root_swap_loop()
    traj = track_roots(loop.then(loop))
    assert traj.permutation == (0, 1)
    assert traj.permutation == compose(root_swap_loop_perm(), root_swap_loop_perm())


def root_swap_loop_perm():
    return track_roots(root_swap_loop()).permutation


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("end", ["first", "last"])
def test_small_loops_fix_roots(n, end):
    x = random_parameter(n, np.random.default_rng(n))
    index = 0 if end == "first" else n
    rep = verify_pairing_invariance(small_loop(x, index, 0.05))
    assert rep.permutation == tuple(range(n))
    assert rep.passed(1e-6)


def test_loop_of_x0_around_origin_adds_log():
    x = random_parameter(3, np.random.default_rng(5))
    traj = track_roots(ParameterPath.coordinate_circle(x, 0))
    assert abs(traj.branch_increments()["log_x0"] - 2j * math.pi) < 1e-12


def test_roots_follow_the_path():
    path = smooth_random_path(4, np.random.default_rng(9))
    traj = track_roots(path, [0.25, 0.5, 0.75, 1.0])
    for state in traj.states:
        fresh = find_roots(state.x)
        for r in state.roots:
            assert min(abs(fresh - r)) < 1e-9


def test_compose_rule():
    a, b = (1, 2, 0), (0, 2, 1)
    c = compose(a, b)
    assert c == tuple(b[a[k]] for k in range(3))


def test_path_through_discriminant_is_rejected():
    # (1, 2, 1) has a double root; a straight path through it cannot be tracked
    path = ParameterPath.polygon([[1, 2.2, 1], [1, 1.8, 1]])
    with pytest.raises(DegenerateParameterError):
        track_roots(path)


def test_endpoint_permutation_matches_trajectory():
    traj = track_roots(root_swap_loop())
    assert endpoint_permutation(traj) == traj.permutation


def test_polygon_and_then():
    p = ParameterPath.polygon([[1, 0, 1], [2, 0, 1]])
    assert np.allclose(p(0.5), [1.5, 0, 1])
    q = p.then(ParameterPath.polygon([[2, 0, 1], [1, 0, 1]]))
    assert q.closed
    with pytest.raises(ValueError):
        ParameterPath.polygon([[1, 0, 1]])
    c = ParameterPath.coordinate_circle([1, 0, 1], 1, center=0.5)
    assert abs(c(0.5)[1] - (0.5 + (-0.5) * cmath.exp(1j * math.pi))) < 1e-15
