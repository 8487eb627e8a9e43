import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mms.space import (SpaceError, ball, diameter, neighborhood, new_from_matrix, new_grid,
                       triangle_violations)


def unit_pair():
    return new_from_matrix([[0, 1], [1, 0]], [1, 1])


def test_unit_pair_is_valid():
    s = unit_pair()
    assert s.n == 2
    assert s.total_weight == 2


@pytest.mark.parametrize("dist, weight, msg", [
    ([[0, 1], [2, 0]], [1, 1], "symmetric"),
    ([[0, 1, 5], [1, 0, 1], [5, 1, 0]], [1, 1, 1], "triangle"),
    ([[0, 1], [1, 0]], [1, 0], "weight"),
    ([[0, 0], [0, 0]], [1, 1], "positive"),
    ([[0, 1], [1, 0]], [1, 1, 1], "length|shape|match"),
])
def test_invalid_matrices_are_rejected(dist, weight, msg):
    with pytest.raises(SpaceError, match=msg):
        new_from_matrix(dist, weight)


def test_grid_1d_positions_and_weights():
    g = new_grid(1, [4], 0.5)
    assert np.allclose(g.coords[:, 0], [0, 0.5, 1, 1.5])
    assert np.allclose(g.weight, 0.5)


def test_grid_2d_diagonal():
    g = new_grid(2, [2, 2], 1.0)
    assert g.dist[g.index_of((0, 0)), g.index_of((1, 1))] == pytest.approx(np.sqrt(2))


def test_grid_weight_fn():
    g = new_grid(1, [3], 0.1, weight_fn=lambda x: 2 * np.ones(len(x)))
    assert np.allclose(g.weight, 0.2)


def test_grid_rejects_bad_parameters():
    with pytest.raises(SpaceError):
        new_grid(1, [4], 0.0)
    with pytest.raises(SpaceError):
        new_grid(1, [1], 0.5)


def test_grid_distances_are_translation_invariant():
    g = new_grid(2, [6, 5], 0.3)
    a = g.distances([g.index_of((0, 0))], [g.index_of((2, 3))])[0, 0]
    b = g.distances([g.index_of((3, 1))], [g.index_of((5, 4))])[0, 0]
    assert a == b


def test_shift_indices_marks_exits():
    g = new_grid(1, [4], 1.0)
    assert g.shift_indices((1,)).tolist() == [1, 2, 3, -1]


def test_diameter_examples():
    pair = unit_pair()
    assert diameter(pair, [0]) == 0
    assert diameter(pair, [0, 1]) == 1
    assert diameter(new_grid(1, [4], 0.5), [0, 1, 2]) == pytest.approx(1.0)
    with pytest.raises(SpaceError):
        diameter(pair, [])


def test_ball_examples():
    pair = unit_pair()
    assert ball(pair, 0, 0) == {0}
    assert ball(pair, 0, 1) == {0, 1}
    assert ball(new_grid(1, [4], 0.5), 0, 0.75) == {0, 1}
    with pytest.raises(SpaceError):
        ball(pair, 0, -1)


def test_neighborhood():
    g = new_grid(1, [6], 1.0)
    assert neighborhood(g, [2], 1.0) == {1, 2, 3}
    assert neighborhood(g, [], 1.0) == frozenset()


def test_fingerprint_identifies_spaces():
    assert unit_pair().fingerprint() == unit_pair().fingerprint()
    other = new_from_matrix([[0, 2], [2, 0]], [1, 1])
    assert other.fingerprint() != unit_pair().fingerprint()


def test_subspace_keeps_metric():
    g = new_grid(1, [5], 1.0)
    sub = g.subspace([0, 2, 4])
    assert sub.n == 3 and sub.dist[0, 2] == pytest.approx(4.0)


def test_large_space_uses_sampled_check():
    pts = np.random.default_rng(0).uniform(size=(80, 2))
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    assert new_from_matrix(d, np.ones(80)).n == 80
    assert triangle_violations(d[:10, :10]) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 7), st.floats(0, 3), st.floats(0, 3))
def test_ball_monotone_in_radius(c, r1, r2):
    g = new_grid(2, [3, 3], 1.0)
    lo, hi = sorted((r1, r2))
    assert ball(g, c, lo) <= ball(g, c, hi)


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(0, 8), min_size=1), st.sets(st.integers(0, 8)))
def test_diameter_monotone_under_inclusion(a, b):
    g = new_grid(2, [3, 3], 1.0)
    assert diameter(g, a) <= diameter(g, a | b)
