import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mms import measures as ms
from mms.measures import MeasureError
from mms.space import new_from_matrix, new_grid

PAIR = new_from_matrix([[0, 1], [1, 0]], [1, 1])
densities = st.lists(st.floats(0, 1), min_size=4, max_size=4)
GRID = new_grid(1, [4], 0.5)


def test_from_density_examples():
    assert ms.from_density(PAIR, [0, 0]).is_zero
    assert ms.equal(ms.from_density(PAIR, [1, 1]), ms.full(PAIR))
    with pytest.raises(MeasureError):
        ms.from_density(PAIR, [1.5, 0])
    with pytest.raises(MeasureError):
        ms.from_density(PAIR, [1, 0, 0])


def test_from_density_clamps_within_tolerance():
    nu = ms.from_density(PAIR, [1 + 1e-13, -1e-13])
    assert nu.density.tolist() == [1.0, 0.0]


def test_total_mass_examples():
    assert ms.total_mass(ms.zero(PAIR)) == 0
    assert ms.total_mass(ms.from_density(PAIR, [1, 0.5])) == 1.5
    assert ms.total_mass(ms.full(GRID)) == pytest.approx(2.0)


def test_meet_join_examples():
    a, b = ms.from_density(PAIR, [1, 0]), ms.from_density(PAIR, [0.5, 0.5])
    assert ms.meet(a, b).density.tolist() == [0.5, 0]
    assert ms.join(a, b).density.tolist() == [1, 0.5]
    z = ms.zero(PAIR)
    assert ms.equal(ms.meet(a, z), z) and ms.equal(ms.join(a, z), a)
    assert ms.equal(ms.meet(a, a), a)


def test_restrict_examples():
    nu = ms.from_density(PAIR, [1, 1])
    assert ms.equal(ms.restrict(nu, [0, 1]), nu)
    assert ms.restrict(nu, []).is_zero
    assert ms.restrict(nu, [1]).density.tolist() == [0, 1]


def test_scale_and_add():
    nu = ms.from_density(PAIR, [0.6, 0.2])
    assert ms.scale(nu, 0).is_zero
    assert ms.equal(ms.scale(nu, 1), nu)
    assert ms.equal(ms.add_checked(ms.restrict(nu, [0]), ms.restrict(nu, [1])), nu)
    with pytest.raises(MeasureError):
        ms.add_checked(ms.full(PAIR), ms.full(PAIR))
    with pytest.raises(MeasureError):
        ms.scale(nu, 1.5)


def test_space_mismatch():
    with pytest.raises(MeasureError):
        ms.meet(ms.full(PAIR), ms.full(GRID))


def test_mix_endpoints_and_midpoint():
    a, b = ms.from_density(PAIR, [1, 0]), ms.from_density(PAIR, [0, 1])
    assert ms.equal(ms.mix(a, b, 0), a) and ms.equal(ms.mix(a, b, 1), b)
    assert ms.total_mass(ms.mix(a, ms.zero(PAIR), 0.5)) == 0.5


def test_measures_are_immutable():
    nu = ms.from_density(PAIR, [1, 0])
    with pytest.raises(ValueError):
        nu.density[0] = 0.5


@settings(max_examples=60, deadline=None)
@given(densities, densities)
def test_modular_law(a, b):
    a, b = ms.from_density(GRID, a), ms.from_density(GRID, b)
    lhs = ms.total_mass(ms.meet(a, b)) + ms.total_mass(ms.join(a, b))
    assert lhs == pytest.approx(ms.total_mass(a) + ms.total_mass(b), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(densities, densities)
def test_meet_support_is_intersection(a, b):
    a, b = ms.from_density(GRID, a), ms.from_density(GRID, b)
    expect = set(a.support.tolist()) & set(b.support.tolist())
    assert set(ms.meet(a, b).support.tolist()) == expect


@settings(max_examples=60, deadline=None)
@given(densities, st.sets(st.integers(0, 3)))
def test_restrict_idempotent_and_partition(a, members):
    nu = ms.from_density(GRID, a)
    r = ms.restrict(nu, members)
    assert ms.equal(ms.restrict(r, members), r)
    rest = ms.restrict(nu, set(range(4)) - members)
    assert ms.equal(ms.add_checked(r, rest), nu)


@settings(max_examples=60, deadline=None)
@given(densities, densities)
def test_meet_plus_difference_is_dominated(a, b):
    a, b = ms.from_density(GRID, a), ms.from_density(GRID, b)
    m = ms.meet(a, b)
    assert ms.equal(ms.add_checked(m, ms.subtract(a, m)), a)
