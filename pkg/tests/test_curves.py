import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mms import measures as ms
from mms.curves import (CurveError, constant_curve, decompose_curve, dilation_curve, mixture_path,
                        subparametrized, translation_curve, validate_curve)
from mms.mmetric import dm
from mms.space import new_grid

LINE = new_grid(1, [41], 0.1, origin=[-1.0])          # [-1, 3]
UNIT = ((LINE.coords[:, 0] >= -1e-9) & (LINE.coords[:, 0] <= 1 + 1e-9)).astype(float)


def test_constant_curve():
    c = validate_curve([ms.from_density(LINE, UNIT)] * 3, [0, 1, 2])
    assert c.lip_cert == 0 and c.rectifiable
    assert constant_curve(ms.from_density(LINE, UNIT), 2).lip_cert == 0


def test_translation_curve_certificate_is_measured_one():
    c = translation_curve(LINE, UNIT, (1,), 4, validate=True)
    assert c.lip_cert == pytest.approx(1.0, abs=1e-9)
    assert translation_curve(LINE, UNIT, (1,), 4).lip_cert == 1.0
    assert np.allclose(c.times, [0, 0.1, 0.2, 0.3, 0.4])


def test_translation_steps_zero_is_constant():
    c = translation_curve(LINE, UNIT, (1,), 0)
    assert len(c) == 1 and c.lip_cert == 0


def test_translation_half_unit():
    c = translation_curve(LINE, UNIT, (1,), 5)
    assert abs(dm(c.states[0], c.states[5]) - 0.5) <= 0.1


def test_translation_rejects_non_lattice_direction():
    g = new_grid(2, [6, 6], 0.1)
    phi = np.zeros(g.n)
    phi[g.index_of((2, 2))] = 1
    with pytest.raises(CurveError):
        translation_curve(g, phi, (np.sqrt(0.5), np.sqrt(0.5)), 1)
    with pytest.raises(CurveError):
        translation_curve(g, phi, (0, 0), 1)


def test_translation_exit_is_an_error():
    with pytest.raises(CurveError):
        translation_curve(LINE, UNIT, (1,), 30)


def test_diagonal_lattice_translation_is_one_lipschitz():
    g = new_grid(2, [8, 8], 0.1)
    phi = np.zeros(g.n)
    for i in (1, 2):
        for j in (1, 2):
            phi[g.index_of((i, j))] = 0.5
    c = translation_curve(g, phi, (1, 1), 3, validate=True)
    assert c.lip_cert <= 1 + 1e-9
    assert c.times[1] == pytest.approx(0.1 * np.sqrt(2))


def test_dilation_steps_zero_is_constant():
    c = dilation_curve(LINE, 20, 0.5, 0)
    assert len(c) == 1 and c.lip_cert == 0


def test_dilation_mass_and_lipschitz():
    g = new_grid(1, [41], 0.05, origin=[-1.0])
    c = dilation_curve(g, 20, 0.5, 4)
    m = c.masses()
    assert np.ptp(m) / m[0] <= 2 * 0.05 / 0.5
    assert c.lip_cert <= 1.1


def test_dilation_exit_is_an_error():
    with pytest.raises(CurveError):
        dilation_curve(LINE, 2, 0.5, 2)


def test_subparametrized_is_one_lipschitz():
    g = new_grid(2, [11, 11], 0.1)
    c = subparametrized(dilation_curve(g, g.index_of((5, 5)), 0.2, 2))
    assert c.lip_cert == 1.0
    again = validate_curve(c.states, c.times)
    assert again.lip_cert <= 1 + 1e-9


def test_mixture_path():
    eta = ms.from_density(LINE, UNIT)
    nu = ms.from_density(LINE, np.roll(UNIT, 15) * 0.5)
    states = mixture_path(eta, nu, 4)
    assert ms.equal(states[0], eta) and ms.equal(states[-1], nu)
    d = dm(eta, nu)
    assert all(dm(eta, s) <= d + 1e-9 for s in states)
    c = validate_curve(states, np.linspace(0, 0.01, 5))
    assert c.lip_cert > 10 and not c.rectifiable
    half = mixture_path(eta, ms.zero(LINE), 2)[1]
    assert ms.total_mass(half) == pytest.approx(ms.total_mass(eta) / 2)


def test_validate_rejects_inconsistent_mass():
    g = new_grid(1, [3], 1.0)
    a = ms.from_density(g, [1, 0, 0])
    b = ms.from_density(g, [0.99, 0, 0])
    with pytest.raises(CurveError):
        validate_curve([a, b], [0, 1])


def test_validate_input_errors():
    nu = ms.from_density(LINE, UNIT)
    with pytest.raises(CurveError):
        validate_curve([], [])
    with pytest.raises(CurveError):
        validate_curve([nu, nu], [0, 0])


def test_reverse_and_restrict_preserve_certificate():
    c = translation_curve(LINE, UNIT, (1,), 6, validate=True)
    r = c.reversed()
    assert validate_curve(r.states, r.times).lip_cert == pytest.approx(c.lip_cert)
    sub = c.restricted(2, 5)
    assert len(sub) == 4          # stop index is inclusive
    assert validate_curve(sub.states, sub.times).lip_cert <= c.lip_cert + 1e-12


def test_invariants_of_generated_curves():
    g = new_grid(2, [12, 12], 0.1)
    for c in [translation_curve(g, ms.indicator(g, [g.index_of((5, 5)), g.index_of((5, 6))]), (0, 1), 3),
              subparametrized(dilation_curve(g, g.index_of((6, 6)), 0.2, 2))]:
        assert c.mass_constant()
        assert c.support_drift_ok()


def test_decompose_single_part_returns_curve():
    c = translation_curve(LINE, UNIT, (1,), 4)
    (only,) = decompose_curve(c, 0, [c.states[0]])
    assert all(ms.equal(a, b, 1e-9) for a, b in zip(only.states, c.states))


def test_decompose_translation_into_halves():
    c = translation_curve(LINE, UNIT, (1,), 4)
    left = ms.restrict(c.states[0], range(10, 16))
    right = ms.restrict(c.states[0], range(16, 21))
    parts = decompose_curve(c, 0, [left, right])
    for k in range(len(c)):
        total = parts[0].states[k].mass_vector + parts[1].states[k].mass_vector
        assert np.max(np.abs(total - c.states[k].mass_vector)) <= 1e-9
    for p in parts:
        assert p.lip_cert <= 1 + 1e-6
        assert p.mass_constant()


def test_decompose_halves_are_half_curves():
    c = translation_curve(LINE, UNIT, (1,), 3)
    half = ms.scale(c.states[1], 0.5)
    a, b = decompose_curve(c, 1, [half, half])
    for k in range(len(c)):
        assert np.allclose(a.states[k].mass_vector, 0.5 * c.states[k].mass_vector, atol=1e-12)
        assert np.allclose(b.states[k].mass_vector, a.states[k].mass_vector, atol=1e-12)


def test_decompose_rejects_bad_parts():
    c = translation_curve(LINE, UNIT, (1,), 2)
    with pytest.raises(CurveError):
        decompose_curve(c, 0, [ms.scale(c.states[0], 0.3)])
    with pytest.raises(CurveError):
        decompose_curve(c, 5, [c.states[0]])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_random_splits_sum_and_stay_lipschitz(seed):
    rng = np.random.default_rng(seed)
    phi = np.zeros(LINE.n)
    start = int(rng.integers(5, 15))
    phi[start:start + 8] = rng.uniform(0.2, 1, size=8)
    c = translation_curve(LINE, phi, (int(rng.choice([-1, 1])),), 4)
    at = int(rng.integers(0, len(c)))
    cut = rng.uniform(0, 1, size=LINE.n)
    first = ms.from_density(LINE, c.states[at].density * cut)
    second = ms.subtract(c.states[at], first)
    parts = decompose_curve(c, at, [first, second])
    slack = LINE.spacing / c.duration
    for k in range(len(c)):
        total = sum(p.states[k].mass_vector for p in parts)
        assert np.max(np.abs(total - c.states[k].mass_vector)) <= 1e-9
    for p in parts:
        assert p.lip_cert <= 1 + 1e-6 + slack
