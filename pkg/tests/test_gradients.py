import numpy as np
import pytest

from mms import measures as ms
from mms.curves import CurveError, constant_curve, translation_curve
from mms.functionals import MeasureFunctional, PointFunction, constant, fmax, fmin
from mms.gradients import (CurveEnsemble, EnsembleError, EnsembleFactory, euclidean_compare,
                           fd_gradient_norm, fundamental_inequality_check,
                           fundamental_inequality_report, gradient_field, lattice_directions,
                           probe_measure, sobolev_norm, upper_gradient_estimate,
                           upper_gradient_profile)
from mms.space import new_grid

LINE = new_grid(1, [41], 0.1, origin=[-1.0])
X = LINE.coords[:, 0]
UNIT = ms.from_density(LINE, ((X >= -1e-9) & (X <= 1 + 1e-9)).astype(float))


def shift_ensemble(eta, steps=4, scales=(1, 2, 4)):
    return CurveEnsemble(tuple(translation_curve(LINE, eta, (d,), steps) for d in (1, -1)), scales)


def test_constant_functional_has_zero_gradient():
    assert upper_gradient_estimate(constant(2.0), UNIT, shift_ensemble(UNIT)) == 0


def test_identity_gradient_is_one():
    F = MeasureFunctional.induced(X)
    assert upper_gradient_estimate(F, UNIT, shift_ensemble(UNIT)) == pytest.approx(1.0, abs=1e-9)


def test_homogeneity_on_same_ensemble():
    ens = shift_ensemble(UNIT)
    F = MeasureFunctional.induced(np.sin(2 * X))
    r = upper_gradient_estimate(F, UNIT, ens)
    for a in (-3.0, 0.5, 2.0):
        assert upper_gradient_estimate(a * F, UNIT, ens) == pytest.approx(abs(a) * r, rel=1e-12)


def test_ensemble_validation():
    with pytest.raises(EnsembleError):
        CurveEnsemble(())
    short = translation_curve(LINE, UNIT, (1,), 2)
    with pytest.raises(EnsembleError):
        CurveEnsemble((short,), (1, 2, 4))
    other = translation_curve(LINE, translation_curve(LINE, UNIT, (1,), 1).states[1], (1,), 4)
    with pytest.raises(EnsembleError):
        CurveEnsemble((translation_curve(LINE, UNIT, (1,), 4), other))
    ens = shift_ensemble(UNIT)
    with pytest.raises(EnsembleError):
        upper_gradient_estimate(constant(1.0), other.states[0], ens)


def test_profile_reports_scales_and_richardson():
    F = MeasureFunctional.induced(X ** 2)
    prof = upper_gradient_profile(F, UNIT, shift_ensemble(UNIT))
    assert prof.per_scale.shape == (3,)
    assert prof.value == prof.per_scale.max()
    # quadratic: the quotient is linear in s, so Richardson removes it exactly
    assert prof.richardson == pytest.approx(1.0, abs=1e-9)
    assert upper_gradient_estimate(F, UNIT, shift_ensemble(UNIT), "richardson") == prof.richardson


def test_properties_on_shared_ensemble():
    ens = shift_ensemble(UNIT)
    rng = np.random.default_rng(0)
    F = MeasureFunctional.induced(np.sin(3 * X))
    G = MeasureFunctional.induced(rng.normal(size=LINE.n))
    H = MeasureFunctional.induced(X ** 3)
    r = {k: upper_gradient_estimate(v, UNIT, ens) for k, v in dict(F=F, G=G, H=H).items()}
    assert upper_gradient_estimate(F + G, UNIT, ens) <= r["F"] + r["G"] + 1e-12
    assert upper_gradient_estimate(F + G + H, UNIT, ens) <= sum(r.values()) + 1e-12
    eps = 0.4
    prod = upper_gradient_estimate(F * G, UNIT, ens)
    assert prod <= abs(F(UNIT)) * r["G"] + abs(G(UNIT)) * r["F"] + r["F"] * r["G"] * eps + 1e-12
    for op in (fmax, fmin):
        assert upper_gradient_estimate(op(F, G), UNIT, ens) <= max(r["F"], r["G"]) + 1e-12
    small = CurveEnsemble(ens.curves[:1], (1,))
    assert upper_gradient_estimate(F, UNIT, small) <= r["F"]
    assert upper_gradient_estimate(F, UNIT, small.extended(ens.curves[1:], (2, 4))) == r["F"]


def test_lattice_directions():
    assert len(lattice_directions(1)) == 2
    assert len(lattice_directions(2)) == 16
    assert len(lattice_directions(3)) == 26
    assert len(lattice_directions(2, "axis")) == 4
    with pytest.raises(ValueError):
        lattice_directions(2, "hex")


def test_factory_rejects_small_probe_and_boundary():
    with pytest.raises(ValueError):
        EnsembleFactory(LINE, 0.05)
    fac = EnsembleFactory(LINE, 0.2)
    with pytest.raises(CurveError):
        fac(1)
    ens = fac(20)
    assert ms.equal(ens.anchor, probe_measure(LINE, 20, 0.2))
    assert len(ens.curves) == 3 and fac.describe()["n_directions"] == 2


def test_gradient_field_constant_and_linear():
    g0 = gradient_field(np.full(LINE.n, 3.0), LINE, 0.2)
    assert np.nanmax(g0.values) <= 1e-12
    g1 = gradient_field(2 * X, LINE, 0.2)
    inner = g1.values[g1.interior]
    assert np.allclose(inner, 2.0, atol=1e-9)
    assert np.all(np.isnan(g1.values[g1.excluded]))
    assert g1.as_dict()["values"][0] is None


def test_gradient_field_abs_kink():
    g = gradient_field(np.abs(X - 1.0), LINE, 0.2, estimate="sup")
    far = g.interior & (np.abs(X - 1.0) > 0.7)
    assert np.allclose(g.values[far], 1.0, atol=1e-9)


def test_lipschitz_bound():
    rng = np.random.default_rng(2)
    steps = rng.uniform(-1, 1, size=LINE.n - 1) * LINE.spacing
    f = np.concatenate([[0.0], np.cumsum(steps)])      # 1-Lipschitz on the grid
    g = gradient_field(f, LINE, 0.2, estimate="sup")
    assert np.nanmax(g.values) <= 1 + 1e-9


def test_monotone_in_probe():
    # a smaller probe inside the ball sees at least the ball's gradient for linear f
    F = MeasureFunctional.induced(X)
    big = EnsembleFactory(LINE, 0.3)(20)
    small = EnsembleFactory(LINE, 0.1)(20)
    assert upper_gradient_estimate(F, small.anchor, small) >= upper_gradient_estimate(F, big.anchor, big) - 1e-12


def test_fundamental_inequality_examples():
    c = translation_curve(LINE, UNIT, (1,), 10)
    assert fundamental_inequality_check(constant(1.0), c, np.zeros(len(c)))
    F = MeasureFunctional.induced(X)
    rep = fundamental_inequality_report(F, c, np.ones(len(c)))
    assert rep["holds"]
    assert np.allclose(rep["lhs"], rep["rhs"], atol=1e-9)
    assert not fundamental_inequality_check(F, c, np.zeros(len(c)))
    with pytest.raises(ValueError):
        fundamental_inequality_check(F, c, np.ones(3))


def test_fundamental_inequality_rejects_fast_curves():
    from dataclasses import replace
    c = replace(translation_curve(LINE, UNIT, (1,), 3), lip_cert=2.0)
    with pytest.raises(CurveError):
        fundamental_inequality_check(constant(1.0), c, np.zeros(4))


def test_sobolev_norm_examples():
    g = gradient_field(np.zeros(LINE.n), LINE, 0.2)
    assert sobolev_norm(np.zeros(LINE.n), 2, g, LINE.weight) == 0
    one = gradient_field(np.ones(LINE.n), LINE, 0.2)
    mass = LINE.weight[one.interior].sum()
    for p in (1, 2, 3):
        assert sobolev_norm(np.ones(LINE.n), p, one, LINE.weight) == pytest.approx(mass ** (1 / p))


def test_fd_gradient_norm():
    g = new_grid(2, [6, 7], 0.5)
    f = 3 * g.coords[:, 0] - 4 * g.coords[:, 1]
    assert np.allclose(fd_gradient_norm(f, g), 5.0)


def test_euclidean_compare_constant_and_linear():
    rep = euclidean_compare(np.full(LINE.n, 2.0), LINE)
    assert rep.max_abs_err <= 1e-12 and rep.rel_norm_err <= 1e-12
    rep = euclidean_compare(X, LINE)
    assert rep.max_abs_err <= 1e-9
    csv = rep.csv().splitlines()
    assert csv[0] == "point,g_est,fd_grad,abs_err" and len(csv) == 1 + len(rep.rows)


def test_2d_linear_field_with_lattice_directions():
    g = new_grid(2, [15, 15], 0.1)
    f = g.coords[:, 0] + 2 * g.coords[:, 1]
    field = gradient_field(f, g, 0.2, estimate="sup")
    inner = field.values[field.interior]
    # lattice directions include (1, 2), which is parallel to the gradient
    assert np.allclose(inner, np.sqrt(5), atol=1e-9)
