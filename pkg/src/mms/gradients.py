"""Upper-gradient estimation from declared curve ensembles.

For a functional ``F`` and a measure ``eta`` the estimator is

    r_hat = max over curves nu from eta and scales s of |F(nu(s)) - F(eta)| / s

which is exact on the sampled set and a lower bound for the supremum over
all 1-Lipschitz curves.  Scales are given in time steps of each curve.  A
two-point Richardson extrapolation toward ``s -> 0`` is reported next to
the per-scale values; callers choose which one feeds a field.

Point fields ``g`` are probed with full-density balls ``mu|B(x, rho)``;
points whose probe or curves would leave the grid are excluded from fields
and norms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import measures as ms
from .curves import (Curve, CurveError, LIP_TOL, closed_ball, dilation_curve,
                     subparametrized, translation_curve)
from .functionals import MeasureFunctional, PointFunction, lp_norm_point
from .measures import Measure, ZeroMeasureError
from .space import MetricSpace

ESTIMATES = ("sup", "richardson")


class EnsembleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CurveEnsemble:
    """Curves sharing a start measure, evaluated at ``scales`` (step counts)."""

    curves: tuple
    scales: tuple = (1, 2, 4)
    slack: float = LIP_TOL

    def __post_init__(self):
        if not self.curves:
            raise EnsembleError("empty ensemble")
        if not self.scales or min(self.scales) < 1:
            raise EnsembleError("scales must be positive step counts")
        anchor = self.curves[0].states[0].density
        for c in self.curves:
            if c.lip_cert > 1 + self.slack:
                raise EnsembleError(f"curve {c.label!r} is not 1-Lipschitz (lip_cert={c.lip_cert:.4g})")
            if len(c) - 1 < max(self.scales):
                raise EnsembleError(f"curve {c.label!r} shorter than the largest scale")
            if not np.array_equal(c.states[0].density, anchor):
                raise EnsembleError("curves do not share a start measure")

    @property
    def anchor(self) -> Measure:
        return self.curves[0].states[0]

    def describe(self) -> dict:
        return {"curves": [c.label for c in self.curves], "scales": list(self.scales)}

    def extended(self, curves: Sequence[Curve] = (), scales: Sequence[int] = ()) -> "CurveEnsemble":
        merged_scales = tuple(sorted(set(self.scales) | set(scales)))
        return CurveEnsemble(self.curves + tuple(curves), merged_scales, self.slack)


@dataclass(frozen=True)
class EstimateProfile:
    value: float                # max over curves and scales
    per_scale: np.ndarray       # max over curves at each scale
    richardson: float           # max over curves of |2 q(s1) - q(2 s1)|, nan if unavailable
    quotients: np.ndarray       # signed difference quotients, curves x scales

    def pick(self, estimate: str) -> float:
        if estimate == "sup":
            return self.value
        if estimate == "richardson":
            return self.richardson
        raise ValueError(f"unknown estimate {estimate!r}")


def upper_gradient_profile(F: MeasureFunctional, eta: Measure, ensemble: CurveEnsemble) -> EstimateProfile:
    if ensemble is None or not ensemble.curves:
        raise EnsembleError("empty ensemble")
    if ms.total_mass(eta) <= 0:
        raise ZeroMeasureError("upper gradients are estimated at nonzero measures")
    if not np.array_equal(ensemble.anchor.density, eta.density):
        raise EnsembleError("ensemble is not anchored at eta")
    base = F(eta)
    scales = ensemble.scales
    q = np.empty((len(ensemble.curves), len(scales)))
    for c, curve in enumerate(ensemble.curves):
        for k, s in enumerate(scales):
            q[c, k] = (F(curve.states[s]) - base) / curve.times[s]
    per_scale = np.abs(q).max(axis=0)
    if len(scales) >= 2 and scales[1] == 2 * scales[0]:
        rich = float(np.abs(2 * q[:, 0] - q[:, 1]).max())
    else:
        rich = float("nan")
    return EstimateProfile(float(per_scale.max()), per_scale, rich, q)


def upper_gradient_estimate(F: MeasureFunctional, eta: Measure, ensemble: CurveEnsemble,
                            estimate: str = "sup") -> float:
    """Sampled upper gradient of ``F`` at ``eta``.

    ``estimate="sup"`` is the largest difference quotient over the ensemble;
    ``"richardson"`` extrapolates each curve's quotient from its first two
    scales (which must be ``s`` and ``2s``) before taking the maximum.
    """
    return upper_gradient_profile(F, eta, ensemble).pick(estimate)


def lattice_directions(dim: int, kind: str = "lattice") -> list:
    """Shift directions: ``"axis"`` gives the ``2*dim`` unit vectors; ``"lattice"`` adds
    the diagonal and knight-move lattice vectors (16 directions in 2-D, 26 in 3-D)."""
    if kind == "axis":
        base = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    elif kind == "lattice":
        if dim == 1:
            base = [(1,)]
        elif dim == 2:
            base = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)]
        else:
            base = [v for v in itertools.product((-1, 0, 1), repeat=3)
                    if any(v) and next(x for x in v if x) > 0]
    else:
        raise ValueError(f"unknown direction set {kind!r}")
    out = []
    for v in base:
        out.append(tuple(v))
        out.append(tuple(-x for x in v))
    return out


def probe_measure(space: MetricSpace, x: int, rho: float) -> Measure:
    """Full-density ball ``mu|B(x, rho)``."""
    return ms.indicator(space, closed_ball(space, x, rho))


class EnsembleFactory:
    """Builds, for a grid point ``x``, the ensemble of curves leaving ``mu|B(x, rho)``.

    Translations along every direction in ``directions`` and, optionally, the
    mass-preserving dilation of the probe ball.  The dilation's Lipschitz
    constant is measured once on a template and reused at other centres (the
    metric is translation invariant on uniform grids); if it exceeds 1 the
    curve is slowed down by that factor so it stays 1-Lipschitz.
    """

    def __init__(self, space: MetricSpace, rho: float, scales: Sequence[int] = (1, 2, 4),
                 directions: str = "lattice", dilation: bool = True, h=None):
        space._require_grid()
        if rho < space.spacing - 1e-12:
            raise ValueError("probe radius must be at least one grid spacing")
        self.space = space
        self.rho = float(rho)
        self.scales = tuple(int(s) for s in scales)
        self.direction_kind = directions
        self.directions = lattice_directions(space.dim, directions)
        self.dilation = dilation
        self.h = h
        self._dilation_lip = None
        self._uniform = np.ptp(space.weight) <= 1e-12 * space.weight.max()

    def describe(self) -> dict:
        return {"directions": self.direction_kind, "n_directions": len(self.directions),
                "dilation": self.dilation, "scales": list(self.scales), "rho": self.rho}

    def _dilation(self, x):
        steps = max(self.scales)
        if self._uniform and self._dilation_lip is not None:
            curve = dilation_curve(self.space, x, self.rho, steps, lip_cert=self._dilation_lip)
        else:
            curve = dilation_curve(self.space, x, self.rho, steps, h=self.h)
            if self._uniform:
                self._dilation_lip = curve.lip_cert
        return subparametrized(curve)

    def __call__(self, x: int) -> CurveEnsemble:
        c = self.space.coords[x]
        lo, hi = self.space.coords.min(axis=0), self.space.coords.max(axis=0)
        if np.any(c - self.rho < lo - 1e-12) or np.any(c + self.rho > hi + 1e-12):
            raise CurveError("probe ball exits the grid")
        probe = probe_measure(self.space, x, self.rho)
        steps = max(self.scales)
        curves = [translation_curve(self.space, probe, v, steps) for v in self.directions]
        if self.dilation:
            curves.append(self._dilation(x))
        return CurveEnsemble(tuple(curves), self.scales)


@dataclass
class GradientField:
    values: np.ndarray                      # nan at excluded points
    per_scale: np.ndarray                   # points x scales
    richardson: np.ndarray
    excluded: np.ndarray
    rho: float
    scales: tuple
    estimate: str
    meta: dict = field(default_factory=dict)

    @property
    def interior(self) -> np.ndarray:
        mask = np.ones(len(self.values), dtype=bool)
        mask[self.excluded] = False
        return mask

    def as_dict(self) -> dict:
        return {
            "values": [None if np.isnan(v) else float(v) for v in self.values],
            "rho": self.rho,
            "scales": list(self.scales),
            "estimate": self.estimate,
            "excluded": [int(i) for i in self.excluded],
            "meta": self.meta,
        }


def gradient_field(f, space: MetricSpace, rho: float,
                   ensemble_factory: Optional[Callable[[int], CurveEnsemble]] = None,
                   estimate: str = "sup", scales: Sequence[int] = (1, 2, 4)) -> GradientField:
    """Estimate the point field ``g_f`` on a grid.

    ``g[x]`` is the sampled upper gradient of ``F_f`` at the probe
    ``mu|B(x, rho)`` over ``ensemble_factory(x)``; by default
    :class:`EnsembleFactory` with the given ``scales``.  Points where the probe
    or any curve leaves the grid are listed in ``excluded`` and hold ``nan``.
    ``estimate`` selects the reported value (``"sup"`` or ``"richardson"``);
    both are stored.
    """
    if estimate not in ESTIMATES:
        raise ValueError(f"estimate must be one of {ESTIMATES}")
    f = f if isinstance(f, PointFunction) else PointFunction(f)
    F = MeasureFunctional.induced(f)
    factory = ensemble_factory or EnsembleFactory(space, rho, scales)
    n = space.n
    nscale = len(getattr(factory, "scales", scales))
    per_scale = np.full((n, nscale), np.nan)
    rich = np.full(n, np.nan)
    excluded = []
    for x in range(n):
        try:
            ens = factory(x)
        except CurveError:
            excluded.append(x)
            continue
        prof = upper_gradient_profile(F, ens.anchor, ens)
        per_scale[x] = prof.per_scale
        rich[x] = prof.richardson
    excluded = np.array(excluded, dtype=int)
    values = np.full(n, np.nan)
    ok = ~np.isnan(per_scale[:, 0])
    values[ok] = rich[ok] if estimate == "richardson" else per_scale[ok].max(axis=1)
    meta = factory.describe() if hasattr(factory, "describe") else {}
    return GradientField(values, per_scale, rich, excluded, float(rho),
                         tuple(getattr(factory, "scales", scales)), estimate, meta)


def fundamental_inequality_report(F: MeasureFunctional, curve: Curve, g_breve, tol: float = 1e-6) -> dict:
    """Compare ``|F(nu(t_k)) - F(nu(0))|`` with the trapezoid integral of ``g_breve``.

    The integration error allowance is half the total variation of
    ``g_breve`` times the step, which bounds the gap between the trapezoid
    rule and either Riemann sum.
    """
    g = np.asarray(g_breve, dtype=float)
    if g.shape != (len(curve),):
        raise ValueError("need one upper-gradient value per curve state")
    t = curve.times
    vals = np.array([F(s) for s in curve.states])
    lhs = np.abs(vals - vals[0])
    seg = np.diff(t) * (g[1:] + g[:-1]) / 2
    rhs = np.concatenate([[0.0], np.cumsum(seg)])
    err = np.concatenate([[0.0], np.cumsum(np.diff(t) * np.abs(np.diff(g)) / 2)])
    ok = lhs <= rhs + tol + err
    return {"lhs": lhs, "rhs": rhs, "allowance": tol + err, "holds": bool(ok.all())}


def fundamental_inequality_check(F: MeasureFunctional, curve: Curve, g_breve, tol: float = 1e-6) -> bool:
    """Whether the integrated upper gradient dominates the change of ``F`` along ``curve``."""
    if curve.lip_cert > 1 + LIP_TOL:
        raise CurveError("the inequality is stated for 1-Lipschitz curves")
    return fundamental_inequality_report(F, curve, g_breve, tol)["holds"]


def sobolev_norm(f, p: float, gradient: GradientField, weight: np.ndarray) -> float:
    """``(||f||_p**p + ||g||_p**p)**(1/p)`` over the gradient's interior points."""
    vals = f.values if isinstance(f, PointFunction) else np.asarray(f, dtype=float)
    mask = gradient.interior
    fp = lp_norm_point(vals[mask], p, weight[mask]) ** p
    gp = lp_norm_point(gradient.values[mask], p, weight[mask]) ** p
    return float((fp + gp) ** (1.0 / p))


def fd_gradient_norm(f, space: MetricSpace) -> np.ndarray:
    """``|grad f|`` by central differences (one-sided at the edges) on a grid."""
    space._require_grid()
    vals = f.values if isinstance(f, PointFunction) else np.asarray(f, dtype=float)
    grid = vals.reshape(space.shape)
    parts = np.gradient(grid, space.spacing)
    if space.dim == 1:
        parts = [parts]
    return np.sqrt(sum(p**2 for p in parts)).reshape(-1)


@dataclass
class EuclideanReport:
    sobolev_est: float
    sobolev_fd: float
    rel_norm_err: float
    max_abs_err: float
    rel_field_err: float
    rows: list              # (point, g_est, fd_grad, abs_err) over interior points
    field: GradientField

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("sobolev_est", "sobolev_fd", "rel_norm_err", "max_abs_err", "rel_field_err")}

    def csv(self) -> str:
        lines = ["point,g_est,fd_grad,abs_err"]
        lines += [f"{i},{g:.12g},{d:.12g},{e:.12g}" for i, g, d, e in self.rows]
        return "\n".join(lines) + "\n"


def euclidean_compare(f, space: MetricSpace, p: float = 2.0, rho: Optional[float] = None,
                      estimate: str = "richardson", scales: Sequence[int] = (1, 2, 4),
                      ensemble_factory=None, reference=None) -> EuclideanReport:
    """Compare the estimated ``g_f`` with ``|grad f|`` on a Euclidean grid.

    ``reference`` overrides the finite-difference gradient (e.g. with an
    analytic one).  The relative field error is the discrete L^2 error of
    ``g_est`` over the interior divided by the L^2 norm of the reference
    there.
    """
    rho = 2 * space.spacing if rho is None else rho
    field_ = gradient_field(f, space, rho, ensemble_factory, estimate, scales)
    vals = f.values if isinstance(f, PointFunction) else np.asarray(f, dtype=float)
    ref = fd_gradient_norm(vals, space) if reference is None else np.asarray(reference, float)
    mask = field_.interior
    w = space.weight
    err = np.abs(field_.values - ref)
    s_est = sobolev_norm(vals, p, field_, w)
    s_ref = float((np.sum(np.abs(vals[mask]) ** p * w[mask]) + np.sum(ref[mask] ** p * w[mask])) ** (1 / p))
    ref_l2 = np.sqrt(np.sum(ref[mask] ** 2 * w[mask]))
    err_l2 = np.sqrt(np.sum(err[mask] ** 2 * w[mask]))
    rel_field = float(err_l2 / ref_l2) if ref_l2 > 0 else float(err_l2)
    rows = [(int(i), float(field_.values[i]), float(ref[i]), float(err[i])) for i in np.flatnonzero(mask)]
    return EuclideanReport(
        s_est, s_ref,
        abs(s_est - s_ref) / s_ref if s_ref > 0 else abs(s_est - s_ref),
        float(err[mask].max()) if mask.any() else 0.0,
        rel_field, rows, field_,
    )
