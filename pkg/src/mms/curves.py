"""Discrete curves of measures under ``d_M``.

A :class:`Curve` is a sequence of measures on an increasing time grid with
a Lipschitz certificate ``lip_cert``: ``d_M(states[i], states[j]) <=
lip_cert * |t_i - t_j|`` on the grid.  Curves with ``lip_cert <= 1``
(up to :data:`LIP_TOL`) are treated as rectifiable curves parametrized no
faster than arc length.  Continuum interpolation between grid times is not
modelled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import measures as ms
from .measures import Measure
from .mmetric import HFunction, dm, dm_solve
from .space import MetricSpace, ball, neighborhood

LIP_TOL = 1e-6
MASS_TOL = 1e-9
# curves longer than this are certified from adjacent pairs (valid by the triangle inequality)
FULL_PAIRWISE_MAX = 12


class CurveError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Curve:
    times: np.ndarray
    states: tuple
    lip_cert: float
    label: str = ""

    @property
    def space(self) -> MetricSpace:
        return self.states[0].space

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def rectifiable(self) -> bool:
        return self.lip_cert <= 1 + LIP_TOL

    def __len__(self) -> int:
        return len(self.states)

    def masses(self) -> np.ndarray:
        return np.array([ms.total_mass(s) for s in self.states])

    def mass_constant(self, tol: float = MASS_TOL) -> bool:
        m = self.masses()
        return bool(np.ptp(m) <= tol)

    def support_drift_ok(self, slack: Optional[float] = None) -> bool:
        """``supp(states[j])`` lies within ``lip_cert*|t_i - t_j| + slack`` of ``supp(states[i])``.

        ``slack`` defaults to one grid spacing (zero on non-grid spaces).
        """
        if slack is None:
            slack = self.space.spacing or 0.0
        lip = max(self.lip_cert, 0.0)
        supports = [s.support for s in self.states]
        for i, j in itertools.permutations(range(len(self.states)), 2):
            if len(supports[i]) == 0:
                continue
            reach = lip * abs(self.times[i] - self.times[j]) + slack + 1e-12
            near = neighborhood(self.space, supports[i], reach)
            if not set(supports[j].tolist()) <= near:
                return False
        return True

    def reversed(self) -> "Curve":
        times = self.times[-1] - self.times[::-1]
        return replace(self, times=times, states=tuple(reversed(self.states)))

    def restricted(self, start: int, stop: int) -> "Curve":
        """Sub-curve on time indices ``start..stop`` (inclusive), re-based to time 0."""
        times = self.times[start:stop + 1] - self.times[start]
        return replace(self, times=times, states=tuple(self.states[start:stop + 1]))

    def densities(self) -> np.ndarray:
        return np.array([s.density for s in self.states])

    def translated(self, offset: Sequence[int]) -> "Curve":
        """Rigid lattice translate of the whole curve; ``d_M`` is translation invariant on grids."""
        states = tuple(_shift(s, offset) for s in self.states)
        return replace(self, states=states)


def validate_curve(states: Sequence[Measure], times, h: Optional[HFunction] = None,
                   pairwise: Optional[bool] = None, label: str = "") -> Curve:
    """Measure the Lipschitz constant of a discrete curve under ``d_M``.

    Parameters
    ----------
    states : sequence of Measure
        At least one state.
    times : array_like
        Strictly increasing times, one per state.
    h : HFunction, optional
        Mass penalty (default ``s = 2``).
    pairwise : bool, optional
        Evaluate every pair (exact discrete constant) instead of adjacent
        pairs only (an upper bound).  Defaults to pairwise for short curves.

    Raises
    ------
    CurveError
        If the certificate says rectifiable but the total mass varies by more
        than 1e-9, which only happens for inconsistent input.
    """
    states = tuple(states)
    times = np.asarray(times, dtype=float)
    if len(states) == 0:
        raise CurveError("a curve needs at least one state")
    if times.shape != (len(states),):
        raise CurveError("need one time per state")
    if np.any(np.diff(times) <= 0):
        raise CurveError("times must be strictly increasing")
    if pairwise is None:
        pairwise = len(states) <= FULL_PAIRWISE_MAX
    pairs = (itertools.combinations(range(len(states)), 2) if pairwise
             else ((i, i + 1) for i in range(len(states) - 1)))
    lip = 0.0
    for i, j in pairs:
        lip = max(lip, dm(states[i], states[j], h) / (times[j] - times[i]))
    curve = Curve(times, states, float(lip), label)
    if curve.rectifiable and not curve.mass_constant():
        raise CurveError(
            f"curve certified {lip:.6g}-Lipschitz but its mass varies by {np.ptp(curve.masses()):.3g}"
        )
    return curve


def constant_curve(eta: Measure, steps: int = 1, dt: float = 1.0) -> Curve:
    times = dt * np.arange(steps + 1)
    return Curve(times, tuple([eta] * (steps + 1)), 0.0, "constant")


def _shift(nu: Measure, offset) -> Measure:
    """Move the density of ``nu`` by a lattice vector; fails if mass would leave the grid."""
    supp = nu.support
    phi = np.zeros(nu.space.n)
    dest = nu.space.shift_indices(offset)[supp]
    if np.any(dest < 0):
        raise CurveError("shifted support exits the grid")
    phi[dest] = nu.density[supp]
    return ms.from_density(nu.space, phi)


def lattice_direction(space: MetricSpace, direction) -> np.ndarray:
    """Validate a shift direction: a nonzero integer lattice vector of the right length."""
    v = np.asarray(direction, dtype=float).reshape(-1)
    if v.shape != (space.dim,):
        raise CurveError(f"direction needs {space.dim} components")
    if not np.allclose(v, np.round(v), atol=1e-12) or not np.any(np.round(v) != 0):
        raise CurveError(
            "direction must be a nonzero integer lattice vector; only whole-cell "
            "shifts are measure preserving on a grid"
        )
    return np.round(v).astype(int)


def translation_curve(space: MetricSpace, phi, direction, steps: int,
                      h: Optional[HFunction] = None, validate: bool = False) -> Curve:
    """Rigid translation ``states[k] = phi(. - k v) mu`` along a lattice vector ``v``.

    Times advance by ``|v| * spacing`` per step.  The shift is a measure
    preserving bijection of the grid, so every pair of states is connected by
    a transport plan moving all mass exactly ``|t_i - t_j|``; this certifies
    ``lip_cert = 1`` without solving any metric problems.  With
    ``validate=True`` the constant is measured with :func:`validate_curve`
    instead.
    """
    space._require_grid()
    v = lattice_direction(space, direction)
    if steps < 0:
        raise CurveError("steps must be nonnegative")
    eta = phi if isinstance(phi, Measure) else ms.from_density(space, phi)
    states = [eta]
    for _ in range(steps):
        states.append(_shift(states[-1], v))
    dt = float(np.linalg.norm(v)) * space.spacing
    times = dt * np.arange(steps + 1)
    label = f"translate{tuple(int(x) for x in v)}"
    if validate:
        return validate_curve(states, times, h, label=label)
    lip = 0.0 if steps == 0 or eta.is_zero else 1.0
    return Curve(times, tuple(states), lip, label)


def dilation_curve(space: MetricSpace, center: int, r: float, steps: int,
                   h: Optional[HFunction] = None, lip_cert: Optional[float] = None) -> Curve:
    """Growing balls with mass held fixed.

    ``states[k]`` is ``c_k * mu`` on the closed ball of radius ``r + k*spacing``
    with ``c_k = mu(B_r) / mu(B_{r + k*spacing})``, the grid analogue of the
    factor ``(r/(r+t))**dim``; the total mass is therefore exactly constant.
    The Lipschitz constant is measured with :func:`validate_curve` unless a
    certificate is supplied (e.g. from a translated copy of the same curve).
    """
    space._require_grid()
    if r <= 0:
        raise CurveError("radius must be positive")
    if steps < 0:
        raise CurveError("steps must be nonnegative")
    delta = space.spacing
    lo = space.coords.min(axis=0)
    hi = space.coords.max(axis=0)
    c = space.coords[center]
    R = r + steps * delta
    if np.any(c - R < lo - 1e-12) or np.any(c + R > hi + 1e-12):
        raise CurveError("dilated ball exits the grid")
    base = None
    states = []
    for k in range(steps + 1):
        members = np.fromiter(closed_ball(space, center, r + k * delta), dtype=int)
        mass = space.weight[members].sum()
        base = mass if base is None else base
        phi = np.zeros(space.n)
        phi[members] = base / mass
        states.append(ms.from_density(space, phi))
    times = delta * np.arange(steps + 1)
    label = f"dilate(r={r:g})"
    if lip_cert is not None:
        return Curve(times, tuple(states), float(lip_cert), label)
    return validate_curve(states, times, h, label=label)


def closed_ball(space: MetricSpace, center: int, radius: float) -> frozenset:
    """Grid ball with a relative 1e-12 slack so radii that are multiples of the spacing keep their rim."""
    return ball(space, center, radius * (1 + 1e-12))


def subparametrized(curve: Curve) -> Curve:
    """Slow a curve down by its Lipschitz constant so it becomes 1-Lipschitz."""
    if curve.lip_cert <= 1:
        return curve
    return replace(curve, times=curve.times * curve.lip_cert, lip_cert=1.0)


def mixture_path(eta: Measure, nu: Measure, steps: int) -> list:
    """States ``(1 - k/steps) eta + (k/steps) nu``; not validated (rarely rectifiable)."""
    ms._same_space(eta, nu)
    if steps < 1:
        raise CurveError("mixture path needs at least one step")
    return [ms.mix(eta, nu, k / steps) for k in range(steps + 1)]


def _propagate(plan_src, plan_dst, plan_mass, comps, a, b):
    """Push component masses through one transport plan, pro rata at every source point."""
    n = len(a)
    out = []
    safe_a = np.where(a > 0, a, 1.0)
    matched_out = np.bincount(plan_src, weights=plan_mass, minlength=n)
    matched_in = np.bincount(plan_dst, weights=plan_mass, minlength=n)
    unmatched_in = np.clip(b - matched_in, 0.0, None)
    frac = [np.where(a > 0, c / safe_a, 0.0) for c in comps]
    leftover = np.array([np.dot(f, np.clip(a - matched_out, 0.0, None)) for f in frac])
    if leftover.sum() > 0:
        share = leftover / leftover.sum()
    else:
        tot = np.array([c.sum() for c in comps])
        share = tot / tot.sum() if tot.sum() > 0 else np.full(len(comps), 1.0 / len(comps))
    for f, sh in zip(frac, share):
        moved = np.bincount(plan_dst, weights=f[plan_src] * plan_mass, minlength=n)
        out.append(moved + sh * unmatched_in)
    # absorb round-off so the components sum to the next state exactly
    total = np.sum(out, axis=0)
    fix = b - total
    k = int(np.argmax([c.sum() for c in out])) if out else 0
    out[k] = np.clip(out[k] + fix, 0.0, None)
    return out


def decompose_curve(curve: Curve, at: int, parts: Sequence[Measure],
                    h: Optional[HFunction] = None) -> list:
    """Split a curve into component curves that sum to it state by state.

    ``parts`` must sum to ``curve.states[at]``.  Between adjacent times the
    optimal plan of :func:`~mms.mmetric.dm_solve` is used; each source
    point's mass is shared among the components in proportion to their mass
    there, and target mass the plan leaves unmatched is shared in proportion
    to the unmatched source mass.  The construction runs outward from ``at``
    in both time directions.  Component Lipschitz constants are measured,
    not assumed.
    """
    if not 0 <= at < len(curve):
        raise CurveError("time index out of range")
    parts = list(parts)
    if not parts:
        raise CurveError("need at least one part")
    space = curve.space
    w = space.weight
    state_mass = [s.mass_vector for s in curve.states]
    comp_mass = [[None] * len(parts) for _ in curve.states]
    total = np.sum([p.mass_vector for p in parts], axis=0)
    if np.max(np.abs(total - state_mass[at])) > 1e-9:
        raise CurveError("parts do not sum to the state at the split time")
    comp_mass[at] = [p.mass_vector.copy() for p in parts]
    for direction in (1, -1):
        i = at
        while 0 <= i + direction < len(curve):
            j = i + direction
            res = dm_solve(curve.states[i], curve.states[j], h)
            plan = res.plan
            comp_mass[j] = _propagate(plan.sources, plan.targets, plan.masses,
                                      comp_mass[i], state_mass[i], state_mass[j])
            i = j
    out = []
    for c in range(len(parts)):
        states = []
        for k in range(len(curve)):
            phi = comp_mass[k][c] / w
            if phi.max(initial=0.0) > 1 + 1e-9:
                raise CurveError("plan propagation violated domination")
            states.append(ms.from_density(space, np.clip(phi, 0.0, 1.0)))
        out.append(validate_curve(states, curve.times, h, label=f"{curve.label}[{c}]"))
    return out
