"""Measures dominated by the reference measure of a finite space.

A :class:`Measure` is stored as its density ``phi`` with respect to the
space weights, so ``nu = phi * mu`` with ``0 <= phi <= 1``.  The zero
measure is representable; operations that need a nonzero measure raise
:class:`ZeroMeasureError`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import MetricSpace

DENSITY_TOL = 1e-12


class MeasureError(ValueError):
    pass


class ZeroMeasureError(MeasureError):
    pass


@dataclass(frozen=True, eq=False)
class Measure:
    space: MetricSpace
    density: np.ndarray

    @property
    def mass_vector(self) -> np.ndarray:
        """Point masses ``phi[i] * weight[i]``."""
        return self.density * self.space.weight

    @property
    def total_mass(self) -> float:
        return total_mass(self)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.density > 0)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.density > 0)

    def __add__(self, other: "Measure") -> "Measure":
        return add_checked(self, other)

    def __repr__(self) -> str:
        return f"Measure(n={self.space.n}, mass={self.total_mass:.6g}, support={len(self.support)})"


def from_density(space: MetricSpace, phi, tol: float = DENSITY_TOL) -> Measure:
    """Wrap a density vector, clamping round-off within ``tol`` of ``[0, 1]``."""
    phi = np.array(phi, dtype=float).reshape(-1)
    if phi.shape != (space.n,):
        raise MeasureError(f"density needs {space.n} entries, got {phi.size}")
    if not np.all(np.isfinite(phi)):
        raise MeasureError("density has non-finite entries")
    if phi.min() < -tol or phi.max() > 1 + tol:
        raise MeasureError(
            f"density outside [0, 1] (min {phi.min():.3g}, max {phi.max():.3g}); "
            "the measure is not dominated by mu"
        )
    np.clip(phi, 0.0, 1.0, out=phi)
    phi.setflags(write=False)
    return Measure(space, phi)


def zero(space: MetricSpace) -> Measure:
    return from_density(space, np.zeros(space.n))


def full(space: MetricSpace) -> Measure:
    """The reference measure ``mu`` itself (density 1 everywhere)."""
    return from_density(space, np.ones(space.n))


def indicator(space: MetricSpace, members, value: float = 1.0) -> Measure:
    """``value * mu`` restricted to ``members``."""
    phi = np.zeros(space.n)
    phi[np.fromiter(members, dtype=int)] = value
    return from_density(space, phi)


def point_mass(space: MetricSpace, i: int, mass: float) -> Measure:
    """Measure concentrated on point ``i`` with the given total mass."""
    phi = np.zeros(space.n)
    phi[i] = mass / space.weight[i]
    return from_density(space, phi)


def total_mass(nu: Measure) -> float:
    return float(np.dot(nu.density, nu.space.weight))


def _same_space(a: Measure, b: Measure) -> None:
    if a.space is not b.space and a.space.fingerprint() != b.space.fingerprint():
        raise MeasureError("measures live on different spaces")


def meet(a: Measure, b: Measure) -> Measure:
    _same_space(a, b)
    return from_density(a.space, np.minimum(a.density, b.density))


def join(a: Measure, b: Measure) -> Measure:
    _same_space(a, b)
    return from_density(a.space, np.maximum(a.density, b.density))


def restrict(nu: Measure, members) -> Measure:
    """Zero the density outside ``members``."""
    phi = np.zeros(nu.space.n)
    idx = np.fromiter(members, dtype=int)
    phi[idx] = nu.density[idx]
    return from_density(nu.space, phi)


def scale(nu: Measure, t: float) -> Measure:
    if not 0 <= t <= 1:
        raise MeasureError("scale factor must lie in [0, 1]")
    return from_density(nu.space, t * nu.density)


def add_checked(a: Measure, b: Measure) -> Measure:
    """Sum of two measures; fails if the result is no longer dominated by mu."""
    _same_space(a, b)
    phi = a.density + b.density
    if phi.max() > 1 + DENSITY_TOL:
        raise MeasureError("sum exceeds the reference measure")
    return from_density(a.space, phi)


def subtract(a: Measure, b: Measure, tol: float = 1e-9) -> Measure:
    """``a - b`` for ``b <= a`` (up to ``tol``)."""
    _same_space(a, b)
    phi = a.density - b.density
    if phi.min() < -tol:
        raise MeasureError("difference is not a nonnegative measure")
    return from_density(a.space, np.clip(phi, 0.0, 1.0))


def mix(a: Measure, b: Measure, t: float) -> Measure:
    """Convex combination ``(1 - t) a + t b``."""
    _same_space(a, b)
    return from_density(a.space, (1 - t) * a.density + t * b.density)


def equal(a: Measure, b: Measure, tol: float = DENSITY_TOL) -> bool:
    _same_space(a, b)
    return bool(np.max(np.abs(a.density - b.density), initial=0.0) <= tol)


def normalized_masses(nu: Measure) -> np.ndarray:
    """Point masses of ``nu / ||nu||`` (a probability vector)."""
    m = total_mass(nu)
    if m <= 0:
        raise ZeroMeasureError("cannot normalize the zero measure")
    return nu.mass_vector / m
