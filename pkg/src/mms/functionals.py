"""Functionals on nonzero measures and their L^p norms.

The mean-value functional of a point function ``f`` is
``F_f(eta) = (1/||eta||) * sum f * eta``.  The L^p norm of a functional is a
supremum over families of measures with pairwise disjoint supports of
``(sum |F(eta_i)|**p * ||eta_i||)**(1/p)``.  On a finite space that
supremum is enumerated over full-density partitions of the points
(:func:`lp_norm_functional_bruteforce`) or searched heuristically on larger
spaces (:func:`lp_norm_functional_search`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from . import measures as ms
from .measures import Measure, ZeroMeasureError
from .space import MetricSpace


@dataclass(frozen=True, eq=False)
class PointFunction:
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("point function values must be finite")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


class MeasureFunctional:
    """A real function on nonzero measures.

    Either induced by a :class:`PointFunction` (the mean value) or given by an
    arbitrary callback.  Arithmetic (``+``, ``*``, scalar multiples, ``abs``)
    and lattice operations produce tabulated functionals; sums and scalar
    multiples of induced functionals stay induced.
    """

    def __init__(self, fn: Optional[Callable[[Measure], float]] = None,
                 point: Optional[PointFunction] = None, name: str = ""):
        if (fn is None) == (point is None):
            raise ValueError("give exactly one of a callback or a point function")
        self._fn = fn
        self.point = point
        self.name = name

    @classmethod
    def induced(cls, f, name: str = "") -> "MeasureFunctional":
        f = f if isinstance(f, PointFunction) else PointFunction(f)
        return cls(point=f, name=name or "F_f")

    @classmethod
    def tabulated(cls, fn: Callable[[Measure], float], name: str = "") -> "MeasureFunctional":
        return cls(fn=fn, name=name or "F")

    @property
    def is_induced(self) -> bool:
        return self.point is not None

    def __call__(self, eta: Measure) -> float:
        return evaluate(self, eta)

    def __add__(self, other: "MeasureFunctional") -> "MeasureFunctional":
        if self.is_induced and other.is_induced:
            return MeasureFunctional.induced(self.point.values + other.point.values)
        return MeasureFunctional.tabulated(lambda e: self(e) + other(e), f"({self.name}+{other.name})")

    def __mul__(self, other) -> "MeasureFunctional":
        if isinstance(other, MeasureFunctional):
            return MeasureFunctional.tabulated(lambda e: self(e) * other(e), f"({self.name}*{other.name})")
        a = float(other)
        if self.is_induced:
            return MeasureFunctional.induced(a * self.point.values)
        return MeasureFunctional.tabulated(lambda e: a * self(e), f"{a:g}*{self.name}")

    __rmul__ = __mul__

    def __abs__(self) -> "MeasureFunctional":
        return MeasureFunctional.tabulated(lambda e: abs(self(e)), f"|{self.name}|")

    def __repr__(self) -> str:
        kind = "induced" if self.is_induced else "tabulated"
        return f"MeasureFunctional({kind}, {self.name!r})"


def fmax(F: MeasureFunctional, G: MeasureFunctional) -> MeasureFunctional:
    return MeasureFunctional.tabulated(lambda e: max(F(e), G(e)), f"({F.name}v{G.name})")


def fmin(F: MeasureFunctional, G: MeasureFunctional) -> MeasureFunctional:
    return MeasureFunctional.tabulated(lambda e: min(F(e), G(e)), f"({F.name}^{G.name})")


def constant(c: float) -> MeasureFunctional:
    return MeasureFunctional.tabulated(lambda e: float(c), f"{c:g}")


def evaluate(F: MeasureFunctional, eta: Measure) -> float:
    """Value of ``F`` at a nonzero measure."""
    mass = ms.total_mass(eta)
    if mass <= 0:
        raise ZeroMeasureError("functionals are only defined on nonzero measures")
    if F.is_induced:
        return float(np.dot(F.point.values, eta.mass_vector) / mass)
    return float(F._fn(eta))


def induced_values(f: PointFunction, masses: np.ndarray) -> np.ndarray:
    """Mean values of ``f`` under many measures at once (rows of ``masses``)."""
    masses = np.atleast_2d(masses)
    return masses @ f.values / masses.sum(axis=1)


def lp_norm_point(f, p: float, weight: np.ndarray) -> float:
    """``(sum |f|**p * weight)**(1/p)``."""
    if p < 1:
        raise ValueError("p must be at least 1")
    vals = f.values if isinstance(f, PointFunction) else np.asarray(f, dtype=float)
    return float(np.sum(np.abs(vals) ** p * weight) ** (1.0 / p))


def set_partitions(items: list) -> Iterator[list]:
    """All partitions of ``items`` into nonempty blocks (restricted growth order)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def family_value(F: MeasureFunctional, family, p: float) -> float:
    """``(sum |F(eta_i)|**p ||eta_i||)**(1/p)`` for a disjoint family of measures."""
    acc = 0.0
    for eta in family:
        acc += abs(F(eta)) ** p * ms.total_mass(eta)
    return acc ** (1.0 / p)


def _partition_value(F, space, blocks, p):
    return family_value(F, (ms.indicator(space, b) for b in blocks), p)


@dataclass(frozen=True)
class NormResult:
    norm: float
    partition: list
    # sampled sub-density families that beat the best partition (should stay empty)
    violations: int = 0

    def as_dict(self) -> dict:
        return {"norm": self.norm, "partition": self.partition, "violations": self.violations}


def lp_norm_functional_bruteforce(F: MeasureFunctional, p: float, space: MetricSpace,
                                  max_points: int = 6, sub_density_samples: int = 0,
                                  seed: int = 0, detail: bool = False):
    """Exact L^p norm over families of full-density blocks.

    Adding a block to a family never lowers the sum, so partitions of the
    whole point set dominate partitions of subsets and only those are
    enumerated.  For tabulated functionals the restriction to full-density
    blocks is an assumption; ``sub_density_samples`` random families with
    fractional densities are also scored and any that beat the best
    partition are counted in ``violations``.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if space.n > max_points:
        raise ValueError(f"space has {space.n} points, brute force limited to {max_points}")
    best, best_part = -1.0, None
    for part in set_partitions(list(range(space.n))):
        val = _partition_value(F, space, part, p)
        if val > best:
            best, best_part = val, part
    violations = 0
    rng = np.random.default_rng(seed)
    for _ in range(sub_density_samples):
        labels = rng.integers(0, space.n, size=space.n)
        dens = rng.uniform(0, 1, size=space.n)
        family = []
        for lab in np.unique(labels):
            phi = np.where(labels == lab, dens, 0.0)
            if phi.max() > 0:
                family.append(ms.from_density(space, phi))
        if family_value(F, family, p) > best * (1 + 1e-9) + 1e-12:
            violations += 1
    res = NormResult(float(best), [sorted(b) for b in best_part], violations)
    return res if detail else res.norm


def _random_hierarchical(rng, points, coords, max_depth):
    """Recursively bisect a point set along random coordinate cuts (or random halves)."""
    if len(points) <= 1 or max_depth == 0 or rng.random() < 0.15:
        return [points]
    if coords is not None:
        axis = rng.integers(coords.shape[1])
        vals = coords[points, axis]
        cut = rng.uniform(vals.min(), vals.max())
        left = [q for q, v in zip(points, vals) if v <= cut]
        right = [q for q, v in zip(points, vals) if v > cut]
    else:
        perm = rng.permutation(points)
        k = rng.integers(1, len(points))
        left, right = sorted(perm[:k].tolist()), sorted(perm[k:].tolist())
    if not left or not right:
        return [points]
    return (_random_hierarchical(rng, left, coords, max_depth - 1)
            + _random_hierarchical(rng, right, coords, max_depth - 1))


def _block_term(F, space, block, p):
    eta = ms.indicator(space, block)
    return abs(F(eta)) ** p * ms.total_mass(eta)


def _greedy_merge(F, space, blocks, p):
    """Merge block pairs while that raises the sum; the value is additive over blocks."""
    blocks = [list(b) for b in blocks]
    terms = [_block_term(F, space, b, p) for b in blocks]
    improved = True
    while improved and len(blocks) > 1:
        improved = False
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                merged = blocks[i] + blocks[j]
                t = _block_term(F, space, merged, p)
                if t > (terms[i] + terms[j]) * (1 + 1e-12):
                    blocks = blocks[:i] + blocks[i + 1:j] + blocks[j + 1:] + [merged]
                    terms = terms[:i] + terms[i + 1:j] + terms[j + 1:] + [t]
                    improved = True
                    break
            if improved:
                break
    return blocks, sum(terms) ** (1.0 / p)


def lp_norm_functional_search(F: MeasureFunctional, p: float, space: MetricSpace, budget: int = 32,
                              seed: int = 0, detail: bool = False, merge: bool = True):
    """Lower bound on the L^p norm by searching partitions.

    Candidates are the all-singletons and single-block partitions followed
    by ``budget`` random hierarchical partitions (coordinate cuts when the
    space has coordinates).  The best candidate is then improved by greedy
    pairwise block merges.  The result never exceeds the true norm and is
    nondecreasing in ``budget`` for a fixed seed.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    pts = list(range(space.n))
    rng = np.random.default_rng(seed)
    cands = [[[q] for q in pts], [pts]]
    depth = int(np.ceil(np.log2(max(space.n, 2)))) + 2
    for _ in range(budget):
        cands.append(_random_hierarchical(rng, pts, space.coords, depth))
    best, best_part = -1.0, None
    for blocks in cands:
        v = _partition_value(F, space, blocks, p)
        if v > best:
            best, best_part = v, blocks
    if merge and space.n <= 64:
        merged, value = _greedy_merge(F, space, best_part, p)
        if value > best:
            best, best_part = value, merged
    res = NormResult(float(best), [sorted(b) for b in best_part])
    return res if detail else res.norm


def representability_check(F: MeasureFunctional, space: MetricSpace, tol: float = 1e-9,
                           samples: int = 20, seed: int = 0) -> Optional[PointFunction]:
    """Recover ``f`` with ``F = F_f`` if ``G(eta) = ||eta|| F(eta)`` is additive and 1-homogeneous.

    The candidate is ``f(x) = G(mu at x) / mu({x})``.  It is accepted when
    ``G(t eta) = t G(eta)`` holds for sampled ``t`` and random ``eta``, and
    ``G(sum eta_i) = sum G(eta_i)`` holds over random splits of random
    measures, all within ``tol`` (relative to the magnitude of ``G``).
    Returns ``None`` otherwise.
    """
    def G(eta):
        m = ms.total_mass(eta)
        return 0.0 if m <= 0 else m * F(eta)

    f = np.array([G(ms.indicator(space, [x])) / space.weight[x] for x in range(space.n)])
    rng = np.random.default_rng(seed)
    scale_ref = max(1.0, float(np.abs(f).max() * space.total_weight))
    for _ in range(samples):
        eta = ms.from_density(space, rng.uniform(0, 1, size=space.n))
        t = rng.uniform(0, 1)
        if abs(G(ms.scale(eta, t)) - t * G(eta)) > tol * scale_ref:
            return None
        k = int(rng.integers(2, 5))
        cuts = rng.dirichlet(np.ones(k), size=space.n).T
        pieces = [ms.from_density(space, eta.density * c) for c in cuts]
        if abs(G(eta) - sum(G(x) for x in pieces)) > tol * scale_ref:
            return None
        # atoms must add up to the whole as well
        if abs(G(eta) - float(np.dot(f, eta.mass_vector))) > tol * scale_ref:
            return None
    return PointFunction(f)


def local_restriction(space: MetricSpace, points) -> MetricSpace:
    """Local L^p norms: restrict the space to a point subset and reuse every operation."""
    return space.subspace(points)
