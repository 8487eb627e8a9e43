"""Finite metric measure spaces.

A :class:`MetricSpace` is a finite point set with a distance matrix and a
strictly positive weight per point (the reference measure ``mu``).  Grid
spaces carry Euclidean coordinates and place mass ``spacing**dim`` at every
grid node, which is the discretization used for all Euclidean comparisons.

Balls are closed: ``ball(space, c, r) = {j : dist[c, j] <= r}``.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

TRIANGLE_TOL = 1e-12
# above this size the triangle inequality is checked on random triples only
FULL_CHECK_MAX = 64


class SpaceError(ValueError):
    """Raised when a distance matrix or weight vector is not a valid space."""


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite metric measure space.

    Grid spaces keep only coordinates and compute distances on demand, so a
    64x64 grid does not materialize a 4096x4096 matrix unless ``dist`` is
    requested explicitly.
    """

    weight: np.ndarray
    matrix: Optional[np.ndarray] = None
    coords: Optional[np.ndarray] = None
    spacing: Optional[float] = None
    shape: Optional[tuple] = None

    @property
    def dist(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return self.distances(np.arange(self.n), np.arange(self.n))

    def distances(self, rows, cols) -> np.ndarray:
        """Distance block ``dist[rows][:, cols]``."""
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        if self.matrix is not None:
            return self.matrix[np.ix_(rows, cols)]
        if self.shape is not None:
            # integer lattice offsets keep grid distances exactly translation invariant
            lat = self.lattice
            diff = lat[rows][:, None, :] - lat[cols][None, :, :]
            return self.spacing * np.sqrt((diff**2).sum(axis=-1))
        diff = self.coords[rows][:, None, :] - self.coords[cols][None, :, :]
        return np.sqrt((diff**2).sum(axis=-1))

    @cached_property
    def lattice(self) -> np.ndarray:
        """Integer grid index of every point, shape ``(n, dim)``."""
        self._require_grid()
        return np.indices(self.shape).reshape(len(self.shape), -1).T

    @property
    def n(self) -> int:
        return len(self.weight)

    @property
    def dim(self) -> int:
        return 0 if self.shape is None else len(self.shape)

    @property
    def is_grid(self) -> bool:
        return self.shape is not None

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    def fingerprint(self) -> str:
        """Short content hash, used to key measure files to their space."""
        h = hashlib.sha256()
        if self.matrix is not None:
            h.update(np.ascontiguousarray(self.matrix, dtype=np.float64).tobytes())
        else:
            h.update(np.ascontiguousarray(self.coords, dtype=np.float64).tobytes())
        h.update(np.ascontiguousarray(self.weight, dtype=np.float64).tobytes())
        return h.hexdigest()[:16]

    def subspace(self, points: Iterable[int]) -> "MetricSpace":
        """Restrict to a point subset (the local-space construction)."""
        idx = np.array(sorted(set(int(i) for i in points)), dtype=int)
        if idx.size == 0:
            raise SpaceError("subspace needs at least one point")
        coords = None if self.coords is None else self.coords[idx]
        return MetricSpace(self.weight[idx].copy(), self.distances(idx, idx), coords)

    # grid helpers -------------------------------------------------------
    def index_of(self, multi_index: Sequence[int]) -> int:
        self._require_grid()
        return int(np.ravel_multi_index(tuple(multi_index), self.shape))

    def multi_index(self, i: int) -> tuple:
        self._require_grid()
        return tuple(int(k) for k in np.unravel_index(i, self.shape))

    @cached_property
    def _shift_cache(self) -> dict:
        return {}

    def shift_indices(self, offset: Sequence[int]) -> np.ndarray:
        """Index map ``i -> i + offset`` on the grid lattice, -1 where it leaves the grid."""
        self._require_grid()
        key = tuple(int(k) for k in offset)
        cached = self._shift_cache.get(key)
        if cached is not None:
            return cached
        grid = self.lattice + np.asarray(key, dtype=int)
        inside = np.all((grid >= 0) & (grid < np.asarray(self.shape)), axis=1)
        out = np.full(self.n, -1, dtype=int)
        out[inside] = np.ravel_multi_index(tuple(grid[inside].T), self.shape)
        out.setflags(write=False)
        self._shift_cache[key] = out
        return out

    def _require_grid(self):
        if not self.is_grid:
            raise SpaceError("operation needs a grid-built space")


def _check_triangle(dist: np.ndarray, rng: Optional[np.random.Generator] = None) -> None:
    n = len(dist)
    if n <= FULL_CHECK_MAX:
        # dist[i, j] <= dist[i, k] + dist[k, j] for all k, vectorized over (i, j)
        for k in range(n):
            excess = dist - (dist[:, [k]] + dist[[k], :])
            if excess.max() > TRIANGLE_TOL:
                i, j = np.unravel_index(int(excess.argmax()), excess.shape)
                raise SpaceError(
                    f"triangle inequality violated: d({i},{j})={dist[i, j]} > "
                    f"d({i},{k})+d({k},{j})={dist[i, k] + dist[k, j]}"
                )
        return
    rng = np.random.default_rng(0) if rng is None else rng
    m = 10 * n * n
    i, j, k = rng.integers(0, n, size=(3, m))
    excess = dist[i, j] - dist[i, k] - dist[k, j]
    if excess.max() > TRIANGLE_TOL:
        t = int(excess.argmax())
        raise SpaceError(f"triangle inequality violated on sampled triple ({i[t]},{j[t]},{k[t]})")


def validate(dist, weight) -> tuple[np.ndarray, np.ndarray]:
    dist = np.asarray(dist, dtype=float)
    weight = np.asarray(weight, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise SpaceError(f"distance matrix must be square, got shape {dist.shape}")
    if weight.shape != (dist.shape[0],):
        raise SpaceError("weight vector length must match the distance matrix")
    if dist.shape[0] == 0:
        raise SpaceError("empty space")
    if not np.all(np.isfinite(dist)) or not np.all(np.isfinite(weight)):
        raise SpaceError("non-finite entries")
    if np.any(weight <= 0):
        raise SpaceError("weights must be strictly positive")
    if np.any(np.diag(dist) != 0):
        raise SpaceError("distance matrix must have a zero diagonal")
    if not np.array_equal(dist, dist.T):
        raise SpaceError("distance matrix is asymmetric")
    off = ~np.eye(len(dist), dtype=bool)
    if np.any(dist[off] <= 0):
        raise SpaceError("distinct points must be at positive distance")
    _check_triangle(dist)
    return dist, weight


def new_from_matrix(dist, weight, coords=None) -> MetricSpace:
    """Build a space from a distance matrix and point weights.

    All metric invariants are checked eagerly; a :class:`SpaceError` names the
    first violation found.
    """
    dist, weight = validate(dist, weight)
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
        if coords.shape[0] != len(weight):
            raise SpaceError("coords must have one row per point")
    return MetricSpace(weight, dist, coords)


def new_grid(
    dim: int,
    extent: Sequence[int],
    spacing: float,
    weight_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    origin: Optional[Sequence[float]] = None,
) -> MetricSpace:
    """Regular grid in ``R**dim`` with Euclidean distances.

    Parameters
    ----------
    dim : int
        Dimension, 1 to 3.
    extent : sequence of int
        Points per axis, each at least 2.
    spacing : float
        Grid spacing ``delta``; node ``k`` on an axis sits at ``origin + k*delta``.
    weight_fn : callable, optional
        Density of a weighted Lebesgue measure, evaluated at the node
        coordinates (shape ``(n, dim)``).  Weights are ``weight_fn(x) * delta**dim``.
    origin : sequence of float, optional
        Coordinates of node ``(0, ..., 0)``; defaults to the origin.
    """
    if dim not in (1, 2, 3):
        raise SpaceError("grid dimension must be 1, 2 or 3")
    extent = tuple(int(e) for e in extent)
    if len(extent) != dim or any(e < 2 for e in extent):
        raise SpaceError("need one extent >= 2 per axis")
    if not spacing > 0:
        raise SpaceError("grid spacing must be positive")
    origin = np.zeros(dim) if origin is None else np.asarray(origin, dtype=float)
    idx = np.indices(extent).reshape(dim, -1).T
    coords = origin + spacing * idx
    cell = spacing**dim
    if weight_fn is None:
        weight = np.full(len(coords), cell)
    else:
        dens = np.asarray(weight_fn(coords), dtype=float).reshape(-1)
        if dens.shape != (len(coords),):
            dens = np.broadcast_to(dens, (len(coords),)).copy()
        if np.any(dens <= 0):
            raise SpaceError("weight function must be strictly positive on the grid")
        weight = dens * cell
    # grid distances are Euclidean by construction; no triangle scan needed
    return MetricSpace(weight, None, coords, float(spacing), extent)


def _as_members(space: MetricSpace, members) -> np.ndarray:
    idx = np.array(sorted(set(int(i) for i in members)), dtype=int)
    if idx.size and (idx[0] < 0 or idx[-1] >= space.n):
        raise SpaceError("point index out of range")
    return idx


def diameter(space: MetricSpace, members) -> float:
    """Largest pairwise distance within ``members``; 0 for a singleton."""
    idx = _as_members(space, members)
    if idx.size == 0:
        raise SpaceError("diameter of an empty set")
    return float(space.distances(idx, idx).max())


def ball(space: MetricSpace, center: int, radius: float) -> frozenset:
    """Closed ball ``{j : dist(center, j) <= radius}``."""
    if radius < 0:
        raise SpaceError("radius must be nonnegative")
    row = space.distances([center], np.arange(space.n))[0]
    return frozenset(np.flatnonzero(row <= radius).tolist())


def neighborhood(space: MetricSpace, members, radius: float) -> frozenset:
    """Closed ``radius``-neighbourhood of a point set."""
    idx = _as_members(space, members)
    if idx.size == 0:
        return frozenset()
    near = space.distances(idx, np.arange(space.n)).min(axis=0)
    return frozenset(np.flatnonzero(near <= radius).tolist())


def triangle_violations(dist) -> list[tuple[int, int, int]]:
    """All triples ``(i, j, k)`` with ``d(i,j) > d(i,k) + d(k,j)``; for diagnostics."""
    dist = np.asarray(dist, dtype=float)
    n = len(dist)
    return [
        (i, j, k)
        for i, j, k in itertools.product(range(n), repeat=3)
        if dist[i, j] > dist[i, k] + dist[k, j] + TRIANGLE_TOL
    ]
