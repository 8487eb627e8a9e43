"""The mass-transport metric ``d_M`` on dominated measures.

Two measures are ``(eps, delta)``-close when they split into paired pieces,
each pair supported on a set of diameter at most ``eps``, with the pieces'
mass mismatches summing to at most ``delta``.  ``d_M`` is the least ``eps``
that works with ``delta = h(eps)``.

On a finite space a decomposition refines into atom pairs within ``eps``
plus unpaired atoms, so ``(eps, delta)``-closeness holds exactly when a
transport plan restricted to pairs at distance ``<= eps`` moves at least
``(||nu|| + ||eta|| - delta) / 2`` mass.  :func:`dm` solves that with
max-flow over the finitely many distance thresholds; :func:`dm_bruteforce`
works from the decomposition definition directly (clique enumeration plus
an LP) and serves as the independent oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .flow import FlowNetwork
from .measures import Measure, MeasureError, _same_space, total_mass
from .space import neighborhood

# masses below this (relative to the problem scale) count as zero
MASS_TOL = 1e-12


@dataclass(frozen=True)
class HFunction:
    """Mass penalty ``h(eps) = eps**s`` with ``s > 1``."""

    s: float = 2.0

    def __post_init__(self):
        if not self.s > 1:
            raise ValueError("h exponent must exceed 1")

    def __call__(self, eps):
        return np.power(eps, self.s) if isinstance(eps, np.ndarray) else float(eps) ** self.s

    def inverse(self, m: float) -> float:
        return 0.0 if m <= 0 else float(m) ** (1.0 / self.s)

    def check_conditions(self, samples: int = 200, seed: int = 0) -> bool:
        """Numerically confirm ``h(0)=0``, ``h(e)/e -> 0``, superadditivity and growth."""
        rng = np.random.default_rng(seed)
        e1, e2 = rng.uniform(0, 10, size=(2, samples))
        superadd = np.all(self(e1) + self(e2) <= self(e1 + e2) * (1 + 1e-12))
        # h(e)/e = e**(s-1) decreases strictly toward 0 for any s > 1
        small = 10.0 ** -np.arange(1, 13)
        ratio = self(small) / small
        vanishing = np.all(np.diff(ratio) < 0) and ratio[-1] < 0.5 * ratio[0]
        growth = self(1e6) > 1e6
        return bool(self(0.0) == 0 and superadd and vanishing and growth)


@dataclass(frozen=True)
class TransportPlan:
    """Sparse plan: ``masses[k]`` moves from ``sources[k]`` to ``targets[k]``."""

    sources: np.ndarray
    targets: np.ndarray
    masses: np.ndarray

    @classmethod
    def empty(cls) -> "TransportPlan":
        return cls(np.zeros(0, int), np.zeros(0, int), np.zeros(0))

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(m)) for i, j, m in zip(self.sources, self.targets, self.masses)]

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def row_sums(self, n: int) -> np.ndarray:
        return np.bincount(self.sources, weights=self.masses, minlength=n)

    def col_sums(self, n: int) -> np.ndarray:
        return np.bincount(self.targets, weights=self.masses, minlength=n)

    def transposed(self) -> "TransportPlan":
        return TransportPlan(self.targets, self.sources, self.masses)

    def max_distance(self, space) -> float:
        if len(self.masses) == 0:
            return 0.0
        d = space.distances(self.sources, self.targets)
        return float(np.diag(d).max()) if d.ndim == 2 else float(d.max())


@dataclass(frozen=True)
class Decomposition:
    pieces: list = field(default_factory=list)

    def mismatch(self) -> float:
        return float(sum(abs(total_mass(a) - total_mass(b)) for a, b in self.pieces))


@dataclass(frozen=True)
class DMResult:
    epsilon: float
    matched_mass: float
    plan: TransportPlan
    deficit: float

    def as_dict(self, with_plan: bool = False) -> dict:
        out = {"epsilon": self.epsilon, "matched_mass": self.matched_mass}
        if with_plan:
            out["plan"] = [list(e) for e in self.plan.entries]
        return out


def _matched_on(a, b, S, T, D, eps, tol):
    """Max-flow between point masses ``a[S]`` and ``b[T]`` over pairs with ``D <= eps``."""
    ns, nt = len(S), len(T)
    src, snk = ns + nt, ns + nt + 1
    net = FlowNetwork(ns + nt + 2, tol=tol)
    for p in range(ns):
        net.add_edge(src, p, a[S[p]])
    pair_edges = []
    for p in range(ns):
        for q in np.flatnonzero(D[p] <= eps):
            pair_edges.append((p, int(q), net.add_edge(p, ns + int(q), math.inf)))
    for q in range(nt):
        net.add_edge(ns + q, snk, b[T[q]])
    total = net.max_flow(src, snk)
    rows, cols, vals = [], [], []
    for p, q, e in pair_edges:
        f = net.flow_on(e)
        if f > tol:
            rows.append(S[p])
            cols.append(T[q])
            vals.append(f)
    plan = TransportPlan(np.array(rows, int), np.array(cols, int), np.array(vals, float))
    return total, plan


def _problem(nu: Measure, eta: Measure):
    _same_space(nu, eta)
    a, b = nu.mass_vector, eta.mass_vector
    S, T = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    D = nu.space.distances(S, T)
    scale = max(1.0, float(a.sum() + b.sum()))
    return a, b, S, T, D, scale


def max_matched_mass(nu: Measure, eta: Measure, eps: float) -> tuple[float, TransportPlan]:
    """Largest mass a plan can move using only pairs at distance ``<= eps``.

    Returns the mass and a plan attaining it; the plan's row and column sums
    are dominated by the point masses of ``nu`` and ``eta``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    a, b, S, T, D, scale = _problem(nu, eta)
    if len(S) == 0 or len(T) == 0:
        return 0.0, TransportPlan.empty()
    return _matched_on(a, b, S, T, D, eps, MASS_TOL * scale)


def gamma_feasible(nu: Measure, eta: Measure, eps: float, delta: float) -> bool:
    """Whether ``nu`` and ``eta`` admit an ``(eps, delta)`` decomposition."""
    if eps < 0 or delta < 0:
        raise ValueError("eps and delta must be nonnegative")
    mass, _ = max_matched_mass(nu, eta, eps)
    need = (total_mass(nu) + total_mass(eta) - delta) / 2
    scale = max(1.0, total_mass(nu) + total_mass(eta))
    return mass >= need - MASS_TOL * scale


def dm_solve(nu: Measure, eta: Measure, h: Optional[HFunction] = None) -> DMResult:
    """Exact ``d_M(nu, eta)`` with the matched mass and plan at the optimum.

    The matched mass is a step function of ``eps`` that only changes at the
    distances between the two supports.  On each step ``[d_k, d_k+1)`` the
    unmatched mass ``M_k`` is constant and the feasible ``eps`` are those with
    ``h(eps) >= M_k``.  Feasibility is monotone in ``eps``, so the first step
    containing a feasible point is located by bisection over the step index
    and the answer is ``max(d_k, h^{-1}(M_k))``.
    """
    h = HFunction() if h is None else h
    _same_space(nu, eta)
    if eta.density.tobytes() < nu.density.tobytes():
        # solve one canonical orientation so that dm is symmetric to the last bit
        res = dm_solve(eta, nu, h)
        return DMResult(res.epsilon, res.matched_mass, res.plan.transposed(), res.deficit)
    a, b, S, T, D, scale = _problem(nu, eta)
    tol = MASS_TOL * scale
    total = float(a[S].sum() + b[T].sum())
    if len(S) == 0 or len(T) == 0:
        # nothing can be paired; every unit of mass is a mismatch
        return DMResult(h.inverse(total if total > tol else 0.0), 0.0, TransportPlan.empty(), total)
    thresholds = np.unique(np.concatenate([[0.0], D.ravel()]))
    cache = {}

    def step(k):
        if k not in cache:
            mass, plan = _matched_on(a, b, S, T, D, thresholds[k], tol)
            deficit = total - 2 * mass
            if deficit <= tol:
                deficit = 0.0
            cache[k] = (mass, plan, deficit)
        return cache[k]

    def valid(k):
        if k == len(thresholds) - 1:
            return True
        return h.inverse(step(k)[2]) < thresholds[k + 1]

    lo, hi = 0, len(thresholds) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if valid(mid):
            hi = mid
        else:
            lo = mid + 1
    mass, plan, deficit = step(lo)
    eps = max(float(thresholds[lo]), h.inverse(deficit))
    return DMResult(eps, float(mass), plan, float(deficit))


def dm(nu: Measure, eta: Measure, h: Optional[HFunction] = None) -> float:
    """``d_M(nu, eta)``; see :func:`dm_solve`."""
    return dm_solve(nu, eta, h).epsilon


class InstanceTooLarge(ValueError):
    pass


def min_mismatch_bruteforce(nu: Measure, eta: Measure, eps: float) -> float:
    """Least total mass mismatch over decompositions whose pieces have diameter ``<= eps``.

    Every piece lives on a clique of the ``dist <= eps`` graph and pieces on
    a common clique can be merged without increasing the mismatch, so one
    piece per maximal clique suffices.  The masses of each point are split
    across cliques by a small LP.
    """
    a, b = nu.mass_vector, eta.mass_vector
    pts = [int(i) for i in np.flatnonzero((a > 0) | (b > 0))]
    if not pts:
        return 0.0
    dist = nu.space.distances(pts, pts)
    m = len(pts)
    cliques = []
    for r in range(m, 0, -1):
        for combo in itertools.combinations(range(m), r):
            if any(set(combo) <= c for c in cliques):
                continue
            if all(dist[i, j] <= eps for i, j in itertools.combinations(combo, 2)):
                cliques.append(set(combo))
    # variables: x[c, i] (nu mass of point i in clique c), y[c, j], then one t[c] per clique
    xs = [(c, i) for c, cl in enumerate(cliques) for i in sorted(cl) if a[pts[i]] > 0]
    ys = [(c, j) for c, cl in enumerate(cliques) for j in sorted(cl) if b[pts[j]] > 0]
    nx, ny, nc = len(xs), len(ys), len(cliques)
    nvar = nx + ny + nc
    cost = np.zeros(nvar)
    cost[nx + ny:] = 1.0
    A_eq, b_eq = [], []
    for i in range(m):
        if a[pts[i]] > 0:
            row = np.zeros(nvar)
            for k, (c, ii) in enumerate(xs):
                if ii == i:
                    row[k] = 1.0
            A_eq.append(row)
            b_eq.append(a[pts[i]])
        if b[pts[i]] > 0:
            row = np.zeros(nvar)
            for k, (c, jj) in enumerate(ys):
                if jj == i:
                    row[nx + k] = 1.0
            A_eq.append(row)
            b_eq.append(b[pts[i]])
    A_ub, b_ub = [], []
    for c in range(nc):
        diff = np.zeros(nvar)
        for k, (cc, _) in enumerate(xs):
            if cc == c:
                diff[k] = 1.0
        for k, (cc, _) in enumerate(ys):
            if cc == c:
                diff[nx + k] = -1.0
        for sign in (1.0, -1.0):
            row = sign * diff
            row[nx + ny + c] = -1.0
            A_ub.append(row)
            b_ub.append(0.0)
    res = linprog(cost, A_ub=np.array(A_ub), b_ub=np.array(b_ub), A_eq=np.array(A_eq),
                  b_eq=np.array(b_eq), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"oracle LP failed: {res.message}")
    return float(res.fun)


def dm_bruteforce(nu: Measure, eta: Measure, h: Optional[HFunction] = None, max_atoms: int = 6) -> float:
    """``d_M`` straight from the decomposition definition, for tiny instances.

    For every pairwise distance ``d_k`` among the joint support the least
    achievable mismatch ``delta_k`` is computed by :func:`min_mismatch_bruteforce`;
    it is constant on ``[d_k, d_k+1)``.  The result is the smallest ``eps``
    in any such interval with ``h(eps) >= delta_k``.
    """
    h = HFunction() if h is None else h
    _same_space(nu, eta)
    joint = np.flatnonzero((nu.density > 0) | (eta.density > 0))
    if len(joint) > max_atoms:
        raise InstanceTooLarge(f"{len(joint)} support points exceed max_atoms={max_atoms}")
    scale = max(1.0, total_mass(nu) + total_mass(eta))
    if len(joint) == 0:
        return 0.0
    d = nu.space.distances(joint, joint)
    levels = sorted(set(d.ravel().tolist()))
    best = math.inf
    for k, lvl in enumerate(levels):
        delta = min_mismatch_bruteforce(nu, eta, lvl)
        if delta <= MASS_TOL * scale:
            delta = 0.0
        cand = max(lvl, h.inverse(delta))
        upper = levels[k + 1] if k + 1 < len(levels) else math.inf
        if cand < upper:
            best = min(best, cand)
    return best


def mass_bounds_check(nu: Measure, eta: Measure, h: Optional[HFunction] = None) -> tuple[bool, bool]:
    """Check the mass and support consequences of ``d_M(nu, eta) <= delta``.

    With ``delta = d_M(nu, eta) + 1e-9`` returns whether
    ``| ||nu|| - ||eta|| | <= h(delta)`` and whether the ``eta``-mass outside
    the closed ``delta``-neighbourhood of ``supp(nu)`` is at most ``h(delta)``.
    """
    h = HFunction() if h is None else h
    delta = dm(nu, eta, h) + 1e-9
    bound = h(delta) + MASS_TOL
    mass_ok = abs(total_mass(nu) - total_mass(eta)) <= bound
    near = np.fromiter(neighborhood(nu.space, nu.support, delta), dtype=int)
    outside = eta.mass_vector.copy()
    outside[near] = 0.0
    return bool(mass_ok), bool(outside.sum() <= bound)


def w1(nu: Measure, eta: Measure, normalize: bool = False) -> float:
    """Wasserstein-1 distance with ground cost ``dist``.

    The masses must agree (within 1e-9) unless ``normalize`` is set, in which
    case both measures are scaled to probability measures first.
    """
    _same_space(nu, eta)
    a, b = nu.mass_vector, eta.mass_vector
    if normalize:
        ma, mb = a.sum(), b.sum()
        if ma <= 0 or mb <= 0:
            raise MeasureError("cannot normalize the zero measure")
        a, b = a / ma, b / mb
    elif abs(a.sum() - b.sum()) > 1e-9:
        raise MeasureError(f"W1 needs equal masses, got {a.sum()} and {b.sum()}")
    S, T = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    if len(S) == 0:
        return 0.0
    C = nu.space.distances(S, T)
    ns, nt = len(S), len(T)
    A_eq = np.zeros((ns + nt, ns * nt))
    for p in range(ns):
        A_eq[p, p * nt:(p + 1) * nt] = 1.0
    for q in range(nt):
        A_eq[ns + q, q::nt] = 1.0
    b_eq = np.concatenate([a[S], b[T] * (a[S].sum() / b[T].sum())])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)
