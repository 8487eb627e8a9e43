"""Randomized invariant suites behind ``mms verify``.

Every instance draws from its own generator seeded by ``(seed, suite,
index)``, so a report depends only on the seed and the instance count,
never on how many worker processes ran it.  Reports carry no timings and
serialize with sorted keys; two runs with the same arguments produce the
same bytes.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import shortest_path

from . import measures as ms
from .curves import translation_curve
from .functionals import (MeasureFunctional, PointFunction, fmax, fmin,
                          lp_norm_functional_bruteforce, lp_norm_functional_search,
                          lp_norm_point, representability_check)
from .gradients import EnsembleFactory, fundamental_inequality_report, upper_gradient_profile
from .mmetric import HFunction, dm, dm_bruteforce, mass_bounds_check
from .space import MetricSpace, new_from_matrix, new_grid, triangle_violations

log = logging.getLogger(__name__)

SUITES = ("metric", "norms", "gradients")
_SUITE_ID = {name: k for k, name in enumerate(SUITES)}


class EmptySuiteError(ValueError):
    pass


def instance_rng(seed: int, suite: str, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, _SUITE_ID[suite], index]))


def random_space(rng, n: int) -> MetricSpace:
    """Shortest-path metric of a random complete graph (integer lengths, many ties)
    or a Euclidean point cloud, with half-integer point weights."""
    weight = rng.integers(1, 5, size=n) / 2.0
    if rng.random() < 0.5:
        w = rng.integers(1, 6, size=(n, n)).astype(float)
        w = np.triu(w, 1)
        d = shortest_path(w + w.T, directed=False)
    else:
        cells = rng.choice(100, size=n, replace=False)
        pts = 0.3 * np.stack([cells // 10, cells % 10], axis=1)
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return new_from_matrix(d, weight)


def random_measure(rng, space: MetricSpace, quarters: bool = True) -> ms.Measure:
    if quarters:
        phi = rng.integers(0, 5, size=space.n) / 4.0
    else:
        phi = rng.uniform(0, 1, size=space.n) * (rng.random(space.n) < 0.8)
    return ms.from_density(space, phi)


@dataclass
class CheckTally:
    instances: int = 0
    failures: int = 0
    worst: float = 0.0          # largest violation margin seen (0 when all hold)
    first_failure: Optional[int] = None

    def add(self, ok: bool, margin: float, index: int) -> None:
        self.instances += 1
        if not ok:
            self.failures += 1
            if self.first_failure is None:
                self.first_failure = index
        self.worst = max(self.worst, float(margin))

    def as_dict(self) -> dict:
        return {"instances": self.instances, "failures": self.failures,
                "worst_violation": float(f"{self.worst:.6e}"),
                "first_failure": self.first_failure}


def _leq(a: float, b: float, tol: float) -> tuple[bool, float]:
    return a <= b + tol, max(0.0, a - b)


def _close(a: float, b: float, tol: float) -> tuple[bool, float]:
    return abs(a - b) <= tol, abs(a - b)


def metric_instance(seed: int, index: int, injected=None) -> dict:
    rng = instance_rng(seed, "metric", index)
    h = HFunction(2.0)
    out = {}
    small = random_space(rng, int(rng.integers(1, 6)))
    nu, eta = random_measure(rng, small), random_measure(rng, small)
    d = dm(nu, eta, h)
    out["oracle_equivalence"] = _close(d, dm_bruteforce(nu, eta, h), 1e-9)
    mass_ok, supp_ok = mass_bounds_check(nu, eta, h)
    out["mass_bound"] = (mass_ok, 0.0 if mass_ok else 1.0)
    out["support_bound"] = (supp_ok, 0.0 if supp_ok else 1.0)

    space = random_space(rng, 8)
    a, b, c = (random_measure(rng, space, quarters=False) for _ in range(3))
    ab, ba = dm(a, b, h), dm(b, a, h)
    out["symmetry"] = (ab == ba, abs(ab - ba))
    out["identity"] = _leq(dm(a, a, h), 0.0, 1e-12)
    out["triangle"] = _leq(dm(a, c, h), ab + dm(b, c, h), 1e-9)
    t = float(rng.uniform(0, 1))
    out["mixture_bound"] = _leq(dm(a, ms.mix(a, b, t), h), ab, 1e-9)

    if injected is not None:
        dist, _ = injected
        bad = triangle_violations(dist)
        out["space_triangle"] = (not bad, float(len(bad)))
    return out


def norms_instance(seed: int, index: int, injected=None) -> dict:
    rng = instance_rng(seed, "norms", index)
    out = {}
    space = random_space(rng, int(rng.integers(1, 6)))
    w = space.weight
    p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    f = PointFunction(rng.normal(size=space.n))
    g = PointFunction(rng.normal(size=space.n))
    F, G = MeasureFunctional.induced(f), MeasureFunctional.induced(g)
    nF = lp_norm_functional_bruteforce(F, p, space)
    out["norm_equality"] = _close(nF, lp_norm_point(f, p, w), 1e-9)

    # Hölder with the conjugate exponent (p = 1 pairs with q = inf, which is excluded)
    if p > 1:
        q = p / (p - 1)
        lhs = lp_norm_functional_bruteforce(F * G, 1.0, space)
        rhs = lp_norm_functional_bruteforce(F, p, space) * lp_norm_functional_bruteforce(G, q, space)
        out["holder"] = _leq(lhs, rhs, 1e-9 * max(1.0, rhs))

    parts = [MeasureFunctional.tabulated(F), MeasureFunctional.tabulated(G),
             MeasureFunctional.tabulated(F * G)]
    total = parts[0] + parts[1] + parts[2]
    lhs = lp_norm_functional_bruteforce(total, p, space)
    rhs = sum(lp_norm_functional_bruteforce(P, p, space) for P in parts)
    out["subadditivity"] = _leq(lhs, rhs, 1e-9 * max(1.0, rhs))

    a = float(rng.normal())
    out["homogeneity"] = _close(lp_norm_functional_bruteforce(F * a, p, space), abs(a) * nF,
                                1e-9 * max(1.0, nF))
    out["jensen"] = _leq(lp_norm_functional_search(F, p, space, budget=8, seed=index), nF, 1e-9)

    rec = representability_check(MeasureFunctional.tabulated(F), space, seed=index)
    err = np.inf if rec is None else float(np.max(np.abs(rec.values - f.values)))
    out["representability"] = (err <= 1e-9, err)
    mass_only = MeasureFunctional.tabulated(ms.total_mass, "mass")
    rejected = representability_check(mass_only, space, seed=index) is None
    # on a single point with unit weight ||eta|| is induced by f = 1
    if space.n > 1 or w[0] != 1.0:
        out["rejects_mass"] = (rejected, 0.0 if rejected else 1.0)
    return out


_GRID_CACHE = {}


def _grad_grid():
    if "g" not in _GRID_CACHE:
        g = new_grid(1, [41], 0.1, origin=[0.0])
        _GRID_CACHE["g"] = (g, EnsembleFactory(g, 0.2))
    return _GRID_CACHE["g"]


def gradients_instance(seed: int, index: int, injected=None) -> dict:
    rng = instance_rng(seed, "gradients", index)
    space, factory = _grad_grid()
    x = space.coords[:, 0]
    out = {}

    def smooth():
        a, k, ph = rng.normal(size=3)
        return PointFunction(a * np.sin(2 * k * x + ph) + rng.normal() * x)

    f, g = smooth(), smooth()
    F, G = MeasureFunctional.induced(f), MeasureFunctional.induced(g)
    pt = int(rng.integers(6, space.n - 6))
    ens = factory(pt)
    eta = ens.anchor
    rF = upper_gradient_profile(F, eta, ens).value
    rG = upper_gradient_profile(G, eta, ens).value

    a = float(rng.normal())
    raF = upper_gradient_profile(F * a, eta, ens).value
    out["homogeneity"] = _close(raF, abs(a) * rF, 1e-12 * max(1.0, abs(a) * rF))
    out["subadditivity"] = _leq(upper_gradient_profile(F + G, eta, ens).value, rF + rG, 1e-12)
    H = MeasureFunctional.induced(PointFunction(rng.normal(size=space.n)))
    rH = upper_gradient_profile(H, eta, ens).value
    out["finite_sum"] = _leq(upper_gradient_profile(F + G + H, eta, ens).value, rF + rG + rH, 1e-12)
    bound = max(rF, rG) + 1e-12
    out["lattice_max"] = _leq(upper_gradient_profile(fmax(F, G), eta, ens).value, bound, 0.0)
    out["lattice_min"] = _leq(upper_gradient_profile(fmin(F, G), eta, ens).value, bound, 0.0)
    eps = max(c.times[max(ens.scales)] for c in ens.curves)
    rFG = upper_gradient_profile(F * G, eta, ens).value
    out["product"] = _leq(rFG, abs(F(eta)) * rG + abs(G(eta)) * rF + rF * rG * eps, 1e-12)
    small = ens.__class__(ens.curves[:2], ens.scales[:1])
    out["ensemble_monotone"] = _leq(upper_gradient_profile(F, eta, small).value, rF, 0.0)

    # f(x) = x along a translation: the integrated unit gradient matches the change
    ident = MeasureFunctional.induced(PointFunction(x))
    start = int(rng.integers(0, 10))
    phi = np.zeros(space.n)
    phi[start:start + 5] = rng.uniform(0.2, 1.0, size=5)
    curve = translation_curve(space, phi, (1,), int(rng.integers(3, 20)))
    rep = fundamental_inequality_report(ident, curve, np.ones(len(curve)))
    gap = float(np.max(rep["rhs"] - rep["lhs"]))
    out["fundamental_inequality"] = (rep["holds"], max(0.0, -float(np.min(rep["rhs"] - rep["lhs"]))))
    out["fundamental_gap"] = _leq(gap, 2 * space.spacing * max(1.0, curve.duration), 0.0)
    return out


_RUNNERS = {"metric": metric_instance, "norms": norms_instance, "gradients": gradients_instance}


def _run_one(args):
    suite, seed, index, injected = args
    return _RUNNERS[suite](seed, index, injected)


@dataclass
class SuiteReport:
    suite: str
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.failures == 0 for t in self.checks.values())

    def as_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": {k: v.as_dict() for k, v in sorted(self.checks.items())}}


def run_suite(suite: str, n: int, seed: int = 0, jobs: int = 1, injected=None) -> SuiteReport:
    """Run ``n`` random instances of one suite.

    ``injected`` is an optional ``(dist, weight)`` pair from a user space
    file; the metric suite checks its triangle inequality on every
    instance.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    if n <= 0:
        raise EmptySuiteError("no instances requested (--n must be positive)")
    tasks = [(suite, seed, i, injected) for i in range(n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=max(1, n // (4 * jobs))))
    else:
        results = [_run_one(t) for t in tasks]
    report = SuiteReport(suite)
    for i, res in enumerate(results):
        for name, (ok, margin) in res.items():
            report.checks.setdefault(name, CheckTally()).add(bool(ok), margin, i)
    log.info("suite %s: %s", suite, "pass" if report.passed else "FAIL")
    return report


def run(suites, n: int, seed: int = 0, jobs: int = 1, injected=None) -> dict:
    reports = {s: run_suite(s, n, seed, jobs, injected) for s in suites}
    return {
        "seed": seed,
        "n": n,
        "passed": all(r.passed for r in reports.values()),
        "suites": {s: r.as_dict() for s, r in reports.items()},
    }
