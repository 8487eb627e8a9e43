"""
L^p norms of functionals
========================

For a point function ``f`` the mean-value functional
``F_f(eta) = <f, eta> / ||eta||`` has the same L^p norm as ``f``: splitting
into single points is optimal, since averaging can only lower ``|F|**p``.
A functional that is not a mean value, such as the total mass, fails the
representability test.
"""

import numpy as np

from mms import measures as ms
from mms.functionals import (MeasureFunctional, PointFunction, lp_norm_functional_bruteforce,
                             lp_norm_functional_search, lp_norm_point, representability_check)
from mms.space import new_from_matrix

rng = np.random.default_rng(3)
pts = rng.uniform(0, 1, size=(6, 2))
dist = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
space = new_from_matrix(dist, [1.0, 0.5, 2.0, 1.0, 1.5, 1.0])

f = PointFunction(rng.normal(size=6))
F = MeasureFunctional.induced(f)
print(" p    ||f||_p   ||F_f||_p   search")
for p in (1.0, 2.0, 4.0):
    exact = lp_norm_functional_bruteforce(F, p, space, detail=True)
    found = lp_norm_functional_search(F, p, space, budget=16)
    print(f"{p:3.0f}  {lp_norm_point(f, p, space.weight):8.4f}  {exact.norm:9.4f}  {found:7.4f}")
print("optimal family at p=2:", lp_norm_functional_bruteforce(F, 2.0, space, detail=True).partition)

# recovering f from F alone
rec = representability_check(MeasureFunctional.tabulated(F), space)
print("\nrecovered f matches:", rec is not None and np.allclose(rec.values, f.values))
mass = MeasureFunctional.tabulated(ms.total_mass, "mass")
print("total mass is a mean value:", representability_check(mass, space) is not None)
