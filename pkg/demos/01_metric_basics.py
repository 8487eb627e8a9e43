"""
The mass-transport metric on a handful of points
================================================

``d_M(nu, eta)`` is the smallest ``eps`` at which the two measures split into
pieces of diameter at most ``eps`` whose total mass mismatch is at most
``h(eps) = eps**2``.  Mass can either be moved (cost: the distance) or
created and destroyed (cost: ``h^{-1}`` of the amount).
"""

import numpy as np

from mms import measures as ms
from mms.mmetric import HFunction, dm, dm_bruteforce, dm_solve, mass_bounds_check
from mms.space import new_from_matrix
from mms.verify import random_measure, random_space

# a three point line 0 - 1 - 2 with unit gaps and unit weights
line = new_from_matrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]], [1, 1, 1])

# moving a unit of mass by one costs exactly one
a = ms.point_mass(line, 0, 1.0)
b = ms.point_mass(line, 1, 1.0)
print("swap by one gap:", dm(a, b))

# deleting a unit of mass costs h^{-1}(1) = 1 as well; deleting a quarter costs 1/2
print("delete a unit:  ", dm(a, ms.zero(line)))
print("delete a quarter:", dm(ms.point_mass(line, 0, 0.25), ms.zero(line)))

# the penalty exponent matters for the value, not for the structure
for s in (1.5, 2.0, 4.0):
    print(f"s = {s}: delete a quarter ->", round(dm(ms.point_mass(line, 0, 0.25), ms.zero(line), HFunction(s)), 4))

# split a unit between the two other points: match the near half at eps = 1,
# and the leftover mismatch of 1 is paid for by h(1) = 1
eta = ms.from_density(line, [0, 0.5, 0.5])
res = dm_solve(a, eta)
print("\nsplit target:", res.epsilon, "matched", res.matched_mass, "plan", res.plan.entries)

# the flow solver against the decomposition oracle on random rational instances
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    sp = random_space(rng, int(rng.integers(1, 6)))
    nu, et = random_measure(rng, sp), random_measure(rng, sp)
    worst = max(worst, abs(dm(nu, et) - dm_bruteforce(nu, et)))
    assert mass_bounds_check(nu, et) == (True, True)
print("\nlargest solver/oracle difference over 200 instances:", worst)
