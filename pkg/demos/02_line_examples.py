"""
Shifting mass along a line: d_M against W1
==========================================

Cut the unit interval at 1/2 and slide the right half by ``t``.  Every bit
of moved mass travels ``t``, so ``d_M`` (a worst-case, bottleneck quantity)
is ``t``, while W1 averages and only sees ``t/2``.

A rigid shift of the whole interval is different.  Sliding by ``t`` costs
``t`` if all mass is moved, but once ``t`` is large it is cheaper to move
the overlap a shorter way and pay ``h`` for the ends.  With ``h = eps**2``
and a unit interval the continuum value is ``sqrt(1 + 2t) - 1``, which
drops below ``t`` at second order.
"""

import numpy as np

from mms import measures as ms
from mms.curves import translation_curve
from mms.mmetric import dm, w1
from mms.space import new_grid

delta = 0.05
grid = new_grid(1, [31], delta)          # nodes 0, 0.05, ..., 1.5
x = grid.coords[:, 0]
e = 1e-9
# half-open cells [a, b) so both measures have the same node count
base = ms.from_density(grid, (x < 1 - e).astype(float))

print(" t     d_M     W1    W1/d_M")
for t in (0.1, 0.2, 0.3):
    moved = ms.from_density(grid, ((x < 0.5 - e) | ((x >= 0.5 + t - e) & (x < 1 + t - e))).astype(float))
    d, w = dm(moved, base), w1(moved, base)
    print(f"{t:.1f}  {d:.4f}  {w:.4f}  {w / d:.3f}")

# the rigid shift on the coarser grid
line = new_grid(1, [41], 0.1, origin=[-1.0])
y = line.coords[:, 0]
curve = translation_curve(line, ((y >= -e) & (y <= 1 + e)).astype(float), (1,), 10)
print("\n k   shift   d_M    sqrt(1+2t)-1")
for k in range(0, 11, 2):
    t = 0.1 * k
    print(f"{k:2d}  {t:.1f}    {dm(curve.states[0], curve.states[k]):.4f}  {np.sqrt(1 + 2 * t) - 1:.4f}")
