"""
Upper gradients of mean-value functionals
=========================================

At a ball probe ``mu|B(x, rho)`` we push the probe along a family of
1-Lipschitz curves (lattice translations and one dilation) and record the
largest difference quotient of ``F_f``.  For smooth ``f`` this tracks
``|grad f|`` averaged over the probe, so it approaches ``|f'|`` as ``rho``
and the step shrink.  The worst errors sit where ``|f'|`` has a corner (zeros
of ``cos``), because the probe averages across it.  The field and its L^2 Sobolev norm are written to
``gradients.csv`` next to this script.
"""

from pathlib import Path

import numpy as np

from mms.gradients import gradient_field, sobolev_norm
from mms.space import new_grid

line = new_grid(1, [201], 0.01)          # two periods on [0, 2]
x = line.coords[:, 0]
f = np.sin(2 * np.pi * x)
exact = 2 * np.pi * np.abs(np.cos(2 * np.pi * x))

print(" rho    sup err   richardson err")
for rho in (0.08, 0.04, 0.02):
    g = gradient_field(f, line, rho, estimate="sup")
    ok = g.interior
    e_sup = np.max(np.abs(g.values[ok] - exact[ok]))
    e_ric = np.max(np.abs(g.richardson[ok] - exact[ok]))
    print(f"{rho:.2f}  {e_sup:8.4f}  {e_ric:10.4f}")

g = gradient_field(f, line, 0.02, estimate="richardson")
ok = g.interior
ref = np.sqrt(np.sum((f[ok] ** 2 + exact[ok] ** 2) * line.weight[ok]))
print(f"\nL^2 Sobolev norm: {sobolev_norm(f, 2.0, g, line.weight):.4f}  (exact gradient, same points: {ref:.4f})")

# a kink: |x - 1/2| has slope one on both sides; probes straddling the corner see less
g_abs = gradient_field(np.abs(x - 0.5), line, 0.02, estimate="sup")
print("|x - 1/2|: gradient range", np.nanmin(g_abs.values).round(4), "to", np.nanmax(g_abs.values).round(4))

# a coarse 2-D field on a smaller grid
plane = new_grid(2, [21, 21], 0.05)
xy = plane.coords
g2 = gradient_field(xy[:, 0] + 2 * xy[:, 1], plane, 0.1, estimate="sup")
print(f"2-D linear f = x + 2y: median estimate {np.nanmedian(g2.values):.4f}, |grad f| = {np.sqrt(5):.4f}")

out = Path(__file__).with_name("gradients.csv")
np.savetxt(out, np.column_stack([x, f, g.values]), delimiter=",", header="x,f,g", comments="")
print("wrote", out.name)
