"""
Curves of measures
==================

A curve is a sequence of measures at increasing times.  Its Lipschitz
constant is measured pairwise with ``d_M``.  Rigid translations are
1-Lipschitz by construction.  Dilations of a ball (mass held fixed) are
close to 1-Lipschitz in 1-D.  On a square grid the ball grows in jumps,
which pushes the measured constant to about sqrt(2).  Straight mixtures
``(1-t) eta + t nu`` are usually not rectifiable at all, because creating
a little mass costs ``sqrt`` of the amount.
"""

import numpy as np

from mms import measures as ms
from mms.curves import (decompose_curve, dilation_curve, mixture_path, subparametrized,
                        translation_curve, validate_curve)
from mms.space import new_grid

line = new_grid(1, [41], 0.1)
x = line.coords[:, 0]
bump = ((x >= 0.5) & (x <= 1.0)).astype(float)

tr = translation_curve(line, bump, (1,), 10, validate=True)
print(f"translation, 1-D      lip = {tr.lip_cert:.4f}")

dil = dilation_curve(line, 20, 0.5, 8)
print(f"dilation, 1-D         lip = {dil.lip_cert:.4f}")

plane = new_grid(2, [31, 31], 0.1)
dil2 = dilation_curve(plane, 15 * 31 + 15, 0.5, 4)
slow = subparametrized(dil2)
print(f"dilation, 2-D         lip = {dil2.lip_cert:.4f}  (slowed: duration {dil2.duration:.2f} -> {slow.duration:.2f})")

# a mixture toward a far-away bump: the first step alone costs sqrt(mass/10)
far = ms.from_density(line, ((x >= 3.0) & (x <= 3.5)).astype(float))
states = mixture_path(ms.from_density(line, bump), far, 10)
mix = validate_curve(states, 0.1 * np.arange(11))
print(f"mixture over 1.0      lip = {mix.lip_cert:.4f}")

# split the translated bump into left and right halves at t = 0 and follow both
left = ms.from_density(line, bump * (x < 0.75))
right = ms.from_density(line, bump * (x >= 0.75))
parts = decompose_curve(tr, 0, [left, right])
end = parts[0].states[-1].density + parts[1].states[-1].density
print("\ncomponents of the translation")
for c in parts:
    print(f"  {c.label:18s} lip = {c.lip_cert:.4f}  mass = {ms.total_mass(c.states[0]):.2f}")
print("components sum to the curve at the end:", np.allclose(end, tr.states[-1].density))
