"""Anisotropic line tension on a polygonal circle.

With sigma depending on the normal angle, the line tension T = sigma_theta n
+ sigma b satisfies T_s = (sigma_thth + sigma) kappa n.  The discrete defect
decreases quadratically with the number of vertices.
"""

import math

from gbflow import AnisotropicSigma, circle, line_tension_residual

model = AnisotropicSigma.harmonic(2.0, 1.0, 2)   # sigma = 2 + cos 2 theta
prev = None
for m in (64, 128, 256, 512, 1024):
    res = line_tension_residual(circle(1.0, m), model, 0.0)
    order = "" if prev is None else f"  order {math.log2(prev / res):.2f}"
    print(f"m = {m:4d}: defect {res:.3e}{order}")
    prev = res
