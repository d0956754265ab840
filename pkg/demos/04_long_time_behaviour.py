"""Where graphs end up: flat, at the mean height, exponentially fast.

For small data the linearised equation predicts that int u_x**2 decays at
rate 2 mu (2 pi)**2.  With the degenerate density sigma = alpha**2 / 2 the
misorientation instead decays at least like exp(-gamma t), because the
boundary is never shorter than the flat line.
"""

import math

import numpy as np

from gbflow import Grid1D, Params, SigmaModel, run
from gbflow.diagnostics import alpha_decay_check, asymptotics_report, decay_fit

sigma = SigmaModel.quadratic_shifted()
grid = Grid1D(128)
for a in (0.3, 0.1, 1e-3):
    traj = run(a * np.sin(2 * math.pi * grid.x) + 0.7, 0.0, grid, Params(dt=1.0, t_end=0.5),
               sigma, snapshot_every=500)
    rep = asymptotics_report(traj)
    rates = ", ".join(f"{k} {v:.2f}" for k, v in rep.rates.items())
    print(f"a = {a:g}: {rep.status}, u_inf = {rep.u_inf:.8f}, rates: {rates}")
print(f"linear prediction for h1: {2 * (2 * math.pi) ** 2:.2f}")

quadratic = SigmaModel.quadratic()
traj = run(0.2 * np.sin(2 * math.pi * grid.x), 1.0, grid, Params(dt=1e-3, t_end=1.0), quadratic)
check = alpha_decay_check(traj, quadratic)
print(f"degenerate density: alpha(1) = {traj['alpha'][-1]:.6f}, "
      f"fitted rate {decay_fit(traj.t, traj['alpha']).rate:.4f}, "
      f"match with alpha0 exp(-int |Gamma|): {check.worst_violation:.1e}")
