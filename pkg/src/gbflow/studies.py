"""Refinement ladders: observed orders for the solver and the diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import dissipation_residual, length_dissipation_check, refinement_order
from .geometry import GraphState, Grid1D
from .graph_solver import Params, run, stable_dt
from .kernel import BackwardKernel, kernel_identity_residual

#: minimum observed orders the ladder must reach
ORDER_MINIMA = {
    "self_convergence": 1.8,
    "dissipation": 1.5,
    "length_dissipation": 1.5,
    "kernel_identity": 1.8,
}

#: kernel residuals below this are rounding noise, e.g. for a constant schedule
KERNEL_ROUNDOFF = 1e-13


@dataclass
class LadderResult:
    levels: list
    errors: dict = field(default_factory=dict)
    orders: dict = field(default_factory=dict)

    def passed(self, name):
        order = self.orders[name]
        return order == math.inf or order >= ORDER_MINIMA[name]

    @property
    def all_passed(self):
        return all(self.passed(name) for name in self.orders)

    def to_dict(self):
        return {"levels": self.levels, "errors": self.errors,
                "orders": {k: ("exact" if v == math.inf else v) for k, v in self.orders.items()},
                "minima": ORDER_MINIMA}


def _ladder_runs(u0_fn, alpha0, model, params, n0, levels, snapshot_every):
    runs = []
    for j in range(levels):
        grid = Grid1D(n0 * 2 ** j)
        u0 = u0_fn(grid.x)
        dt = stable_dt(GraphState(grid, u0, alpha0), params, model)
        dt = min(dt, params.dt * 4.0 ** -j)
        p = Params(params.mu, params.gamma, dt, params.t_end, params.cfl_safety, params.scheme)
        runs.append(run(u0, alpha0, grid, p, model, snapshot_every=snapshot_every))
    return runs


def graph_ladder(u0_fn, alpha0, model, params, n0=64, levels=3, snapshot_every=4):
    """Run ``n0, 2 n0, ...`` with ``dt`` shrinking fourfold per level.

    ``u0_fn`` maps grid points to initial heights.  The time step of each
    level is the smaller of ``params.dt / 4**j`` and the level's stable step,
    so with ``params.dt`` large the ladder follows the stability limit.
    Snapshots are taken every ``snapshot_every`` steps, so the difference
    quotients in the dissipation check refine together with ``dt``.
    """
    runs = _ladder_runs(u0_fn, alpha0, model, params, n0, levels, snapshot_every)
    res = LadderResult([{"n": r.meta["n"], "dt": r.dt, "steps": r.steps} for r in runs])

    finals = [r.snapshots[-1].data for r in runs]
    diffs = []
    for j in range(levels - 1):
        diffs.append(float(np.abs(finals[j] - finals[j + 1][::2]).max()))
    res.errors["self_convergence"] = diffs
    if len(diffs) >= 2:
        res.orders["self_convergence"] = refinement_order(diffs[-2], diffs[-1])

    dis = [float(np.abs(dissipation_residual(r, model, params)[1]).max()) for r in runs]
    res.errors["dissipation"] = dis
    res.orders["dissipation"] = refinement_order(dis[-2], dis[-1])

    lend = [float(np.abs(length_dissipation_check(r, model, params)[1]).max()) for r in runs]
    res.errors["length_dissipation"] = lend
    res.orders["length_dissipation"] = refinement_order(lend[-2], lend[-1])
    return res


def kernel_ladder(sigma_fn, t_end, mu=1.0, h0=None, levels=3, points=50, seed=0):
    """Identity residual for kernels built from ``sigma_fn`` sampled at ``h0 / 2**j``.

    The spatial terms use the exact ``sigma_fn``.  Evaluation times sit one
    third of the way into a coarse segment, which is also one third (or two
    thirds) into every refined segment, so the interpolation error shrinks
    by exactly the scheme order.
    """
    h0 = t_end / 16 if h0 is None else h0
    rng = np.random.default_rng(seed)
    X0 = np.zeros(2)
    n_seg = int(round(t_end / h0))
    j_idx = rng.integers(0, n_seg - 2, size=points)
    t_eval = (j_idx + 1.0 / 3.0) * h0
    X = rng.uniform(-1.0, 1.0, size=(points, 2))
    ang = rng.uniform(0.0, 2 * np.pi, size=points)
    errors = []
    for j in range(levels):
        times = np.linspace(0.0, t_end, n_seg * 2 ** j + 1)
        kern = BackwardKernel.from_schedule(X0, t_end, mu, times, sigma_fn(times))
        worst = 0.0
        for i in range(points):
            a = (math.cos(ang[i]), math.sin(ang[i]))
            worst = max(worst, float(kernel_identity_residual(kern, X[i], t_eval[i], a,
                                                              sigma=sigma_fn)))
        errors.append(worst if worst > KERNEL_ROUNDOFF else 0.0)
    return errors, refinement_order(errors[-2], errors[-1])
