"""Time stepping for the periodic graph form of the coupled system.

The height ``u(x, t)`` of the boundary obeys

    u_t = mu * sigma(alpha) * u_xx / (1 + u_x**2),

while the misorientation follows ``alpha_t = -gamma * sigma'(alpha) * |Gamma|``.

Each step first advances ``alpha`` by Heun's method with the length frozen at
the start of the step, then advances ``u`` with a linearly implicit scheme
whose coefficient uses the midpoint value of ``alpha`` and ``u_x`` frozen at
the old level.  One cyclic tridiagonal solve per step.

Two ``u`` updates are available via ``Params.scheme``:

``"euler"`` (default)
    ``(I - dt c D2) u_new = u`` -- first order in time, satisfies a discrete
    maximum principle for every ``dt``.
``"crank_nicolson"``
    Predicts ``u`` at the half step, freezes the coefficient and the length
    there, then applies ``(I - dt/2 c D2) u_new = (I + dt/2 c D2) u``.
    Second order in time; keeps the maximum principle while ``dt`` respects
    :func:`stable_dt`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DivergenceError, SingularSystemError
from .geometry import GraphState, Grid1D, d1, graph_profile
from .trajectory import GRAPH_COLUMNS, Snapshot, Trajectory
from .tridiag import solve_cyclic

SCHEMES = ("euler", "crank_nicolson")
_PROFILE_COLUMNS = ("length", "sup_v", "sup_u", "h1", "h2", "h3",
                    "sup_kappa", "kappa_l2")
_BLOCK_BYTES = 1 << 22


@dataclass(frozen=True)
class Params:
    """Physical and numerical parameters shared by both solvers."""

    mu: float = 1.0
    gamma: float = 1.0
    dt: float = 1e-4
    t_end: float = 1.0
    cfl_safety: float = 0.5
    scheme: str = "euler"

    def __post_init__(self):
        for name in ("mu", "gamma", "dt"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ConfigurationError(f"{name} must be a positive finite number, got {val!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigurationError(f"t_end must be finite and >= 0, got {self.t_end!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigurationError("cfl_safety must lie in (0, 1]")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")


def stable_dt(state: GraphState, params: Params, model):
    """Explicit diffusive limit ``cfl_safety * dx**2 / (mu * sigma(alpha))``.

    Returns ``inf`` when ``sigma(alpha) == 0`` (the curve is frozen and only
    the misorientation ODE evolves).
    """
    s = model.value(state.alpha)
    if s <= 0:
        return math.inf
    return params.cfl_safety * state.grid.dx ** 2 / (params.mu * s)


def _heun_alpha(alpha, length, dt, gamma, model):
    f0 = -gamma * model.deriv(alpha) * length
    pred = alpha + dt * f0
    f1 = -gamma * model.deriv(pred) * length
    return float(alpha + 0.5 * dt * (f0 + f1))


def _implicit_solve(u, coef, grid, explicit_half):
    # coef = dt_eff * mu * sigma / (1 + ux^2) / dx^2, one entry per row.
    # Solved for the increment so that constant data is preserved exactly.
    lap = coef * (u[grid.ip] - 2.0 * u + u[grid.im])
    if explicit_half:
        lap *= 2.0
    if not lap.any():
        # the system is nonsingular, so a zero right-hand side means a zero increment
        return u.copy()
    return u + solve_cyclic(-coef, 1.0 + 2.0 * coef, -coef, lap)


def _advance(u, alpha, ux, length, dt, params, model, grid):
    try:
        return _advance_unchecked(u, alpha, ux, length, dt, params, model, grid)
    except SingularSystemError as exc:
        # only reachable when dt * sigma * n**2 swamps double precision
        raise DivergenceError(f"implicit solve broke down: {exc}") from exc


def _advance_unchecked(u, alpha, ux, length, dt, params, model, grid):
    n2 = float(grid.n) ** 2
    mu, gamma = params.mu, params.gamma
    if params.scheme == "euler":
        alpha_new = _heun_alpha(alpha, length, dt, gamma, model)
        s_mid = model.value(0.5 * (alpha + alpha_new))
        coef = (dt * mu * s_mid * n2) / (1.0 + ux * ux)
        u_new = _implicit_solve(u, coef, grid, explicit_half=False)
    else:
        s0 = model.value(alpha)
        coef = (0.5 * dt * mu * s0 * n2) / (1.0 + ux * ux)
        u_half = _implicit_solve(u, coef, grid, explicit_half=False)
        ux_half = d1(u_half, grid)
        length_half = float(np.sqrt(1.0 + ux_half * ux_half).sum()) / grid.n
        alpha_new = _heun_alpha(alpha, length_half, dt, gamma, model)
        s_mid = model.value(0.5 * (alpha + alpha_new))
        coef = (0.5 * dt * mu * s_mid * n2) / (1.0 + ux_half * ux_half)
        u_new = _implicit_solve(u, coef, grid, explicit_half=True)
    # a NaN or inf anywhere poisons the sum
    if not math.isfinite(float(u_new.sum()) + alpha_new):
        raise DivergenceError("non-finite values in u")
    return u_new, alpha_new


def step(state: GraphState, params: Params, model, dt=None, index=None):
    """Advance ``state`` by one step of size ``dt`` (default ``params.dt``).

    ``index`` is only used to label a :class:`DivergenceError`.
    """
    dt = params.dt if dt is None else float(dt)
    grid = state.grid
    ux = d1(state.u, grid)
    length = float(np.sqrt(1.0 + ux * ux).sum()) / grid.n
    try:
        u_new, alpha_new = _advance(state.u, state.alpha, ux, length, dt,
                                    params, model, grid)
    except DivergenceError as exc:
        raise DivergenceError("non-finite values in u", step=index, t=state.t + dt) from exc
    return GraphState(grid, u_new, alpha_new, state.t + dt)


def plan_steps(t_end, dt_cap):
    """Number of uniform steps and their size so that the run lands on ``t_end``."""
    if t_end == 0:
        return 0, 0.0
    if not dt_cap > 0:
        raise ConfigurationError("time step cap must be positive")
    nsteps = max(1, math.ceil(t_end / dt_cap - 1e-9))
    return nsteps, t_end / nsteps


def run(u0, alpha0, grid: Grid1D, params: Params, model, snapshot_every=1,
        cap_dt=True):
    """Integrate from ``(u0, alpha0)`` to ``params.t_end``.

    The step is ``min(params.dt, stable_dt(initial state))`` unless
    ``cap_dt`` is false, then shrunk slightly so the steps are uniform and
    end exactly on ``t_end``.  A diagnostics row is recorded at every step
    and a full snapshot every ``snapshot_every`` steps; the first and last
    states are always kept.
    """
    if int(snapshot_every) != snapshot_every or snapshot_every < 1:
        raise ConfigurationError("snapshot_every must be a positive integer")
    state0 = GraphState(grid, u0, alpha0, 0.0)
    dt_cap = params.dt
    if cap_dt:
        dt_cap = min(dt_cap, stable_dt(state0, params, model))
    nsteps, dt = plan_steps(params.t_end, dt_cap)

    rows = {name: np.empty(nsteps + 1) for name in GRAPH_COLUMNS}
    times = np.arange(nsteps + 1) * dt
    times[-1] = params.t_end
    snapshots = []
    # states are buffered and their diagnostics evaluated a block at a time
    block = max(1, min(nsteps + 1, _BLOCK_BYTES // (8 * grid.n)))
    u_buf = np.empty((block, grid.n))
    a_buf = np.empty(block)
    carry = None
    start = 0

    def flush(count, carry):
        prof = graph_profile(u_buf[:count], grid)
        sl = slice(start, start + count)
        a = a_buf[:count]
        energy = model.value(a) * prof["length"]
        rows["t"][sl] = times[sl]
        rows["alpha"][sl] = a
        rows["E"][sl] = energy
        for name in _PROFILE_COLUMNS:
            rows[name][sl] = prof[name]
        u_all, v_all = u_buf[:count], prof["v"]
        a_all, e_all = a, energy
        if carry is not None:
            u_all = np.vstack([carry[0][None], u_all])
            v_all = np.vstack([carry[1][None], v_all])
            a_all = np.concatenate([[carry[2]], a_all])
            e_all = np.concatenate([[carry[3]], e_all])
        if len(a_all) > 1:
            vel = np.diff(u_all, axis=0) / dt
            v_mid = 0.5 * (v_all[1:] + v_all[:-1])
            dissipation = (np.diff(a_all) / dt) ** 2 / params.gamma + \
                (vel * vel / v_mid).mean(axis=1) / params.mu
            res = np.diff(e_all) / dt + dissipation
        else:
            res = np.empty(0)
        if carry is None:
            res = np.concatenate([[np.nan], res])
        rows["dE_residual"][sl] = res
        return (u_buf[count - 1].copy(), prof["v"][count - 1].copy(),
                float(a[-1]), float(energy[-1]))

    u = np.array(state0.u)
    alpha = state0.alpha
    ip, im, n = grid.ip, grid.im, grid.n
    for k in range(nsteps + 1):
        j = k - start
        u_buf[j] = u
        a_buf[j] = alpha
        if k % snapshot_every == 0 or k == nsteps:
            snapshots.append(Snapshot(k, float(times[k]), alpha, u.copy()))
        if j + 1 == block or k == nsteps:
            carry = flush(j + 1, carry)
            start = k + 1
        if k == nsteps:
            break
        ux = (u[ip] - u[im]) * (0.5 * n)
        length = float(np.sqrt(1.0 + ux * ux).sum()) / n
        try:
            u, alpha = _advance(u, alpha, ux, length, dt, params, model, grid)
        except DivergenceError as exc:
            raise DivergenceError("solver diverged", step=k + 1,
                                  t=(k + 1) * dt) from exc

    meta = {"n": grid.n, "mu": params.mu, "gamma": params.gamma,
            "t_end": params.t_end, "scheme": params.scheme,
            "snapshot_every": int(snapshot_every), "dt_requested": params.dt,
            "cap_dt": bool(cap_dt)}
    return Trajectory("graph", dt, rows, snapshots, meta)
