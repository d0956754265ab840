"""Executable checks of the identities and bounds satisfied by the flow.

Every check returns a :class:`CheckReport`.  Series-valued diagnostics return
``(times, values, report)``.  Nothing here mutates a trajectory, and the same
trajectory with the same tolerances always yields the same report.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .errors import DiagnosticError, FitError, KernelDomainError
from .geometry import area_element, d1
from .kernel import BackwardKernel
from .sigma import SigmaKind, SigmaModel


class WeightFunction(str, enum.Enum):
    ONE = "one"
    AREA_ELEMENT = "area_element"


@dataclass
class CheckReport:
    """Outcome of one check.

    ``passed`` is ``worst_violation <= tolerance``.  A check whose hypotheses
    do not hold for the model is reported with ``applicable=False`` and
    passes vacuously.
    """

    name: str
    passed: bool
    worst_violation: float
    location: float
    tolerance: float
    applicable: bool = True
    detail: str = ""

    @classmethod
    def evaluate(cls, name, worst, location, tolerance, detail=""):
        worst = float(worst)
        return cls(name, bool(worst <= tolerance), worst, float(location),
                   float(tolerance), True, detail)

    @classmethod
    def not_applicable(cls, name, detail):
        return cls(name, True, 0.0, float("nan"), 0.0, False, detail)

    def to_dict(self):
        return asdict(self)

    @property
    def status(self):
        if not self.applicable:
            return "n/a"
        return "pass" if self.passed else "FAIL"


def _params(traj, params):
    if params is not None:
        return float(params.mu), float(params.gamma)
    return float(traj.meta.get("mu", 1.0)), float(traj.meta.get("gamma", 1.0))


def _require_graph(traj):
    if traj.kind != "graph":
        raise DiagnosticError("this diagnostic needs a graph trajectory")


def _worst(values, times):
    i = int(np.nanargmax(values))
    return float(values[i]), float(times[i])


# -- energy dissipation --------------------------------------------------------

def dissipation_residual(traj, model, params=None, rtol=1e-2, atol=1e-12, route="snapshots"):
    """Defect in ``dE/dt = -(1/gamma) alpha_t**2 - (1/mu) int u_t**2 / v dx``.

    ``route="snapshots"`` takes every time derivative as a centred difference
    over the snapshots, which must be uniformly spaced; the residual lives on
    the interior snapshots and a trailing snapshot off the pattern is ignored.
    ``route="steps"`` reads the ``dE_residual`` rows that a graph run records
    between consecutive steps (midpoint differences, same model and
    parameters as the run).  ``route="auto"`` uses the snapshots when they are
    a single step apart and the step rows otherwise, since sparse snapshots
    cannot resolve fast modes.  The check passes when
    ``max |residual| <= rtol * max |dE/dt| + atol``.
    """
    _require_graph(traj)
    if route not in ("snapshots", "steps", "auto"):
        raise DiagnosticError(f"unknown route {route!r}")
    if route == "auto":
        try:
            _, h = traj.uniform_snapshots()
            dense = abs(h - traj.dt) <= 1e-9 * traj.dt
        except DiagnosticError:
            dense = False
        route = "snapshots" if dense else "steps"
    if route == "steps":
        return _dissipation_from_steps(traj, rtol, atol)
    snaps, h = traj.uniform_snapshots()
    if len(snaps) < 3:
        raise DiagnosticError("dissipation check needs at least 3 uniformly spaced snapshots")
    mu, gamma = _params(traj, params)
    grid = traj.grid
    u = np.array([s.data for s in snaps])
    alpha = np.array([s.alpha for s in snaps])
    times = np.array([s.t for s in snaps])
    v = np.sqrt(1.0 + d1_rows(u, grid) ** 2)
    energy = model.value(alpha) * v.mean(axis=1)
    dE = (energy[2:] - energy[:-2]) / (2 * h)
    a_t = (alpha[2:] - alpha[:-2]) / (2 * h)
    u_t = (u[2:] - u[:-2]) / (2 * h)
    rhs = -a_t * a_t / gamma - (u_t * u_t / v[1:-1]).mean(axis=1) / mu
    res = dE - rhs
    t_mid = times[1:-1]
    worst, where = _worst(np.abs(res), t_mid)
    scale = float(np.abs(dE).max())
    report = CheckReport.evaluate(
        "dissipation", worst, where, rtol * scale + atol,
        f"max|dE/dt|={scale:.3e}, relative defect={worst / scale if scale else 0.0:.3e}")
    return t_mid, res, report


def _dissipation_from_steps(traj, rtol, atol):
    t = traj.t
    if t.size < 2:
        raise DiagnosticError("dissipation check needs at least 2 recorded states")
    res = np.asarray(traj["dE_residual"][1:], dtype=float)
    if not np.all(np.isfinite(res)):
        raise DiagnosticError("step residuals missing from this trajectory")
    dE = np.diff(np.asarray(traj["E"])) / np.diff(t)
    t_mid = 0.5 * (t[1:] + t[:-1])
    worst, where = _worst(np.abs(res), t_mid)
    scale = float(np.abs(dE).max())
    report = CheckReport.evaluate(
        "dissipation", worst, where, rtol * scale + atol,
        f"per-step rows, max|dE/dt|={scale:.3e}, "
        f"relative defect={worst / scale if scale else 0.0:.3e}")
    return t_mid, res, report


def d1_rows(u, grid):
    """Centred difference applied to every row of a stack of samples."""
    return (u[..., grid.ip] - u[..., grid.im]) * (0.5 * grid.n)


# -- weighted monotonicity -------------------------------------------------------

def _periodic_value(u, x0):
    n = len(u)
    pos = (x0 % 1.0) * n
    i = int(math.floor(pos))
    w = pos - i
    return float((1 - w) * u[i % n] + w * u[(i + 1) % n])


def monotonicity_series(traj, model, x0=0.5, t0=None, weight=WeightFunction.AREA_ELEMENT,
                        params=None, eps_rel=1e-4, guard_cells=4.0):
    """``M(t) = int_Gamma f rho sigma(alpha) dH^1`` over the whole periodic graph.

    The kernel is centred at ``X0 = (x0, u(x0, t0))`` with ``t0`` defaulting
    to the last snapshot, and its conductivity follows ``sigma(alpha(t))``
    along the recorded rows.  Each period-shifted copy of the kernel is
    summed, so the integral runs over the full periodic curve.  Snapshots too
    close to ``t0`` for the grid to resolve the kernel (``tau`` below
    ``(guard_cells * dx)**2 / 2``) are skipped.  The check passes if every
    forward difference quotient of ``M`` is at most ``eps_rel * M(first)``.
    """
    _require_graph(traj)
    weight = WeightFunction(weight)
    mu, _ = _params(traj, params)
    grid = traj.grid
    snaps = traj.snapshots
    if t0 is None:
        ref = snaps[-1]
    else:
        matches = [s for s in snaps if abs(s.t - t0) <= 1e-12 * max(1.0, abs(t0))]
        if not matches:
            raise DiagnosticError(f"t0={t0} is not a snapshot time")
        ref = matches[0]
    t0 = ref.t
    X0 = (float(x0), _periodic_value(ref.data, x0))
    sig_rows = np.asarray(model.value(np.asarray(traj["alpha"])), dtype=float)
    kernel = None
    if np.any(sig_rows > 0):
        kernel = BackwardKernel.from_schedule(X0, t0, mu, traj.t, sig_rows)
    tau_min = 0.5 * (guard_cells * grid.dx) ** 2

    x = grid.x
    times, values = [], []
    for s in snaps:
        if s.t >= t0:
            break
        sig = model.value(s.alpha)
        if sig == 0:
            times.append(s.t)
            values.append(0.0)
            continue
        try:
            tau = kernel.tau(s.t)
        except KernelDomainError:
            continue
        if tau < tau_min:
            continue
        v = area_element(s.data, grid)
        f = v if weight is WeightFunction.AREA_ELEMENT else 1.0
        reach = math.ceil(math.sqrt(160.0 * tau)) + 1
        shifts = np.arange(-reach, reach + 1, dtype=float)
        X = np.empty((shifts.size, grid.n, 2))
        X[..., 0] = x[None, :] + shifts[:, None]
        X[..., 1] = s.data[None, :]
        rho = kernel.rho(X, s.t).sum(axis=0)
        times.append(s.t)
        values.append(sig * float(np.dot(f * rho, v)) / grid.n)
    times, values = np.asarray(times), np.asarray(values)
    name = f"monotonicity[{weight.value}]"
    if times.size < 2 and not model.satisfies_A1:
        return times, values, CheckReport.not_applicable(name, "model does not satisfy A1")
    if times.size < 2:
        return times, values, CheckReport.not_applicable(
            name, "fewer than two snapshots before t0 resolve the kernel")
    slope = np.diff(values) / np.diff(times)
    eps = eps_rel * abs(values[0])
    worst, where = _worst(slope, times[:-1])
    detail = f"X0=({X0[0]:.6g}, {X0[1]:.6g}), t0={t0:.6g}, M(first)={values[0]:.6e}"
    if not model.satisfies_A1:
        return times, values, CheckReport.not_applicable(
            name, "model does not satisfy A1; " + detail)
    return times, values, CheckReport.evaluate(name, worst, where, eps, detail)


# -- a priori bounds ---------------------------------------------------------------

def bound_checks(traj, model, tol_max=1e-10, tol_alpha=1e-12, tol_length=1e-10,
                 tol_gradient=0.0):
    """Maximum principle, misorientation bound, length bound, gradient estimate.

    Checks that need assumption A1 or A2 are reported as not applicable when
    the model's flag is false.  Curve trajectories get the misorientation and
    perimeter checks only.
    """
    a1 = isinstance(model, SigmaModel) and model.satisfies_A1
    a2 = isinstance(model, SigmaModel) and model.satisfies_A2
    t = traj.t
    reports = []
    alpha = np.abs(np.asarray(traj["alpha"]))
    if a2:
        excess = alpha - alpha[0]
        reports.append(CheckReport.evaluate("misorientation", *_worst(excess, t), tol_alpha))
    else:
        reports.append(CheckReport.not_applicable("misorientation", "model does not satisfy A2"))
    length = np.asarray(traj["length"])
    if isinstance(model, SigmaModel):
        reports.append(CheckReport.evaluate("length", *_worst(length - length[0], t), tol_length))
    else:
        reports.append(CheckReport.not_applicable("length", "anisotropic density"))
    if traj.kind != "graph":
        return reports
    if a1:
        sup_u = np.asarray(traj["sup_u"])
        reports.append(CheckReport.evaluate("max_principle", *_worst(sup_u - sup_u[0], t), tol_max))
        sup_v = np.asarray(traj["sup_v"])
        bound = model.value(float(traj["alpha"][0])) / model.c_lower * sup_v[0] ** 2
        worst, where = _worst(sup_v - bound, t)
        reports.append(CheckReport.evaluate("gradient", worst, where, tol_gradient,
                                            f"bound={bound:.6g}"))
    else:
        reports.append(CheckReport.not_applicable("max_principle", "model does not satisfy A1"))
        reports.append(CheckReport.not_applicable("gradient", "model does not satisfy A1"))
    return reports


def energy_descent_check(traj, rel_slack=1e-3):
    """``E`` non-increasing up to ``rel_slack * dt * E(0)`` per step."""
    E = np.asarray(traj["E"])
    t = traj.t
    if E.size < 2:
        return CheckReport.not_applicable("energy_descent", "single-state trajectory")
    dt = np.diff(t)
    excess = np.diff(E) - rel_slack * dt * abs(E[0])
    return CheckReport.evaluate("energy_descent", *_worst(excess, t[1:]), 0.0)


def enclosure_check(traj, model, params=None):
    """Comparison with the shrinking circle that encloses the initial curve.

    With ``sigma >= C1`` the enclosing radius about the run's centre must stay
    below ``sqrt(R0**2 - 2 mu C1 t)`` plus twice the longest edge.
    """
    if traj.kind != "curve":
        raise DiagnosticError("enclosure check needs a curve trajectory")
    if not (isinstance(model, SigmaModel) and model.satisfies_A1):
        return CheckReport.not_applicable("enclosure", "model does not satisfy A1")
    mu, _ = _params(traj, params)
    c = np.asarray(traj.meta.get("center", (0.0, 0.0)), dtype=float)
    snaps = traj.snapshots
    R0 = float(np.hypot(*(snaps[0].data - c).T).max())
    excess, times = [], []
    for s in snaps:
        pts = s.data
        seg = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        radius = float(np.hypot(*(pts - c).T).max())
        bound = math.sqrt(max(R0 * R0 - 2.0 * mu * model.c_lower * s.t, 0.0)) + 2.0 * seg.max()
        excess.append(radius - bound)
        times.append(s.t)
    return CheckReport.evaluate("enclosure", *_worst(np.asarray(excess), np.asarray(times)), 0.0)


# -- length dissipation --------------------------------------------------------------

def length_dissipation_check(traj, model, params=None, rtol=1e-3, atol=None):
    """Defect in ``d|Gamma|/dt = -mu sigma(alpha) int kappa**2 v dx``.

    Uses the per-step rows with centred differences.  The tolerance is
    ``atol`` when given, else ``rtol`` times the largest right-hand side.
    Returns ``(times, residual, report)``.
    """
    _require_graph(traj)
    t = traj.t
    if t.size < 3:
        raise DiagnosticError("length dissipation needs at least 3 recorded states")
    mu, _ = _params(traj, params)
    L = np.asarray(traj["length"])
    lhs = (L[2:] - L[:-2]) / (t[2:] - t[:-2])
    rhs = -mu * model.value(np.asarray(traj["alpha"][1:-1])) * np.asarray(traj["kappa_l2"][1:-1])
    res = lhs - rhs
    scale = float(np.abs(rhs).max())
    tol = rtol * scale + 1e-14 if atol is None else float(atol)
    worst, where = _worst(np.abs(res), t[1:-1])
    return t[1:-1], res, CheckReport.evaluate(
        "length_dissipation", worst, where, tol, f"max|rhs|={scale:.3e}")


# -- misorientation decay --------------------------------------------------------------

def alpha_decay_check(traj, model, params=None, rtol=1e-4):
    """For ``sigma = c alpha**2`` compare ``alpha`` with ``alpha0 exp(-2 c gamma int |Gamma|)``.

    The length integral is the trapezoid rule over the recorded rows.
    """
    if not (isinstance(model, SigmaModel) and model.kind is SigmaKind.QUADRATIC):
        return CheckReport.not_applicable("alpha_decay", "needs the quadratic density")
    _, gamma = _params(traj, params)
    c = float(model.params["scale"])
    t = traj.t
    L = np.asarray(traj["length"])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (L[1:] + L[:-1]))])
    alpha = np.asarray(traj["alpha"])
    pred = alpha[0] * np.exp(-2.0 * c * gamma * integral)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(pred != 0, np.abs(alpha - pred) / np.abs(pred), np.abs(alpha))
    return CheckReport.evaluate("alpha_decay", *_worst(rel, t), rtol)


# -- decay rates -------------------------------------------------------------------------

class DecayFit(NamedTuple):
    rate: float
    r_squared: float


def decay_fit(t, y, window=None, min_points=10):
    """Fit ``y ~ C exp(-rate t)`` on ``window`` (default: second half of ``t``).

    Least squares on ``log y``; returns ``DecayFit(rate, r_squared)``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise FitError("t and y must be matching 1-D arrays")
    if window is None:
        window = (0.5 * t[-1], t[-1])
    sel = (t >= window[0]) & (t <= window[1])
    ts, ys = t[sel], y[sel]
    if ts.size < min_points:
        raise FitError(f"only {ts.size} points in the window, need {min_points}")
    if not np.all(ys > 1e-300):
        raise FitError("decay fit needs strictly positive values")
    logy = np.log(ys)
    slope, intercept = np.polyfit(ts, logy, 1)
    fitted = slope * ts + intercept
    ss_res = float(np.sum((logy - fitted) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 if ss_res == 0 or ss_tot == 0 else 1.0 - ss_res / ss_tot
    return DecayFit(float(-slope), float(r2))


def decay_check(name, t, y, window=None, min_r2=None):
    """Pass when the fitted rate is positive (and ``r_squared >= min_r2`` if given)."""
    y = np.asarray(y, dtype=float)
    if np.all(np.abs(y) <= 1e-300):
        return CheckReport.not_applicable(f"decay[{name}]", "series is identically zero")
    try:
        fit = decay_fit(t, y, window)
    except FitError as exc:
        return CheckReport.not_applicable(f"decay[{name}]", str(exc))
    worst = -fit.rate
    detail = f"rate={fit.rate:.6g}, r2={fit.r_squared:.6f}"
    if min_r2 is not None and fit.r_squared < min_r2:
        worst = max(worst, min_r2 - fit.r_squared)
    return CheckReport(f"decay[{name}]", bool(worst < 0), float(worst), float("nan"),
                       0.0, True, detail)


@dataclass
class AsymptoticsReport:
    status: str
    u_inf: float
    spread: float
    sup_ux: float
    sup_kappa: float
    rates: dict
    r_squared: dict

    def to_dict(self):
        return asdict(self)


def asymptotics_report(traj, window=None, spread_tol=1e-6, kappa_tol=1e-6):
    """Long-time state: the limiting height and how fast it is approached.

    ``status`` is ``"converged"`` when the final curvature is below
    ``kappa_tol`` and the final height is flat to ``spread_tol``, otherwise
    ``"inconclusive"``.
    """
    _require_graph(traj)
    final = traj.snapshots[-1].data
    grid = traj.grid
    u_inf = float(final.mean())
    spread = float(np.abs(final - u_inf).max())
    sup_ux = float(np.abs(d1(final, grid)).max())
    sup_kappa = float(traj["sup_kappa"][-1])
    rates, r2 = {}, {}
    for col in ("h1", "h2", "h3", "sup_kappa"):
        try:
            fit = decay_fit(traj.t, traj[col], window)
        except FitError:
            continue
        rates[col], r2[col] = fit.rate, fit.r_squared
    times = traj.snapshot_times
    dev = np.array([np.abs(s.data - u_inf).max() for s in traj.snapshots])
    try:
        fit = decay_fit(times, dev, window, min_points=3)
        rates["spread"], r2["spread"] = fit.rate, fit.r_squared
    except FitError:
        pass
    ok = sup_kappa < kappa_tol and spread <= spread_tol
    return AsymptoticsReport("converged" if ok else "inconclusive", u_inf, spread,
                             sup_ux, sup_kappa, rates, r2)


# -- refinement studies -------------------------------------------------------------------

def refinement_order(coarse, fine, factor=2.0):
    """Observed order ``log(coarse / fine) / log(factor)``; ``inf`` if both vanish."""
    coarse, fine = abs(float(coarse)), abs(float(fine))
    if fine == 0:
        return math.inf
    if coarse == 0:
        return -math.inf
    return math.log(coarse / fine) / math.log(factor)
