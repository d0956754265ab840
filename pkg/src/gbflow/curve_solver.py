"""Front tracking for closed curves moving by (anisotropic) curvature.

A curve is a closed polygon with vertices listed anticlockwise.  Each vertex
moves along its inward unit normal with speed ``mu * S * kappa``, where
``S = sigma(alpha)`` for isotropic densities and ``S = sigma_thth + sigma``
(evaluated at the normal angle) for anisotropic ones.  Time stepping is
explicit; vertices are redistributed to equal arclength every few steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CFLViolation, ConfigurationError, DivergenceError, GeometryError
from .graph_solver import Params
from .sigma import AnisotropicSigma
from .trajectory import CURVE_COLUMNS, Snapshot, Trajectory

MIN_SEGMENT = 1e-12
#: a vertex turning by more than this (radians) counts as a curvature blow-up
MAX_TURN = 0.75 * math.pi


@dataclass(frozen=True)
class CurveState:
    """Closed polygon ``pts`` (shape ``(m, 2)``, implicit wraparound)."""

    pts: np.ndarray
    alpha: float
    t: float = 0.0

    def __post_init__(self):
        pts = np.array(self.pts, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 16:
            raise ConfigurationError(f"curve needs an (m, 2) array with m >= 16, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ConfigurationError("curve has non-finite coordinates")
        if not math.isfinite(self.alpha):
            raise ConfigurationError("alpha must be finite")
        if not self.t >= 0:
            raise ConfigurationError("t must be nonnegative")
        seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        if seg.min() <= MIN_SEGMENT:
            raise GeometryError("curve has repeated consecutive vertices")
        pts.setflags(write=False)
        object.__setattr__(self, "pts", pts)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "t", float(self.t))

    @property
    def m(self):
        return self.pts.shape[0]


@dataclass
class PolygonGeometry:
    lengths: np.ndarray      # |e_i|, edge i joins vertex i to i+1
    tangents: np.ndarray     # unit vertex tangents
    normals: np.ndarray      # tangents rotated by +pi/2
    curvatures: np.ndarray   # signed vertex curvature
    total_length: float
    ds: np.ndarray           # dual cell length (|e_{i-1}| + |e_i|) / 2
    turning: np.ndarray      # signed turning angle at each vertex


def circle(R=1.0, m=256, center=(0.0, 0.0), alpha=0.0):
    """Regular ``m``-gon inscribed in the circle of radius ``R``."""
    if not R > 0:
        raise ConfigurationError("circle radius must be positive")
    th = 2.0 * np.pi * np.arange(m) / m
    pts = np.column_stack([center[0] + R * np.cos(th), center[1] + R * np.sin(th)])
    return CurveState(pts, alpha)


def ellipse(a=2.0, b=1.0, m=256, center=(0.0, 0.0), alpha=0.0):
    """Ellipse with semi-axes ``a``, ``b``, sampled uniformly in arclength."""
    if not (a > 0 and b > 0):
        raise ConfigurationError("ellipse semi-axes must be positive")
    th = 2.0 * np.pi * np.arange(4 * m) / (4 * m)
    fine = np.column_stack([center[0] + a * np.cos(th), center[1] + b * np.sin(th)])
    return CurveState(_resample(fine, m), alpha)


def _next(a):
    return np.concatenate((a[1:], a[:1]))


def _prev(a):
    return np.concatenate((a[-1:], a[:-1]))


def polygon_geometry(pts):
    """Edge lengths, vertex frames, turning-angle curvature and perimeter."""
    pts = pts.pts if isinstance(pts, CurveState) else np.asarray(pts, dtype=float)
    e = _next(pts) - pts
    lengths = np.hypot(e[:, 0], e[:, 1])
    if lengths.min() <= MIN_SEGMENT:
        raise GeometryError("degenerate polygon: repeated vertex")
    unit = e / lengths[:, None]
    prev = _prev(unit)
    cross = prev[:, 0] * unit[:, 1] - prev[:, 1] * unit[:, 0]
    dot = prev[:, 0] * unit[:, 0] + prev[:, 1] * unit[:, 1]
    turning = np.arctan2(cross, dot)
    ds = 0.5 * (lengths + _prev(lengths))
    kappa = 2.0 * np.sin(0.5 * turning) / ds
    tan = prev + unit
    norm = np.hypot(tan[:, 0], tan[:, 1])
    if norm.min() <= MIN_SEGMENT:
        raise GeometryError("polygon folds back on itself")
    tan /= norm[:, None]
    normals = np.column_stack([-tan[:, 1], tan[:, 0]])
    return PolygonGeometry(lengths, tan, normals, kappa, float(lengths.sum()), ds, turning)


def polygon_area(pts):
    """Signed shoelace area; positive for anticlockwise polygons."""
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, _next(y)) - np.dot(_next(x), y))


# -- sigma dispatch ----------------------------------------------------------

def _speed_factor(model, normals, alpha):
    """``S`` at every vertex: sigma or the stiffness sigma_thth + sigma."""
    if isinstance(model, AnisotropicSigma):
        theta = np.arctan2(normals[:, 1], normals[:, 0])
        return np.asarray(model.stiffness(theta, alpha), dtype=float)
    return np.full(normals.shape[0], model.value(alpha))


def _alpha_drive(model, geo, alpha):
    """Discrete ``int_Gamma sigma_alpha dH^1``."""
    if isinstance(model, AnisotropicSigma):
        theta = np.arctan2(geo.normals[:, 1], geo.normals[:, 0])
        return float(np.dot(model.d_alpha(theta, alpha), geo.ds))
    return model.deriv(alpha) * geo.total_length


def _curve_energy(model, geo, alpha):
    if isinstance(model, AnisotropicSigma):
        theta = np.arctan2(geo.normals[:, 1], geo.normals[:, 0])
        return float(np.dot(model.value(theta, alpha), geo.ds))
    return model.value(alpha) * geo.total_length


def _check_stiffness(model, alpha):
    if isinstance(model, AnisotropicSigma) and model.min_stiffness(alpha) <= 0:
        raise ConfigurationError(
            "anisotropic sigma has nonpositive stiffness sigma_thth + sigma; "
            "the curve evolution is ill-posed")


def curve_cfl_dt(curve, params, model, geo=None):
    """Largest explicit step ``cfl_safety * min_seg**2 / (mu * max S)``."""
    geo = polygon_geometry(curve) if geo is None else geo
    s_max = float(np.max(_speed_factor(model, geo.normals, curve.alpha)))
    if s_max <= 0:
        return math.inf
    return params.cfl_safety * float(geo.lengths.min()) ** 2 / (params.mu * s_max)


def _velocity(model, geo, alpha, params):
    s = _speed_factor(model, geo.normals, alpha)
    v = (params.mu * s * geo.curvatures)[:, None] * geo.normals
    return v, -params.gamma * _alpha_drive(model, geo, alpha)


def _advance_curve(pts, alpha, dt, params, model, geo):
    """Heun step for vertices and misorientation together.

    Forward Euler would leave an ``O(dt)`` drift in the squared radius of a
    shrinking circle, which is visible against the segment length once the
    circle is small.  May raise :class:`GeometryError` from the predictor.
    """
    v0, a0 = _velocity(model, geo, alpha, params)
    pred_pts, pred_alpha = pts + dt * v0, alpha + dt * a0
    v1, a1 = _velocity(model, polygon_geometry(pred_pts), pred_alpha, params)
    return pts + 0.5 * dt * (v0 + v1), float(alpha + 0.5 * dt * (a0 + a1))


def step_curve(curve: CurveState, dt, params: Params, model):
    """One explicit step; raises :class:`CFLViolation` if ``dt`` is too large."""
    _check_stiffness(model, curve.alpha)
    geo = polygon_geometry(curve)
    limit = curve_cfl_dt(curve, params, model, geo)
    if dt > limit * (1 + 1e-12):
        raise CFLViolation(f"dt={dt:.3e} exceeds the explicit limit {limit:.3e}")
    pts, alpha = _advance_curve(curve.pts, curve.alpha, dt, params, model, geo)
    if not (np.all(np.isfinite(pts)) and math.isfinite(alpha)):
        raise DivergenceError("non-finite curve coordinates", t=curve.t + dt)
    return CurveState(pts, alpha, curve.t + dt)


# -- redistribution and topology ----------------------------------------------

def _resample(pts, m):
    closed = np.vstack([pts, pts[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.arange(m) * (s[-1] / m)
    return np.column_stack([np.interp(target, s, closed[:, 0]),
                            np.interp(target, s, closed[:, 1])])


def reparametrize(curve: CurveState):
    """Redistribute the vertices to equal arclength, keeping vertex 0 fixed."""
    return CurveState(_resample(curve.pts, curve.m), curve.alpha, curve.t)


def is_convex(turning):
    """All turns one way and one full revolution: a simple convex polygon."""
    return bool(np.all(turning > 0) and abs(turning.sum() - 2 * np.pi) < 1e-8)


def self_intersects(pts):
    """Segment-pair intersection test over all non-adjacent edges."""
    a = pts
    b = np.roll(pts, -1, axis=0)

    def orient(p, q, r):
        # sign of (q - p) x (r - p), broadcast over the edge pairs
        return np.sign((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                       - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    A, B = a[:, None, :], b[:, None, :]
    C, D = a[None, :, :], b[None, :, :]
    o1, o2 = orient(A, B, C), orient(A, B, D)
    o3, o4 = orient(C, D, A), orient(C, D, B)
    hit = (o1 * o2 < 0) & (o3 * o4 < 0)
    m = len(pts)
    idx = np.arange(m)
    gap = np.abs(idx[:, None] - idx[None, :])
    near = (gap <= 1) | (gap >= m - 1)
    return bool(np.any(hit & ~near))


# -- driver --------------------------------------------------------------------

@dataclass
class ExtinctionReport:
    """How a curve run ended.

    ``status`` is one of ``"t_end"``, ``"extinct"``, ``"curvature_overflow"``
    or ``"topology_breakdown"``.  ``extrapolated_time`` adds the time the
    enclosed area needs to vanish at the isotropic rate ``2 pi mu sigma``.
    """

    status: str
    last_time: float
    final_perimeter: float
    final_area: float
    extrapolated_time: float
    times: np.ndarray = field(repr=False)
    enclosing_radius: np.ndarray = field(repr=False)
    center: tuple = (0.0, 0.0)

    def to_dict(self):
        return {"status": self.status, "last_time": self.last_time,
                "final_perimeter": self.final_perimeter,
                "final_area": self.final_area,
                "extrapolated_time": self.extrapolated_time,
                "center": list(self.center)}


def run_curve(curve0: CurveState, params: Params, model, reparam_every=10,
              snapshot_every=50, extinction_threshold=None, center=None):
    """Integrate a closed curve until ``t_end`` or extinction.

    The step adapts to the explicit limit each step.  ``center`` fixes the
    point about which the enclosing radius is measured (default: the vertex
    mean of ``curve0``).  Returns ``(Trajectory, ExtinctionReport)``.
    """
    if int(reparam_every) != reparam_every or reparam_every < 1:
        raise ConfigurationError("reparam_every must be a positive integer")
    if int(snapshot_every) != snapshot_every or snapshot_every < 1:
        raise ConfigurationError("snapshot_every must be a positive integer")
    _check_stiffness(model, curve0.alpha)
    geo = polygon_geometry(curve0)
    if polygon_area(curve0.pts) <= 0:
        raise GeometryError("curve must be oriented anticlockwise")
    if extinction_threshold is None:
        extinction_threshold = 10.0 * float(geo.lengths.min())
    c = np.mean(curve0.pts, axis=0) if center is None else np.asarray(center, float)

    rows = {name: [] for name in CURVE_COLUMNS}
    snapshots = []
    pts, alpha, t = np.array(curve0.pts), curve0.alpha, 0.0
    status = "t_end"
    k = 0
    dt_used = []

    while True:
        area = polygon_area(pts)
        r = np.hypot(pts[:, 0] - pts[:, 0].mean(), pts[:, 1] - pts[:, 1].mean())
        rows["t"].append(t)
        rows["alpha"].append(alpha)
        rows["E"].append(_curve_energy(model, geo, alpha))
        rows["length"].append(geo.total_length)
        rows["sup_kappa"].append(float(np.abs(geo.curvatures).max()))
        rows["area"].append(area)
        rows["mean_radius"].append(float(r.mean()))
        rows["radius_spread"].append(float(r.max() - r.min()))
        rows["enclosing_radius"].append(float(np.hypot(*(pts - c).T).max()))

        done = t >= params.t_end
        if geo.total_length < extinction_threshold:
            status, done = "extinct", True
        elif np.abs(geo.turning).max() > MAX_TURN:
            status, done = "curvature_overflow", True
        if k % snapshot_every == 0 or done:
            snapshots.append(Snapshot(k, t, alpha, pts.copy()))
        if done:
            break

        s_max = float(np.max(_speed_factor(model, geo.normals, alpha)))
        limit = (params.cfl_safety * float(geo.lengths.min()) ** 2 / (params.mu * s_max)
                 if s_max > 0 else math.inf)
        dt = min(params.dt, limit, params.t_end - t)
        try:
            pts, alpha = _advance_curve(pts, alpha, dt, params, model, geo)
        except GeometryError:
            status = "curvature_overflow"
            break
        if not (np.all(np.isfinite(pts)) and math.isfinite(alpha)):
            raise DivergenceError("non-finite curve coordinates", step=k + 1, t=t + dt)
        k += 1
        t = params.t_end if dt == params.t_end - t else t + dt
        dt_used.append(dt)
        if k % reparam_every == 0:
            geo = polygon_geometry(pts)
            if not is_convex(geo.turning) and self_intersects(pts):
                status = "topology_breakdown"
            pts = _resample(pts, len(pts))
        try:
            geo = polygon_geometry(pts)
        except GeometryError:
            status = "curvature_overflow"
            snapshots.append(Snapshot(k, t, alpha, pts.copy()))
            break
        if status == "topology_breakdown":
            snapshots.append(Snapshot(k, t, alpha, pts.copy()))
            break

    rows = {name: np.asarray(v, dtype=float) for name, v in rows.items()}
    final_area = float(rows["area"][-1])
    sigma_now = float(np.mean(_speed_factor(model, geo.normals, alpha))) if status != "curvature_overflow" \
        else float("nan")
    extra = final_area / (2 * np.pi * params.mu * sigma_now) if sigma_now > 0 else math.inf
    report = ExtinctionReport(status, float(rows["t"][-1]), float(rows["length"][-1]),
                              final_area, float(rows["t"][-1]) + extra,
                              rows["t"], rows["enclosing_radius"], (float(c[0]), float(c[1])))
    meta = {"m": int(curve0.m), "mu": params.mu, "gamma": params.gamma,
            "t_end": params.t_end, "reparam_every": int(reparam_every),
            "snapshot_every": int(snapshot_every),
            "extinction_threshold": float(extinction_threshold),
            "dt_min": float(min(dt_used)) if dt_used else 0.0,
            "dt_requested": params.dt, "center": [float(c[0]), float(c[1])]}
    nominal = float(np.mean(dt_used)) if dt_used else 0.0
    return Trajectory("curve", nominal, rows, snapshots, meta, status=status), report


def line_tension_residual(curve, model: AnisotropicSigma, alpha=None):
    """Max-norm defect of ``T_s = (sigma_thth + sigma) kappa n`` at the vertices.

    ``T = sigma_theta n + sigma b`` is formed at every vertex from the normal
    angle and differentiated along the polygon by centred differences.
    """
    pts = curve.pts if isinstance(curve, CurveState) else np.asarray(curve, float)
    if alpha is None:
        alpha = curve.alpha
    geo = polygon_geometry(pts)
    theta = np.arctan2(geo.normals[:, 1], geo.normals[:, 0])
    sig = np.asarray(model.value(theta, alpha), dtype=float)
    sig_t = np.asarray(model.d_theta(theta, alpha), dtype=float)
    T = sig_t[:, None] * geo.normals + sig[:, None] * geo.tangents
    span = geo.lengths + np.roll(geo.lengths, 1)
    Ts = (np.roll(T, -1, axis=0) - np.roll(T, 1, axis=0)) / span[:, None]
    S = np.asarray(model.stiffness(theta, alpha), dtype=float)
    target = (S * geo.curvatures)[:, None] * geo.normals
    return float(np.hypot(*(Ts - target).T).max())
