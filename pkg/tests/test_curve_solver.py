import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gbflow.curve_solver import (CurveState, circle, curve_cfl_dt, ellipse, is_convex,
                                 line_tension_residual, polygon_area, polygon_geometry,
                                 reparametrize, run_curve, self_intersects, step_curve)
from gbflow.errors import CFLViolation, ConfigurationError, GeometryError
from gbflow.graph_solver import Params
from gbflow.sigma import AnisotropicSigma, SigmaModel

from oracles import COUPLED_CIRCLE, rk4_polygon

QS = SigmaModel.quadratic_shifted()
QUAD = SigmaModel.quadratic()


def isoperimetric(pts):
    geo = polygon_geometry(pts)
    return geo.total_length ** 2 / (4 * math.pi * polygon_area(pts))


# -- construction and geometry -------------------------------------------------

def test_curve_state_validation():
    with pytest.raises(ConfigurationError):
        CurveState(np.zeros((8, 2)), 0.0)
    pts = circle(1.0, 16).pts.copy()
    pts[3] = pts[2]
    with pytest.raises(GeometryError):
        CurveState(pts, 0.0)
    with pytest.raises(ConfigurationError):
        circle(-1.0)


@pytest.mark.parametrize("m", [16, 64, 256])
def test_regular_polygon_curvature(m):
    R = 0.7
    geo = polygon_geometry(circle(R, m))
    assert np.abs(geo.curvatures * R - 1).max() <= (math.pi / m) ** 2
    # turning-angle formula is exact on a regular polygon
    np.testing.assert_allclose(geo.curvatures, 1 / R, rtol=1e-12)
    np.testing.assert_allclose(geo.turning, 2 * math.pi / m, rtol=1e-12)


def test_polygon_perimeter():
    geo = polygon_geometry(circle(1.0, 256))
    assert abs(geo.total_length - 2 * math.pi) <= 1e-3
    assert geo.total_length == pytest.approx(2 * 256 * math.sin(math.pi / 256), rel=1e-14)


def test_normals_point_inward_for_anticlockwise_circle():
    c = circle(2.0, 64)
    geo = polygon_geometry(c)
    np.testing.assert_allclose(geo.normals, -c.pts / 2.0, atol=1e-12)
    np.testing.assert_allclose(np.hypot(*geo.tangents.T), 1.0, rtol=1e-14)


@given(dx=st.floats(-50, 50), dy=st.floats(-50, 50))
@settings(max_examples=50, deadline=None)
def test_geometry_is_translation_invariant(dx, dy):
    pts = ellipse(2.0, 1.0, 64).pts
    a, b = polygon_geometry(pts), polygon_geometry(pts + [dx, dy])
    np.testing.assert_allclose(b.curvatures, a.curvatures, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(b.lengths, a.lengths, rtol=1e-9)


def test_polygon_area_sign():
    pts = circle(1.0, 128).pts
    assert polygon_area(pts) == pytest.approx(0.5 * 128 * math.sin(2 * math.pi / 128))
    assert polygon_area(pts[::-1]) < 0


def test_ellipse_is_equidistributed():
    geo = polygon_geometry(ellipse(2.0, 1.0, 128))
    assert geo.lengths.std() / geo.lengths.mean() < 1e-3


def test_reparametrize_keeps_shape():
    c = ellipse(2.0, 1.0, 128)
    r = reparametrize(c)
    assert r.m == c.m
    assert polygon_area(r.pts) == pytest.approx(polygon_area(c.pts), rel=1e-4)


def test_convexity_and_self_intersection():
    c = circle(1.0, 32)
    assert is_convex(polygon_geometry(c).turning)
    assert not self_intersects(c.pts)
    th = 2 * np.pi * np.arange(64) / 64
    figure8 = np.column_stack([np.sin(2 * th), np.sin(th)])
    assert self_intersects(figure8)
    r = 1 + 0.5 * np.cos(5 * th)
    star = np.column_stack([r * np.cos(th), r * np.sin(th)])
    assert not is_convex(polygon_geometry(star).turning)
    assert not self_intersects(star)


# -- stepping ----------------------------------------------------------------------

def test_circle_step_shrinks_radius_by_dt():
    c = circle(1.0, 256)
    p = Params(dt=1.0, t_end=1.0)
    dt = 0.9 * curve_cfl_dt(c, p, QS)
    new = step_curve(c, dt, p, QS)
    r = np.hypot(*new.pts.T)
    assert r.mean() == pytest.approx(math.sqrt(1 - 2 * dt), rel=1e-12)
    assert r.mean() == pytest.approx(1 - dt, abs=dt * dt)
    assert new.t == dt


def test_zero_density_leaves_curve_unchanged():
    c = ellipse(2.0, 1.0, 64)
    new = step_curve(c, 1e-3, Params(), QUAD)
    np.testing.assert_array_equal(new.pts, c.pts)
    assert new.alpha == 0.0


def test_cfl_violation_is_an_error():
    c = circle(1.0, 64)
    p = Params()
    with pytest.raises(CFLViolation):
        step_curve(c, 2 * curve_cfl_dt(c, p, QS), p, QS)


def test_ellipse_step_against_fine_rk4():
    c = ellipse(2.0, 1.0, 128)
    p = Params()
    dt = curve_cfl_dt(c, p, QS)
    errs = []
    for h in (dt, dt / 2):
        ref = rk4_polygon(c.pts, h, substeps=50)
        errs.append(np.abs(step_curve(c, h, p, QS).pts - ref).max())
        if h == dt:
            assert errs[0] <= 2e-3 * np.abs(ref - c.pts).max()
    # Heun: local error O(dt**3)
    assert math.log2(errs[0] / errs[1]) >= 2.7
    new = step_curve(c, dt, p, QS)
    assert isoperimetric(new.pts) < isoperimetric(c.pts)
    # the sharp ends at (+-2, 0) move more than the flat sides at (0, +-1)
    disp = np.hypot(*(new.pts - c.pts).T)
    ends = np.abs(c.pts[:, 1]) < 0.05
    sides = np.abs(c.pts[:, 0]) < 0.05
    assert disp[ends].min() > 3 * disp[sides].max()


def test_refuses_nonpositive_stiffness():
    bad = AnisotropicSigma.harmonic(2.0, 1.0, 2)
    with pytest.raises(ConfigurationError, match="stiffness"):
        step_curve(circle(1.0, 64), 1e-6, Params(), bad)
    with pytest.raises(ConfigurationError, match="stiffness"):
        run_curve(circle(1.0, 64), Params(t_end=0.01), bad)


# -- runs ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def shrinking_circle():
    return run_curve(circle(1.0, 256), Params(dt=1.0, t_end=1.0), QS)


def test_circle_extinction_time(shrinking_circle):
    traj, report = shrinking_circle
    assert report.status == "extinct"
    assert report.last_time == pytest.approx(0.5, rel=0.02)
    assert report.extrapolated_time == pytest.approx(0.5, abs=1e-3)
    assert traj.status == "extinct"


def test_circle_radius_law(shrinking_circle):
    traj, _ = shrinking_circle
    exact = np.sqrt(np.maximum(1 - 2 * traj.t, 0))
    keep = exact >= 0.2
    assert np.abs(traj["mean_radius"][keep] / exact[keep] - 1).max() <= 1e-2


def test_circle_stays_round(shrinking_circle):
    traj, _ = shrinking_circle
    assert traj["radius_spread"].max() <= 1e-4


def test_circle_enclosure(shrinking_circle):
    traj, report = shrinking_circle
    for s in traj.snapshots:
        seg = np.hypot(*(np.roll(s.data, -1, axis=0) - s.data).T)
        radius = np.hypot(*(s.data - report.center).T).max()
        assert radius <= math.sqrt(max(1 - 2 * s.t, 0)) + 2 * seg.max()


def test_coupled_circle_against_scalar_oracle():
    traj, _ = run_curve(circle(1.0, 256, alpha=2.0), Params(dt=1.0, t_end=0.29), QS)
    t, r, a = COUPLED_CIRCLE.T
    got = np.interp(t, traj.t, traj["mean_radius"])
    keep = r >= 0.2
    assert np.abs(got[keep] / r[keep] - 1).max() <= 1e-2
    assert np.interp(t, traj.t, traj["alpha"]) == pytest.approx(a, rel=1e-3)


def test_ellipse_run_perimeter_decreases_and_alpha_bounded():
    traj, report = run_curve(ellipse(1.5, 1.0, 128, alpha=1.0), Params(dt=1.0, t_end=0.1), QS)
    assert report.status == "t_end"
    assert np.all(np.diff(traj["length"]) < 0)
    assert np.abs(traj["alpha"]).max() <= 1.0
    assert np.all(np.diff(traj["E"]) <= 0)


def test_run_requires_anticlockwise_curve():
    c = circle(1.0, 32)
    with pytest.raises(GeometryError):
        run_curve(CurveState(c.pts[::-1], 0.0), Params(t_end=0.01), QS)


def test_topology_breakdown_is_reported():
    th = 2 * np.pi * np.arange(128) / 128
    figure8 = np.column_stack([np.sin(2 * th), np.sin(th)])
    # a figure eight has zero signed area; tilt one lobe so it is anticlockwise overall
    figure8[:64] *= 1.3
    traj, report = run_curve(CurveState(figure8, 0.0), Params(dt=1.0, t_end=0.01), QS,
                             reparam_every=1)
    assert report.status == "topology_breakdown"


@given(angle=st.floats(0, 2 * math.pi), shift=st.tuples(st.floats(-5, 5), st.floats(-5, 5)))
@settings(max_examples=10, deadline=None)
def test_rigid_motion_equivariance(angle, shift):
    base = ellipse(1.5, 1.0, 64, alpha=0.5)
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    moved = CurveState(base.pts @ rot.T + shift, 0.5)
    p = Params(dt=1.0, t_end=0.02)
    a, _ = run_curve(base, p, QS, snapshot_every=10 ** 6)
    b, _ = run_curve(moved, p, QS, snapshot_every=10 ** 6)
    scale = 1.0 + np.hypot(*shift)
    expected = a.snapshots[-1].data @ rot.T + shift
    assert np.abs(b.snapshots[-1].data - expected).max() <= 1e-9 * scale
    np.testing.assert_allclose(b["length"], a["length"], rtol=1e-9)


# -- line tension --------------------------------------------------------------------

def test_line_tension_isotropic_order():
    iso = AnisotropicSigma.isotropic(QS)
    res = [line_tension_residual(circle(1.0, m), iso, 0.0) for m in (128, 256)]
    assert math.log2(res[0] / res[1]) >= 1.5


def test_line_tension_harmonic_at_256():
    s = AnisotropicSigma.harmonic(2.0, 1.0, 2)
    assert line_tension_residual(circle(1.0, 256), s, 0.0) <= 1e-2


def test_line_tension_vanishes_for_zero_density():
    zero = AnisotropicSigma.isotropic(QUAD)
    assert line_tension_residual(circle(1.0, 64), zero, 0.0) == 0.0
