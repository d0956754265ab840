"""End-to-end acceptance criteria, one test (or a small group) per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
one PASS/FAIL line per criterion together with the measured numbers.
"""

import math
import time

import numpy as np
import pytest

from gbflow.cli import EXIT_OK, main
from gbflow.config import random_sine_params
from gbflow.curve_solver import circle, line_tension_residual, run_curve
from gbflow.diagnostics import (WeightFunction, alpha_decay_check, bound_checks, decay_fit,
                                dissipation_residual, monotonicity_series, refinement_order)
from gbflow.geometry import Grid1D
from gbflow.graph_solver import Params, run
from gbflow.kernel import BackwardKernel, kernel_identity_residual
from gbflow.sigma import AnisotropicSigma, SigmaModel
from gbflow.studies import kernel_ladder

from oracles import COUPLED_CIRCLE

QS = SigmaModel.quadratic_shifted()
QUAD = SigmaModel.quadratic()
TWO_PI = 2 * math.pi

# every trajectory built here is also checked against the a priori bounds
SUITE = {}


def _keep(name, traj, model):
    SUITE[name] = (traj, model)
    return traj


def sine(n, a, k=1, b=0.0):
    return a * np.sin(TWO_PI * k * Grid1D(n).x) + b


# -- 1. explicit solution ---------------------------------------------------------------

@pytest.mark.acceptance(1, "explicit solution: alpha(1) = c2/e, u unchanged, < 1 s")
def test_explicit_solution(measure):
    c1, c2, n = 0.3, 2.0, 128
    g = Grid1D(n)
    start = time.perf_counter()
    # the criterion fixes dt = 1e-4, so the stability cap is bypassed
    traj = run(np.full(n, c1), c2, g, Params(dt=1e-4, t_end=1.0), QS, snapshot_every=1000,
               cap_dt=False)
    assert traj.dt == 1e-4
    wall = time.perf_counter() - start
    _keep("explicit", traj, QS)
    rel = abs(traj["alpha"][-1] / (c2 * math.exp(-1)) - 1)
    drift = float(np.abs(traj.snapshots[-1].data - c1).max())
    measure(alpha_rel=rel, u_drift=drift, seconds=wall)
    assert rel <= 1e-6
    assert drift <= 1e-13
    assert wall < 1.0


# -- 2. shrinking circle ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def circle_run():
    start = time.perf_counter()
    traj, report = run_curve(circle(1.0, 256), Params(mu=1.0, dt=1.0, t_end=1.0), QS)
    return traj, report, time.perf_counter() - start


@pytest.mark.acceptance(2, "shrinking circle: r = sqrt(1 - 2t), extinction 0.5, < 10 s")
def test_shrinking_circle(circle_run, measure):
    traj, report, wall = circle_run
    _keep("circle", traj, QS)
    exact = np.sqrt(np.maximum(1 - 2 * traj.t, 0))
    keep = exact >= 0.2
    rel = float(np.abs(traj["mean_radius"][keep] / exact[keep] - 1).max())
    measure(radius_rel=rel, extinction=report.extrapolated_time, last_time=report.last_time,
            seconds=wall)
    assert report.status == "extinct"
    assert rel <= 1e-2
    assert abs(report.extrapolated_time - 0.5) <= 0.01
    assert abs(report.last_time - 0.5) <= 0.01
    assert wall < 10.0


# -- 3. coupled circle --------------------------------------------------------------------------------

@pytest.mark.acceptance(3, "coupled circle against the scalar ODE oracle")
def test_coupled_circle(measure):
    traj, _ = run_curve(circle(1.0, 256, alpha=2.0), Params(gamma=1.0, dt=1.0, t_end=0.29), QS)
    _keep("coupled_circle", traj, QS)
    t, r, _ = COUPLED_CIRCLE.T
    keep = r >= 0.2
    got = np.interp(t[keep], traj.t, traj["mean_radius"])
    rel = float(np.abs(got / r[keep] - 1).max())
    measure(radius_rel=rel, r_last=float(r[keep][-1]))
    assert rel <= 1e-2


# -- 4. dissipation identity ------------------------------------------------------------------------

T_DISS = 0.02


@pytest.fixture(scope="module")
def dissipation_runs():
    runs = {}
    for n in (128, 256):
        g = Grid1D(n)
        runs[n] = run(sine(n, 0.2), 1.0, g, Params(dt=1.0, t_end=T_DISS), QS, snapshot_every=1)
    return runs


@pytest.mark.acceptance(4, "dissipation identity at n=256 and its refinement order")
def test_dissipation_identity(dissipation_runs, measure):
    worst = {}
    for n, traj in dissipation_runs.items():
        _keep(f"dissipation_{n}", traj, QS)
        _, res, _ = dissipation_residual(traj, QS)
        worst[n] = float(np.abs(res).max())
    traj = dissipation_runs[256]
    slope = float(np.abs(np.diff(traj["E"]) / traj.dt).max())
    rel = worst[256] / slope
    order = refinement_order(worst[128], worst[256])
    measure(relative=rel, order=order, dt=traj.dt)
    assert rel <= 1e-3
    assert order >= 1.5


# -- 5. monotonicity and kernel identity ---------------------------------------------------------------

@pytest.mark.acceptance(5, "weighted monotonicity and backward kernel identity")
def test_weighted_monotonicity(dissipation_runs, measure):
    traj = dissipation_runs[256]
    _, M, report = monotonicity_series(traj, QS, weight=WeightFunction.AREA_ELEMENT)
    measure(mono_worst=report.worst_violation, mono_eps=report.tolerance)
    assert report.applicable
    assert report.passed


@pytest.mark.acceptance(5, "weighted monotonicity and backward kernel identity")
def test_kernel_identity_exact_sigma(rng, measure):
    c2, gamma = 1.0, 1.0

    def sigma(t):
        return 1.0 + 0.5 * c2 * c2 * np.exp(-2 * gamma * np.asarray(t))

    def integral(t):
        return t + c2 * c2 / (4 * gamma) * (1 - np.exp(-2 * gamma * t))

    k = BackwardKernel.exact([0.0, 0.0], 1.0, 1.0, sigma, integral)
    worst = 0.0
    for _ in range(100):
        X = rng.uniform(-1.5, 1.5, 2)
        t = rng.uniform(0.0, 0.95)
        ang = rng.uniform(0, TWO_PI)
        worst = max(worst, float(kernel_identity_residual(k, X, t, (math.cos(ang), math.sin(ang)))))
    errors, order = kernel_ladder(sigma, 1.0, levels=3)
    measure(identity_worst=worst, ladder_order=order)
    assert worst <= 1e-10
    assert order == pytest.approx(2.0, abs=0.2)


# -- 7. decay rates ----------------------------------------------------------------------------------

@pytest.mark.acceptance(7, "decay rates: positive, well fitted, ordered; h1 rate vs linear theory")
def test_decay_rates(measure):
    g = Grid1D(64)
    traj = run(sine(64, 0.1), 0.0, g, Params(dt=1.0, t_end=0.5), QS, snapshot_every=10 ** 6)
    _keep("decay_0.1", traj, QS)
    fits = {col: decay_fit(traj.t, traj[col]) for col in ("h1", "h2", "h3", "sup_kappa")}
    for col, fit in fits.items():
        assert fit.rate > 0, col
        assert fit.r_squared >= 0.99, col
    # sup|kappa| <= (int u_xxx**2)**(1/2), so its rate is at least half the h3 rate
    assert fits["sup_kappa"].rate >= 0.5 * fits["h3"].rate * (1 - 1e-2)

    small = run(sine(128, 1e-3), 0.0, Grid1D(128), Params(dt=1.0, t_end=0.5), QS,
                snapshot_every=10 ** 6)
    _keep("decay_0.001", small, QS)
    rate = decay_fit(small.t, small["h1"]).rate
    predicted = 2 * 1.0 * TWO_PI ** 2
    measure(h1_rate=rate, predicted=predicted, kappa_rate=fits["sup_kappa"].rate,
            min_r2=min(f.r_squared for f in fits.values()))
    assert abs(rate / predicted - 1) <= 0.15


# -- 8. alpha decay with degenerate density -----------------------------------------------------------

@pytest.mark.acceptance(8, "alpha decay with the degenerate density")
def test_alpha_decay(measure):
    g = Grid1D(128)
    traj = run(sine(128, 0.2), 1.0, g, Params(gamma=1.0, dt=1e-3, t_end=1.0), QUAD)
    _keep("alpha_decay", traj, QUAD)
    report = alpha_decay_check(traj, QUAD, rtol=1e-4)
    rate = decay_fit(traj.t, traj["alpha"]).rate
    measure(alpha_rel=report.worst_violation, alpha_rate=rate)
    assert report.passed
    assert rate >= 0.99


# -- 9. line tension identity -----------------------------------------------------------------------------

@pytest.mark.acceptance(9, "line tension identity converges on refined circles")
def test_line_tension(measure):
    s = AnisotropicSigma.harmonic(2.0, 1.0, 2)
    res = {m: line_tension_residual(circle(1.0, m), s, 0.0) for m in (128, 512)}
    order = refinement_order(res[128], res[512], factor=4.0)
    measure(res_128=res[128], res_512=res[512], order=order)
    assert order >= 1.5


# -- 6. a priori bounds (after the suite runs above) -------------------------------------------------------

@pytest.mark.acceptance(6, "a priori bounds on every suite run and 20 random sines")
def test_bounds_on_suite(measure):
    assert len(SUITE) >= 8, "run the whole module so the suite is populated"
    for name, (traj, model) in SUITE.items():
        for r in bound_checks(traj, model):
            assert r.passed, (name, r)
    measure(suite_runs=len(SUITE))


@pytest.mark.acceptance(6, "a priori bounds on every suite run and 20 random sines")
def test_gradient_bound_random_sines(measure):
    g = Grid1D(64)
    worst = -math.inf
    for seed in range(20):
        a, k, b = random_sine_params(seed)
        traj = run(sine(64, a, k, b), 1.0, g, Params(dt=1.0, t_end=0.02), QS,
                   snapshot_every=10 ** 6)
        reports = {r.name: r for r in bound_checks(traj, QS)}
        for r in reports.values():
            assert r.passed, (seed, r)
        worst = max(worst, reports["gradient"].worst_violation)
    measure(gradient_worst=worst)


# -- 10. determinism -----------------------------------------------------------------------------------------

VERIFY_SUITE = [
    ["--initial", "constant 0.3", "--alpha0", "2", "--n", "64", "--t-end", "0.2"],
    ["--initial", "sine 0.2 1", "--alpha0", "1", "--n", "64", "--t-end", "0.02"],
    ["--initial", "random_sine", "--seed", "3", "--n", "64", "--t-end", "0.02"],
    ["--initial", "sine 0.2 1", "--sigma", "quadratic", "--alpha0", "1", "--n", "64",
     "--t-end", "0.1"],
    ["--mode", "curve", "--initial", "ellipse 1.5 1", "--m", "64", "--alpha0", "1",
     "--t-end", "0.05"],
]


@pytest.mark.acceptance(10, "determinism: identical diagnostics CSVs across two verify passes")
def test_determinism(tmp_path, measure):
    files = 0
    for i, argv in enumerate(VERIFY_SUITE):
        for rep in ("a", "b"):
            assert main(["verify", *argv, "--out", str(tmp_path / rep / str(i))]) == EXIT_OK
        for name in ("diagnostics.csv", "verify.json"):
            first = (tmp_path / "a" / str(i) / name).read_bytes()
            assert first == (tmp_path / "b" / str(i) / name).read_bytes(), (argv, name)
            files += 1
    measure(files_compared=files)
