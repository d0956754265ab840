import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gbflow.config import (RunConfig, build_model, build_sigma, curve_initial, graph_initial,
                           random_sine_params)
from gbflow.errors import ConfigurationError, RunFormatError
from gbflow.geometry import Grid1D
from gbflow.graph_solver import Params, run
from gbflow.curve_solver import circle, run_curve
from gbflow.io import load_run, read_csv, write_csv, write_run
from gbflow.sigma import AnisotropicSigma, SigmaKind, SigmaModel

QS = SigmaModel.quadratic_shifted()


# -- config files ---------------------------------------------------------------------

def test_sections_flatten_into_fields(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[run]\nmode = graph\nn = 64\ninitial = sine 0.2 1\n\n"
                    "[sigma]\nkind = quadratic\nscale = 2\n\n[params]\nmu = 2\nt_end = 0.5\n")
    cfg = RunConfig.from_file(path)
    assert (cfg.n, cfg.mu, cfg.t_end) == (64, 2.0, 0.5)
    assert cfg.sigma == "quadratic" and cfg.sigma_scale == 2.0
    assert build_sigma(cfg).kind is SigmaKind.QUADRATIC


def test_sectionless_file_and_overrides(tmp_path):
    path = tmp_path / "flat.ini"
    path.write_text("alpha0 = 1\ndt = 1e-4\n")
    cfg = RunConfig.from_file(path, overrides={"alpha0": "2.5"})
    assert cfg.alpha0 == 2.5 and cfg.dt == "1e-4"


def test_defaults():
    cfg = RunConfig()
    assert cfg.dt == "auto" and cfg.scheme == "euler"
    assert cfg.initial_spec == "sine 0.1 1"
    assert RunConfig(mode="curve").initial_spec == "circle 1"


@pytest.mark.parametrize("values, field", [
    ({"mode": "surface"}, "mode"),
    ({"n": "abc"}, "n"),
    ({"n": "4"}, "n"),
    ({"mu": "0"}, "mu"),
    ({"t_end": "nan"}, "t_end"),
    ({"dt": "fast"}, "dt"),
    ({"dt": "-1"}, "dt"),
    ({"snapshot_every": "0"}, "snapshot_every"),
    ({"wibble": "1"}, "wibble"),
])
def test_invalid_values_name_the_field(values, field):
    with pytest.raises(ConfigurationError, match=field):
        RunConfig.from_dict(values)


def test_unknown_key_in_file(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[params]\nlambda = 1\n")
    with pytest.raises(ConfigurationError, match="lambda"):
        RunConfig.from_file(path)


def test_to_dict_round_trip():
    cfg = RunConfig.from_dict({"mode": "curve", "m": "64", "initial": "ellipse 2 1"})
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    assert cfg.replace(m=128).m == 128


# -- presets --------------------------------------------------------------------------------

def test_graph_presets():
    grid, u = graph_initial(RunConfig(n=32, initial="constant 0.5"))
    assert grid.n == 32 and np.all(u == 0.5)
    _, u = graph_initial(RunConfig(n=64, initial="sine 0.2 2 0.1"))
    np.testing.assert_allclose(u, 0.2 * np.sin(4 * np.pi * np.arange(64) / 64) + 0.1)
    _, u1 = graph_initial(RunConfig(n=32, initial="random_sine 7"))
    _, u2 = graph_initial(RunConfig(n=32, initial="random_sine", seed=7))
    np.testing.assert_array_equal(u1, u2)


@pytest.mark.parametrize("spec", ["sine 1", "sine 1 1.5", "constant", "circle 1", "nofile.csv"])
def test_bad_graph_presets(spec):
    with pytest.raises(ConfigurationError, match="initial"):
        graph_initial(RunConfig(initial=spec))


def test_curve_presets_and_sample_files(tmp_path):
    c = curve_initial(RunConfig(mode="curve", m=32, initial="ellipse 2 1", alpha0=0.5))
    assert c.m == 32 and c.alpha == 0.5
    write_csv(tmp_path / "shape.csv", ("x", "y"), {"x": c.pts[:, 0], "y": c.pts[:, 1]})
    again = curve_initial(RunConfig(mode="curve", initial="shape.csv"), base_dir=tmp_path)
    np.testing.assert_array_equal(again.pts, c.pts)
    write_csv(tmp_path / "u.csv", ("x", "u"), {"x": np.arange(16) / 16, "u": np.arange(16.0)})
    grid, u = graph_initial(RunConfig(initial=str(tmp_path / "u.csv")))
    assert grid.n == 16 and u[5] == 5.0


def test_anisotropy_only_in_curve_mode():
    model = build_model(RunConfig(mode="curve", anisotropy="harmonic 2 1 2"))
    assert isinstance(model, AnisotropicSigma)
    with pytest.raises(ConfigurationError, match="anisotropy"):
        build_model(RunConfig(anisotropy="harmonic 2 1 2"))


@given(seed=st.integers(0, 2 ** 32 - 1))
@settings(max_examples=50, deadline=None)
def test_random_sine_params_in_range(seed):
    a, k, b = random_sine_params(seed)
    assert 0 <= a <= 2 and k in (1, 2, 3) and -1 <= b <= 1
    assert random_sine_params(seed) == (a, k, b)


# -- csv ------------------------------------------------------------------------------------------

def test_csv_round_trip_is_exact(tmp_path, rng):
    data = {"a": rng.normal(size=20) * 1e-300, "b": rng.normal(size=20) * 1e300}
    write_csv(tmp_path / "x.csv", ("a", "b"), data)
    back = read_csv(tmp_path / "x.csv")
    np.testing.assert_array_equal(back["a"], data["a"])
    np.testing.assert_array_equal(back["b"], data["b"])
    first = (tmp_path / "x.csv").read_text().splitlines()[1].split(",")[0]
    assert len(first.lstrip("-").split("e")[0].replace(".", "")) == 17


def test_csv_errors_carry_line_numbers(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,u\n0,1\n0.5,oops\n")
    with pytest.raises(RunFormatError, match="line 3"):
        read_csv(bad)
    bad.write_text("x,u\n0,1\n0.5\n")
    with pytest.raises(RunFormatError, match="line 3"):
        read_csv(bad)
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(RunFormatError, match="empty"):
        read_csv(tmp_path / "empty.csv")
    with pytest.raises(RunFormatError):
        read_csv(tmp_path / "missing.csv")


# -- run directories ---------------------------------------------------------------------------

def test_graph_run_round_trip(tmp_path):
    g = Grid1D(32)
    traj = run(0.2 * np.sin(2 * math.pi * g.x), 1.0, g, Params(dt=1.0, t_end=0.005), QS,
               snapshot_every=10)
    write_run(tmp_path / "r", traj, {"note": "x"})
    back, manifest = load_run(tmp_path / "r")
    assert manifest["note"] == "x" and manifest["kind"] == "graph"
    for name in traj.rows:
        np.testing.assert_array_equal(back[name], traj[name])
    assert [s.step for s in back.snapshots] == [s.step for s in traj.snapshots]
    np.testing.assert_array_equal(back.snapshots[-1].data, traj.snapshots[-1].data)
    header = (tmp_path / "r" / "diagnostics.csv").read_text().splitlines()[0]
    assert header == "t,alpha,E,length,sup_v,sup_u,h1,h2,h3,sup_kappa"
    names = sorted(p.name for p in (tmp_path / "r" / "snapshots").iterdir())
    assert names[0] == "snap_000000.csv"
    assert read_csv(tmp_path / "r" / "snapshots" / names[0]).keys() == {"x", "u"}


def test_curve_run_round_trip(tmp_path):
    traj, _ = run_curve(circle(1.0, 32), Params(dt=1.0, t_end=0.01), QS)
    write_run(tmp_path / "c", traj, {})
    back, _ = load_run(tmp_path / "c")
    assert back.kind == "curve"
    np.testing.assert_array_equal(back.snapshots[-1].data, traj.snapshots[-1].data)
    np.testing.assert_array_equal(back["mean_radius"], traj["mean_radius"])


def test_load_run_errors(tmp_path):
    with pytest.raises(RunFormatError):
        load_run(tmp_path / "nowhere")
    with pytest.raises(RunFormatError, match="manifest"):
        load_run(tmp_path)
    (tmp_path / "manifest.json").write_text("{\n  bad json\n")
    with pytest.raises(RunFormatError, match="line 2"):
        load_run(tmp_path)
    (tmp_path / "manifest.json").write_text('{"kind": "surface"}')
    with pytest.raises(RunFormatError, match="kind"):
        load_run(tmp_path)


def test_inline_comments(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[run]\nmode = graph   ; or curve\nn = 64  # grid\n[params]\ndt = auto ; cap\n")
    cfg = RunConfig.from_file(path)
    assert (cfg.mode, cfg.n, cfg.dt) == ("graph", 64, "auto")
