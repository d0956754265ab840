"""Command-line driver: ``gbflow run | verify | convergence | plot | sweep``.

Exit codes: 0 ok, 1 a check failed, 2 usage or configuration error,
3 numerical divergence, 4 missing or malformed files.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import (RunConfig, build_model, build_params, curve_initial, graph_initial)
from .curve_solver import curve_cfl_dt, run_curve
from .diagnostics import (CheckReport, WeightFunction, alpha_decay_check, bound_checks, decay_check,
                          dissipation_residual, energy_descent_check, enclosure_check,
                          length_dissipation_check, monotonicity_series)
from .errors import (ConfigurationError, DiagnosticError, DivergenceError, GBFlowError,
                     RunFormatError)
from .geometry import GraphState
from .graph_solver import plan_steps, run, stable_dt
from .io import default_output_root, load_run, write_run
from .sigma import SigmaModel
from .studies import ORDER_MINIMA, graph_ladder, kernel_ladder

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3, 4

#: default graph run keeps about this many snapshots
TARGET_SNAPSHOTS = 100

_FIELD_HELP = {
    "mode": "graph or curve",
    "n": "graph grid points",
    "m": "curve vertices",
    "initial": "'constant c', 'sine a k [b]', 'random_sine [seed]', 'circle R', "
               "'ellipse a b' or a CSV path",
    "alpha0": "initial misorientation",
    "sigma": "quadratic_shifted or quadratic",
    "anisotropy": "curve mode: 'none' or 'harmonic base amplitude k'",
    "dt": "time step or 'auto'",
}


# -- execution -----------------------------------------------------------------------

def execute(cfg: RunConfig, force_dt=None, base_dir=None):
    """Run ``cfg``; returns ``(Trajectory, extinction report or None)``."""
    model = build_model(cfg)
    if cfg.mode == "graph":
        grid, u0 = graph_initial(cfg, base_dir)
        probe = build_params(cfg, 1.0)
        if force_dt is not None:
            dt, cap = float(force_dt), False
        elif cfg.dt == "auto":
            dt, cap = stable_dt(GraphState(grid, u0, cfg.alpha0), probe, model), True
            dt = dt if math.isfinite(dt) else max(cfg.t_end, 1e-3) / 1000
        else:
            dt, cap = float(cfg.dt), True
        params = build_params(cfg, dt)
        every = cfg.snapshot_every
        if every is None:
            limit = min(dt, stable_dt(GraphState(grid, u0, cfg.alpha0), params, model)) \
                if cap else dt
            nsteps, _ = plan_steps(cfg.t_end, limit)
            every = max(1, math.ceil(nsteps / TARGET_SNAPSHOTS))
        traj = run(u0, cfg.alpha0, grid, params, model, snapshot_every=every, cap_dt=cap)
        return traj, None
    curve0 = curve_initial(cfg, base_dir)
    if force_dt is not None or cfg.dt != "auto":
        dt = float(force_dt if force_dt is not None else cfg.dt)
    else:
        dt = curve_cfl_dt(curve0, build_params(cfg, 1.0), model)
        dt = dt if math.isfinite(dt) else max(cfg.t_end, 1e-3) / 1000
    params = build_params(cfg, dt)
    traj, report = run_curve(curve0, params, model, reparam_every=cfg.reparam_every,
                             snapshot_every=cfg.snapshot_every or 50,
                             extinction_threshold=cfg.extinction_threshold)
    return traj, report


def manifest_for(cfg, wall, report=None, force_dt=None):
    doc = {"config": cfg.to_dict(), "version": __version__, "wall_time_s": wall,
           "force_dt": force_dt}
    if report is not None:
        doc["extinction"] = report.to_dict()
    return doc


def run_checks(traj, cfg: RunConfig, rtol=1e-2):
    """All checks that apply to ``traj``; returns a list of ``CheckReport``."""
    model = build_model(cfg)
    params = build_params(cfg, traj.dt if traj.dt > 0 else 1.0)
    reports = list(bound_checks(traj, model))
    if traj.kind == "curve":
        reports.append(enclosure_check(traj, model, params))
        return reports
    reports.append(energy_descent_check(traj))
    try:
        reports.append(dissipation_residual(traj, model, params, rtol=rtol, route="auto")[2])
    except DiagnosticError as exc:
        reports.append(_na("dissipation", str(exc)))
    try:
        reports.append(monotonicity_series(traj, model, params=params,
                                           weight=WeightFunction.AREA_ELEMENT)[2])
    except GBFlowError as exc:
        reports.append(_na("monotonicity[area_element]", str(exc)))
    try:
        reports.append(length_dissipation_check(traj, model, params, rtol=rtol)[2])
    except DiagnosticError as exc:
        reports.append(_na("length_dissipation", str(exc)))
    reports.append(alpha_decay_check(traj, model, params))
    for col in ("alpha", "h1", "h2", "h3", "sup_kappa"):
        y = np.abs(np.asarray(traj[col], dtype=float))
        reports.append(decay_check(col, traj.t, y))
    return reports


def _na(name, why):
    return CheckReport.not_applicable(name, why)


def format_table(reports):
    lines = [f"{'check':<28} {'status':<6} {'worst':>12} {'tolerance':>12} {'at t':>10}  detail"]
    for r in reports:
        worst = f"{r.worst_violation:.4e}" if r.applicable else "-"
        tol = f"{r.tolerance:.4e}" if r.applicable else "-"
        loc = f"{r.location:.4g}" if r.applicable and math.isfinite(r.location) else "-"
        lines.append(f"{r.name:<28} {r.status:<6} {worst:>12} {tol:>12} {loc:>10}  {r.detail}")
    return "\n".join(lines)


# -- argument handling ------------------------------------------------------------------

def _add_config_args(p):
    p.add_argument("--config", type=Path, help="INI config file")
    for name in RunConfig.field_names():
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=f"cfg_{name}", default=None, metavar="VALUE",
                       help=_FIELD_HELP.get(name))


def _config_from_args(args, **defaults):
    """Defaults, then the config file, then explicit flags."""
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    values, base = dict(defaults), None
    if args.config is not None:
        if not args.config.exists():
            raise FileNotFoundError(f"config file {args.config} not found")
        values.update(RunConfig.read_flat(args.config))
        base = args.config.parent
    values.update(overrides)
    return RunConfig.from_dict(values), base


def _run_dir(args, cfg):
    if getattr(args, "out", None):
        return Path(args.out)
    return default_output_root() / cfg.name


def _write(run_dir, traj, cfg, wall, report, force_dt):
    write_run(run_dir, traj, manifest_for(cfg, wall, report, force_dt))


# -- subcommands -------------------------------------------------------------------------

def cmd_run(args):
    cfg, base = _config_from_args(args)
    start = time.perf_counter()
    traj, report = execute(cfg, args.force_dt, base)
    wall = time.perf_counter() - start
    out = _run_dir(args, cfg)
    _write(out, traj, cfg, wall, report, args.force_dt)
    last = traj.rows
    print(f"{cfg.mode} run '{cfg.name}': {traj.steps} steps, status {traj.status}, "
          f"t={last['t'][-1]:.6g}, alpha={last['alpha'][-1]:.10g}, E={last['E'][-1]:.10g}")
    if report is not None:
        print(f"extinction: status {report.status}, last time {report.last_time:.6g}, "
              f"extrapolated {report.extrapolated_time:.6g}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args):
    if args.run_dir is not None:
        traj, manifest = load_run(args.run_dir)
        cfg = RunConfig.from_dict(manifest["config"])
        out = Path(args.run_dir)
    else:
        cfg, base = _config_from_args(args)
        start = time.perf_counter()
        traj, report = execute(cfg, args.force_dt, base)
        out = _run_dir(args, cfg)
        _write(out, traj, cfg, time.perf_counter() - start, report, args.force_dt)
    reports = run_checks(traj, cfg, rtol=args.rtol)
    print(format_table(reports))
    (out / "verify.json").write_text(
        json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n")
    ok = all(r.passed for r in reports)
    print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_convergence(args):
    cfg, base = _config_from_args(args, t_end=0.02, initial="sine 0.1 1", alpha0=1.0)
    if cfg.mode != "graph":
        raise ConfigurationError("field 'mode': convergence runs need mode=graph")
    model = build_model(cfg)
    grid, _ = graph_initial(cfg.replace(n=args.n0), base)
    if grid.n != args.n0:
        raise ConfigurationError("convergence ladders need a preset initial condition")

    def u0_fn(x):
        return graph_initial(cfg.replace(n=len(x)), base)[1]

    dt = 1.0 if cfg.dt == "auto" else float(cfg.dt)
    params = build_params(cfg, dt)
    res = graph_ladder(u0_fn, cfg.alpha0, model, params, n0=args.n0, levels=args.levels)
    a0, gam, mu = cfg.alpha0, cfg.gamma, cfg.mu
    if isinstance(model, SigmaModel):
        # kernel ladder against the conductivity of the flat explicit solution,
        # where alpha decays like exp(-gamma sigma'(1) t)
        def sig(t):
            return model.value(a0 * np.exp(-gam * model.deriv(1.0) * np.asarray(t)))
        if model.kind.value == "quadratic_shifted":
            errs, order = kernel_ladder(sig, max(cfg.t_end, 0.2), mu=mu, levels=args.levels)
            res.errors["kernel_identity"] = errs
            res.orders["kernel_identity"] = order
    print(f"{'quantity':<22} {'errors':<48} {'order':>8} {'min':>5}  status")
    for name, order in res.orders.items():
        errs = ", ".join(f"{e:.3e}" for e in res.errors[name])
        shown = "exact" if order == math.inf else f"{order:.3f}"
        status = "pass" if res.passed(name) else "FAIL"
        print(f"{name:<22} {errs:<48} {shown:>8} {ORDER_MINIMA[name]:>5}  {status}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "convergence.json").write_text(
            json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK if res.all_passed else EXIT_CHECK


def cmd_plot(args):
    from .plotting import plot_run
    traj, _ = load_run(args.run_dir)
    out = Path(args.out) if args.out else Path(args.run_dir) / "plots"
    for path in plot_run(traj, out):
        print(f"wrote {path}")
    return EXIT_OK


def _sweep_worker(job):
    values, out_dir, force_dt, verify, rtol = job
    name = values["name"]
    try:
        cfg = RunConfig.from_dict(values)
        start = time.perf_counter()
        traj, report = execute(cfg, force_dt)
        write_run(out_dir, traj, manifest_for(cfg, time.perf_counter() - start, report, force_dt))
        status, code = traj.status, EXIT_OK
        if verify:
            reports = run_checks(traj, cfg, rtol)
            if not all(r.passed for r in reports):
                status, code = "check_failed", EXIT_CHECK
        return {"run": name, "status": status, "exit": code,
                "alpha_final": float(traj["alpha"][-1]), "E_final": float(traj["E"][-1])}
    except DivergenceError as exc:
        return {"run": name, "status": f"diverged: {exc}", "exit": EXIT_DIVERGED,
                "alpha_final": float("nan"), "E_final": float("nan")}
    except ConfigurationError as exc:
        return {"run": name, "status": f"config error: {exc}", "exit": EXIT_USAGE,
                "alpha_final": float("nan"), "E_final": float("nan")}


def _parse_sweep_params(items):
    grid = {}
    for item in items:
        if "=" not in item:
            raise ConfigurationError(f"--param expects key=v1,v2,... got {item!r}")
        key, vals = item.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in RunConfig.field_names():
            raise ConfigurationError(f"unknown config field {key!r}")
        grid[key] = [v.strip() for v in vals.split(",") if v.strip()]
        if not grid[key]:
            raise ConfigurationError(f"--param {key} has no values")
    return grid


def cmd_sweep(args):
    base_cfg, _ = _config_from_args(args)
    grid = _parse_sweep_params(args.param)
    keys = sorted(grid)
    root = Path(args.out) if args.out else default_output_root() / f"{base_cfg.name}-sweep"
    jobs = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        values = base_cfg.to_dict()
        values.update(dict(zip(keys, combo)))
        tag = "_".join(f"{k}={v}".replace(" ", "-").replace("/", "-") for k, v in zip(keys, combo))
        values["name"] = tag or base_cfg.name
        RunConfig.from_dict(values)  # fail fast on bad values
        jobs.append((values, str(root / values["name"]), args.force_dt, args.verify, args.rtol))
    if args.workers <= 1:
        results = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    root.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run", "status", "exit", "alpha_final", "E_final"])
    for r in results:
        writer.writerow([r["run"], r["status"], r["exit"], f"{r['alpha_final']:.16e}",
                         f"{r['E_final']:.16e}"])
        print(f"{r['run']:<40} {r['status']}")
    (root / "sweep.csv").write_text(buf.getvalue())
    return max((r["exit"] for r in results), default=EXIT_OK)


# -- entry point ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="gbflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gbflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one configuration and write a run directory")
    _add_config_args(p)
    p.add_argument("--out", help="run directory (default: $GBFLOW_OUTPUT_ROOT/<name>)")
    p.add_argument("--force-dt", type=float, default=None,
                   help="use this time step without the stability cap")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run every applicable check on a run")
    p.add_argument("run_dir", nargs="?", type=Path, help="existing run directory")
    _add_config_args(p)
    p.add_argument("--out", help="directory for a fresh run")
    p.add_argument("--force-dt", type=float, default=None)
    p.add_argument("--rtol", type=float, default=1e-2,
                   help="relative tolerance of the dissipation checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convergence", help="refinement ladder with observed orders")
    _add_config_args(p)
    p.add_argument("--n0", type=int, default=64)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--out", help="directory for convergence.json")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("plot", help="write SVG figures for a run directory")
    p.add_argument("run_dir", type=Path)
    p.add_argument("--out", help="figure directory (default: RUN_DIR/plots)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("sweep", help="cartesian parameter sweep in parallel")
    _add_config_args(p)
    p.add_argument("--param", action="append", default=[], metavar="KEY=V1,V2,...")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="sweep root directory")
    p.add_argument("--force-dt", type=float, default=None)
    p.add_argument("--verify", action="store_true", help="run the checks on every run")
    p.add_argument("--rtol", type=float, default=1e-2)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (RunFormatError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigurationError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GBFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
