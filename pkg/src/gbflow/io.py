"""Run directories: manifest, diagnostics CSV and per-snapshot CSVs.

Layout::

    run_dir/
        manifest.json
        diagnostics.csv       t, alpha, E, length, ... one row per step
        extra.csv             graph runs only: t, kappa_l2, dE_residual
        snapshots/snap_000000.csv ...

Floats are written with 17 significant digits so that output is byte-stable
and round-trips exactly.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .errors import RunFormatError
from .trajectory import (CURVE_CSV_COLUMNS, GRAPH_COLUMNS, GRAPH_CSV_COLUMNS, Snapshot,
                         Trajectory)

FLOAT_FMT = "{:.16e}"
EXTRA_COLUMNS = ("t", "kappa_l2", "dE_residual")


def _fmt(x):
    return FLOAT_FMT.format(float(x))


def write_csv(path, columns, data):
    """Write equal-length columns; ``data`` maps names to 1-D arrays."""
    arrays = [np.asarray(data[c], dtype=float) for c in columns]
    lines = [",".join(columns)]
    for row in zip(*arrays):
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Read a numeric CSV with a header; returns ``{column: array}``."""
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise RunFormatError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise RunFormatError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise RunFormatError(
                    f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise RunFormatError(f"{path}, line {lineno}: non-numeric field") from None
    table = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: table[:, j] for j, name in enumerate(header)}


def write_run(run_dir, traj: Trajectory, manifest: dict):
    """Persist ``traj`` plus a manifest; returns the run directory path."""
    run_dir = Path(run_dir)
    snap_dir = run_dir / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for old in snap_dir.glob("snap_*.csv"):
        old.unlink()
    if traj.kind == "graph":
        write_csv(run_dir / "diagnostics.csv", GRAPH_CSV_COLUMNS, traj.rows)
        write_csv(run_dir / "extra.csv", EXTRA_COLUMNS, traj.rows)
        x = np.arange(traj.meta["n"]) / traj.meta["n"]
        for s in traj.snapshots:
            write_csv(snap_dir / f"snap_{s.step:06d}.csv", ("x", "u"), {"x": x, "u": s.data})
    else:
        write_csv(run_dir / "diagnostics.csv", CURVE_CSV_COLUMNS, traj.rows)
        for s in traj.snapshots:
            write_csv(snap_dir / f"snap_{s.step:06d}.csv", ("x", "y"),
                      {"x": s.data[:, 0], "y": s.data[:, 1]})
    doc = dict(manifest)
    doc.update({
        "kind": traj.kind,
        "status": traj.status,
        "dt": traj.dt,
        "meta": traj.meta,
        "snapshots": [{"step": s.step, "t": s.t, "alpha": s.alpha,
                       "file": f"snapshots/snap_{s.step:06d}.csv"} for s in traj.snapshots],
    })
    (run_dir / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return run_dir


def load_run(run_dir):
    """Rebuild ``(Trajectory, manifest)`` from a run directory."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise RunFormatError(f"{run_dir} is not a directory")
    mpath = run_dir / "manifest.json"
    if not mpath.exists():
        raise RunFormatError(f"{run_dir} has no manifest.json")
    try:
        manifest = json.loads(mpath.read_text())
    except json.JSONDecodeError as exc:
        raise RunFormatError(f"{mpath}, line {exc.lineno}: {exc.msg}") from None
    kind = manifest.get("kind")
    if kind not in ("graph", "curve"):
        raise RunFormatError(f"{mpath}: unknown run kind {kind!r}")
    rows = read_csv(run_dir / "diagnostics.csv")
    if kind == "graph":
        extra = read_csv(run_dir / "extra.csv")
        rows.update({k: extra[k] for k in EXTRA_COLUMNS[1:]})
        missing = set(GRAPH_COLUMNS) - set(rows)
        if missing:
            raise RunFormatError(f"{run_dir}: missing columns {sorted(missing)}")
    snapshots = []
    for entry in manifest.get("snapshots", []):
        table = read_csv(run_dir / entry["file"])
        if kind == "graph":
            data = table["u"]
        else:
            data = np.column_stack([table["x"], table["y"]])
        snapshots.append(Snapshot(int(entry["step"]), float(entry["t"]),
                                  float(entry["alpha"]), data))
    if not snapshots:
        raise RunFormatError(f"{run_dir}: manifest lists no snapshots")
    traj = Trajectory(kind, float(manifest["dt"]), rows, snapshots,
                      dict(manifest.get("meta", {})), manifest.get("status", "completed"))
    return traj, manifest


def default_output_root():
    return Path(os.environ.get("GBFLOW_OUTPUT_ROOT", "gbflow_runs"))
