"""SVG figures for a finished run (matplotlib, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .diagnostics import decay_fit  # noqa: E402
from .errors import FitError  # noqa: E402

# fixed ids and no timestamp keep the SVG bytes reproducible
matplotlib.rcParams["svg.hashsalt"] = "gbflow"
_META = {"Date": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return Path(path)


def plot_snapshots(traj, path, max_curves=12):
    fig, ax = plt.subplots(figsize=(6, 4))
    snaps = traj.snapshots
    pick = np.unique(np.linspace(0, len(snaps) - 1, min(max_curves, len(snaps))).astype(int))
    colors = plt.cm.viridis(np.linspace(0, 1, len(pick)))
    for c, i in zip(colors, pick):
        s = snaps[i]
        if traj.kind == "graph":
            x = np.arange(s.data.size) / s.data.size
            ax.plot(np.append(x, 1.0), np.append(s.data, s.data[0]), color=c,
                    label=f"t={s.t:.3g}")
        else:
            closed = np.vstack([s.data, s.data[:1]])
            ax.plot(closed[:, 0], closed[:, 1], color=c, label=f"t={s.t:.3g}")
    if traj.kind == "graph":
        ax.set_xlabel("x")
        ax.set_ylabel("u")
    else:
        ax.set_aspect("equal")
    ax.legend(fontsize=6, loc="best")
    return _save(fig, path)


def plot_energy(traj, path):
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.2))
    a1.plot(traj.t, traj["E"])
    a1.set_xlabel("t")
    a1.set_ylabel("E")
    a2.plot(traj.t, traj["length"])
    a2.set_xlabel("t")
    a2.set_ylabel("|Gamma|")
    return _save(fig, path)


def plot_decay(traj, path):
    cols = ["alpha", "h1", "h2", "h3", "sup_kappa"] if traj.kind == "graph" \
        else ["alpha", "area"]
    fig, ax = plt.subplots(figsize=(6, 4))
    t = traj.t
    for col in cols:
        y = np.abs(np.asarray(traj[col], dtype=float))
        pos = y > 1e-300
        if pos.sum() < 2:
            continue
        line, = ax.semilogy(t[pos], y[pos], label=col)
        try:
            fit = decay_fit(t, y)
        except FitError:
            continue
        tail = t[t >= 0.5 * t[-1]]
        anchor = y[t >= 0.5 * t[-1]][0]
        ax.semilogy(tail, anchor * np.exp(-fit.rate * (tail - tail[0])), "--",
                    color=line.get_color(),
                    label=f"{col} fit: rate {fit.rate:.4g}")
    ax.set_xlabel("t")
    ax.legend(fontsize=6, loc="best")
    return _save(fig, path)


def plot_run(traj, out_dir):
    """Write ``snapshots.svg``, ``energy.svg`` and ``decay.svg``; return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [plot_snapshots(traj, out / "snapshots.svg"),
            plot_energy(traj, out / "energy.svg"),
            plot_decay(traj, out / "decay.svg")]
