"""Time series container shared by the graph and curve solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DiagnosticError
from .geometry import Grid1D, GraphState

GRAPH_COLUMNS = ("t", "alpha", "E", "length", "sup_v", "sup_u",
                 "h1", "h2", "h3", "sup_kappa", "kappa_l2", "dE_residual")
#: columns written to ``diagnostics.csv`` for graph runs
GRAPH_CSV_COLUMNS = GRAPH_COLUMNS[:10]

CURVE_COLUMNS = ("t", "alpha", "E", "length", "sup_kappa", "area",
                 "mean_radius", "radius_spread", "enclosing_radius")
CURVE_CSV_COLUMNS = CURVE_COLUMNS


@dataclass
class Snapshot:
    step: int
    t: float
    alpha: float
    data: np.ndarray  # u samples for graphs, (m, 2) points for curves


@dataclass
class Trajectory:
    """Per-step diagnostic rows plus a sparser list of full-state snapshots.

    ``rows`` maps column names to arrays with one entry per recorded state
    (the initial state included).  ``dt`` is the nominal step; graph runs
    use it uniformly, curve runs adapt it and only record it for reference.
    """

    kind: str
    dt: float
    rows: dict
    snapshots: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    status: str = "completed"

    def __len__(self):
        return len(self.rows["t"])

    def __getitem__(self, name):
        return self.rows[name]

    @property
    def t(self):
        return self.rows["t"]

    @property
    def steps(self):
        return len(self) - 1

    @property
    def snapshot_times(self):
        return np.array([s.t for s in self.snapshots])

    @property
    def snapshot_alphas(self):
        return np.array([s.alpha for s in self.snapshots])

    @property
    def grid(self):
        if self.kind != "graph":
            raise DiagnosticError("only graph trajectories carry a grid")
        return Grid1D(int(self.meta["n"]))

    def graph_states(self):
        grid = self.grid
        return [GraphState(grid, s.data, s.alpha, s.t) for s in self.snapshots]

    def snapshot_spacing(self, rtol=1e-9):
        """Uniform spacing of the snapshot times; raise if it is not uniform."""
        times = self.snapshot_times
        if times.size < 2:
            raise DiagnosticError("need at least two snapshots")
        gaps = np.diff(times)
        h = float(np.median(gaps))
        if np.max(np.abs(gaps - h)) > rtol * max(h, 1e-300) + 1e-15:
            raise DiagnosticError("snapshots are not uniformly spaced")
        return h

    def uniform_snapshots(self, rtol=1e-9):
        """Longest prefix of the snapshots with uniform spacing, and that spacing.

        Only the final snapshot can break the pattern (a run always keeps its
        last state), so at most one snapshot is dropped.
        """
        snaps = list(self.snapshots)
        if len(snaps) < 2:
            raise DiagnosticError("need at least two snapshots")
        times = np.array([s.t for s in snaps])
        gaps = np.diff(times)
        h = gaps[0]
        if len(gaps) > 1 and abs(gaps[-1] - h) > rtol * h + 1e-15:
            snaps, gaps = snaps[:-1], gaps[:-1]
        if np.max(np.abs(gaps - h)) > rtol * h + 1e-15:
            raise DiagnosticError("snapshots are not uniformly spaced")
        return snaps, float(h)

    def final(self):
        return self.snapshots[-1]
