"""Periodic grid, finite differences and graph geometry on the unit circle.

The domain is R/Z sampled at ``x_i = i/n``.  All stencils are centred,
second order and wrap around cyclically.  Integrals over one period use the
uniform rectangle rule, which is spectrally accurate for smooth periodic
integrands and matches the summation-by-parts structure of the stencils.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid with ``n`` points on the unit circle."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ConfigurationError(f"grid needs an integer n >= 8, got {self.n!r}")

    @property
    def dx(self):
        return 1.0 / self.n

    @cached_property
    def x(self):
        x = np.arange(self.n) / self.n
        x.setflags(write=False)
        return x

    @cached_property
    def ip(self):
        """Index of the right neighbour, cyclic."""
        return np.roll(np.arange(self.n), -1)

    @cached_property
    def im(self):
        """Index of the left neighbour, cyclic."""
        return np.roll(np.arange(self.n), 1)


@dataclass(frozen=True)
class GraphState:
    """Boundary ``y = u(x)`` over one period, plus misorientation and time."""

    grid: Grid1D
    u: np.ndarray
    alpha: float
    t: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.shape != (self.grid.n,):
            raise ConfigurationError(
                f"u has shape {u.shape}, expected ({self.grid.n},)")
        if not np.all(np.isfinite(u)):
            raise ConfigurationError("u contains non-finite samples")
        if not np.isfinite(self.alpha):
            raise ConfigurationError("alpha must be finite")
        if not self.t >= 0:
            raise ConfigurationError("t must be nonnegative")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "t", float(self.t))


def _check(u, grid):
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n,):
        raise ConfigurationError(f"samples have shape {u.shape}, expected ({grid.n},)")
    return u


def d1(u, grid):
    """Centred first difference ``(u[i+1] - u[i-1]) / (2 dx)``."""
    u = _check(u, grid)
    return (u[grid.ip] - u[grid.im]) * (0.5 * grid.n)


def d2(u, grid):
    """Compact second difference ``(u[i+1] - 2u[i] + u[i-1]) / dx**2``."""
    u = _check(u, grid)
    return (u[grid.ip] - 2.0 * u + u[grid.im]) * float(grid.n) ** 2


def area_element(u, grid):
    """Length density ``v = sqrt(1 + u_x**2)``."""
    ux = d1(u, grid)
    return np.sqrt(1.0 + ux * ux)


def curvature(u, grid):
    """Graph curvature in flux form, ``d1(u_x / v)``.

    Being an exact discrete derivative of a periodic quantity, it sums to
    zero over the period up to roundoff.
    """
    ux = d1(u, grid)
    return d1(ux / np.sqrt(1.0 + ux * ux), grid)


def curve_length(u, grid):
    """Length of one period of the graph, ``int_0^1 v dx``."""
    return float(area_element(u, grid).sum()) / grid.n


def energy(state: GraphState, model):
    """Grain-boundary energy ``sigma(alpha) * |Gamma|``."""
    return model.value(state.alpha) * curve_length(state.u, state.grid)


def sobolev_norms(u, grid):
    """Squared L2 norms of the first three derivatives.

    Higher derivatives come from repeated ``d1``; this keeps every identity
    on one stencil at the price of some accuracy in the third derivative.
    """
    ux = d1(u, grid)
    uxx = d1(ux, grid)
    uxxx = d1(uxx, grid)
    return (float(np.mean(ux * ux)), float(np.mean(uxx * uxx)),
            float(np.mean(uxxx * uxxx)))


def graph_profile(u, grid):
    """Everything the solver records about a graph in one pass.

    Returns a dict with ``ux``, ``v``, ``kappa`` arrays and the scalars
    ``length``, ``sup_v``, ``sup_u``, ``h1``, ``h2``, ``h3``, ``sup_kappa``
    and ``kappa_l2`` (``int kappa**2 v dx``).  ``u`` may also be a stack of
    shape ``(k, n)``, in which case every scalar becomes a length-``k`` array.
    """
    u = np.asarray(u, dtype=float)
    ip, im, h, n = grid.ip, grid.im, 0.5 * grid.n, grid.n
    ux = (u[..., ip] - u[..., im]) * h
    v = np.sqrt(1.0 + ux * ux)
    s = ux / v
    kappa = (s[..., ip] - s[..., im]) * h
    uxx = (ux[..., ip] - ux[..., im]) * h
    uxxx = (uxx[..., ip] - uxx[..., im]) * h
    scalar = float if u.ndim == 1 else np.asarray
    return {
        "ux": ux,
        "v": v,
        "kappa": kappa,
        "length": scalar(v.sum(axis=-1) / n),
        "sup_v": scalar(v.max(axis=-1)),
        "sup_u": scalar(np.abs(u).max(axis=-1)),
        "h1": scalar((ux * ux).sum(axis=-1) / n),
        "h2": scalar((uxx * uxx).sum(axis=-1) / n),
        "h3": scalar((uxxx * uxxx).sum(axis=-1) / n),
        "sup_kappa": scalar(np.abs(kappa).max(axis=-1)),
        "kappa_l2": scalar((kappa * kappa * v).sum(axis=-1) / n),
    }
