"""Backward heat kernel with a time-dependent conductivity.

With accumulated conductivity ``Sigma(t) = mu * int_0^t sigma(alpha(s)) ds``
and ``tau = Sigma(t0) - Sigma(t)`` the kernel centred at ``(X0, t0)`` is

    rho(X, t) = (4 pi tau)**(-1/2) * exp(-|X - X0|**2 / (4 tau)),

the one-dimensional normalisation appropriate for curves in the plane.  It
solves ``rho_t + mu sigma (D rho . a)**2 / rho + mu sigma (I - a a) : D^2 rho = 0``
for every unit vector ``a``.

``Sigma`` comes either from closed-form callables or from a sampled schedule
of ``sigma`` values.  A schedule is interpolated linearly between nodes and
integrated exactly, so at the nodes ``Sigma`` equals the trapezoid prefix sum.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError, KernelDomainError

TAU_MIN = 1e-12


class BackwardKernel:
    """Kernel centred at ``(x0, t0)``.

    Build it with :meth:`from_schedule`, :meth:`from_trajectory`,
    :meth:`exact` or :meth:`constant`.
    """

    def __init__(self, x0, t0, mu, sigma_fn, Sigma_fn, t_range, schedule=None):
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (2,) or not np.all(np.isfinite(x0)):
            raise ConfigurationError("x0 must be a finite plane point")
        if not (math.isfinite(mu) and mu > 0):
            raise ConfigurationError("mu must be positive")
        self.x0 = x0
        self.t0 = float(t0)
        self.mu = float(mu)
        self._sigma = sigma_fn
        self._Sigma = Sigma_fn
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.schedule = schedule
        if not (self.t_range[0] <= self.t0 <= self.t_range[1]):
            raise KernelDomainError(f"t0={t0} lies outside the schedule range {self.t_range}")
        self._Sigma0 = self.Sigma(self.t0)

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_schedule(cls, x0, t0, mu, times, sigmas):
        """Kernel driven by ``sigma`` sampled at increasing ``times``."""
        times = np.asarray(times, dtype=float)
        sigmas = np.asarray(sigmas, dtype=float)
        if times.ndim != 1 or times.shape != sigmas.shape or times.size < 2:
            raise ConfigurationError("schedule needs matching 1-D times and sigmas, length >= 2")
        if np.any(np.diff(times) <= 0):
            raise ConfigurationError("schedule times must be strictly increasing")
        if not (np.all(np.isfinite(sigmas)) and np.all(sigmas >= 0)):
            raise ConfigurationError("schedule values must be finite and nonnegative")
        h = np.diff(times)
        prefix = np.concatenate([[0.0], np.cumsum(0.5 * h * (sigmas[1:] + sigmas[:-1]))])

        def locate(t):
            t = float(t)
            if not (times[0] <= t <= times[-1]):
                raise KernelDomainError(
                    f"t={t} lies outside the schedule [{times[0]}, {times[-1]}]")
            i = min(int(np.searchsorted(times, t, side="right")) - 1, times.size - 2)
            return i, t - times[i]

        def sigma_fn(t):
            i, s = locate(t)
            return float(sigmas[i] + (sigmas[i + 1] - sigmas[i]) * s / h[i])

        def Sigma_fn(t):
            i, s = locate(t)
            slope = (sigmas[i + 1] - sigmas[i]) / h[i]
            return float(prefix[i] + sigmas[i] * s + 0.5 * slope * s * s)

        return cls(x0, t0, mu, sigma_fn, Sigma_fn, (times[0], times[-1]),
                   schedule=(times, sigmas))

    @classmethod
    def from_trajectory(cls, traj, model, x0, t0=None, mu=None):
        """Kernel whose schedule is ``sigma(alpha)`` along a recorded run."""
        t0 = float(traj.t[-1]) if t0 is None else t0
        mu = float(traj.meta.get("mu", 1.0)) if mu is None else mu
        return cls.from_schedule(x0, t0, mu, traj.t, model.value(np.asarray(traj["alpha"])))

    @classmethod
    def exact(cls, x0, t0, mu, sigma_fn, Sigma_fn, t_range=(0.0, math.inf)):
        """Kernel from closed forms; ``Sigma_fn(t) = int_0^t sigma`` (without ``mu``)."""
        return cls(x0, t0, mu, lambda t: float(sigma_fn(t)),
                   lambda t: float(Sigma_fn(t)), t_range)

    @classmethod
    def constant(cls, x0, t0, mu=1.0, sigma=1.0):
        """Constant conductivity; ``mu = sigma = 1`` is the classical kernel."""
        sigma = float(sigma)
        return cls.exact(x0, t0, mu, lambda t: sigma, lambda t: sigma * t)

    # -- conductivity -----------------------------------------------------
    def sigma_at(self, t):
        return self._sigma(t)

    def Sigma(self, t):
        """Accumulated conductivity ``mu * int_0^t sigma``."""
        return self.mu * self._Sigma(t)

    def tau(self, t):
        t = float(t)
        if t >= self.t0:
            raise KernelDomainError(f"backward kernel is undefined for t={t} >= t0={self.t0}")
        tau = self._Sigma0 - self.Sigma(t)
        if tau < TAU_MIN:
            raise KernelDomainError(f"tau={tau:.3e} below {TAU_MIN} at t={t}")
        return tau

    # -- kernel and derivatives -------------------------------------------
    def _parts(self, X, t):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != 2:
            raise ConfigurationError("points must have a trailing dimension of 2")
        tau = self.tau(t)
        d = X - self.x0
        r2 = np.einsum("...i,...i->...", d, d)
        rho = np.exp(-r2 / (4.0 * tau)) / np.sqrt(4.0 * np.pi * tau)
        return d, r2, tau, rho

    def rho(self, X, t):
        return self._parts(X, t)[3]

    def grad_rho(self, X, t):
        d, _, tau, rho = self._parts(X, t)
        return -(rho / (2.0 * tau))[..., None] * d

    def hess_rho(self, X, t):
        d, _, tau, rho = self._parts(X, t)
        outer = d[..., :, None] * d[..., None, :]
        eye = np.eye(2)
        return rho[..., None, None] * (outer / (4.0 * tau * tau) - eye / (2.0 * tau))

    def rho_t(self, X, t):
        """Time derivative, with ``d tau/dt = -mu sigma(t)`` from this kernel's conductivity."""
        _, r2, tau, rho = self._parts(X, t)
        k = self.mu * self.sigma_at(t)
        return k * rho * (1.0 / (2.0 * tau) - r2 / (4.0 * tau * tau))


def sigma_accum(kernel: BackwardKernel, t):
    """``Sigma(t) = mu * int_0^t sigma(alpha(s)) ds``."""
    return kernel.Sigma(t)


def rho(kernel, X, t):
    return kernel.rho(X, t)


def grad_rho(kernel, X, t):
    return kernel.grad_rho(X, t)


def hess_rho(kernel, X, t):
    return kernel.hess_rho(X, t)


def kernel_identity_residual(kernel: BackwardKernel, X, t, a, sigma=None):
    """``|rho_t + mu sigma (D rho . a)**2 / rho + mu sigma (I - a a) : D^2 rho|``.

    ``rho_t`` always uses the kernel's own conductivity.  The spatial terms
    use ``sigma(t)`` when a callable is given (the true density along the
    flow), otherwise the kernel's conductivity, in which case the result
    vanishes up to roundoff.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2,) or abs(float(np.hypot(*a)) - 1.0) > 1e-12:
        raise ConfigurationError("a must be a unit plane vector")
    s = kernel.sigma_at(t) if sigma is None else float(sigma(t))
    k = kernel.mu * s
    r = kernel.rho(X, t)
    g = kernel.grad_rho(X, t)
    H = kernel.hess_rho(X, t)
    ga = g @ a
    proj = np.eye(2) - np.outer(a, a)
    lhs = kernel.rho_t(X, t) + k * ga * ga / r + k * np.einsum("...ij,ij->...", H, proj)
    return np.abs(lhs)
