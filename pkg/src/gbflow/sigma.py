"""Interfacial energy densities sigma(alpha) and sigma(theta, alpha).

Two families live here:

* :class:`SigmaModel` -- isotropic densities depending only on the
  misorientation ``alpha``.  These drive the graph solver and the isotropic
  curve solver.
* :class:`AnisotropicSigma` -- densities that also depend on the polar angle
  ``theta`` of the boundary normal, used by the front-tracking curve solver
  and the line-tension check.

Models are immutable once built.  Derivatives are always supplied
analytically; nothing in the solvers differentiates sigma numerically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigurationError

#: default grid on which the assumption flags are spot-checked
ALPHA_SAMPLES = np.linspace(-10.0, 10.0, 2001)


class SigmaKind(str, enum.Enum):
    QUADRATIC_SHIFTED = "quadratic_shifted"
    QUADRATIC = "quadratic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SigmaModel:
    """Energy density ``sigma(alpha)`` with its derivative and assumption flags.

    ``satisfies_A1`` means ``sigma >= c_lower > 0`` everywhere;
    ``satisfies_A2`` means ``alpha * sigma'(alpha) >= 0`` everywhere.
    Use the class methods rather than the raw constructor.
    """

    kind: SigmaKind
    c_lower: float
    satisfies_A1: bool
    satisfies_A2: bool
    value_fn: Callable | None = field(default=None, repr=False, compare=False)
    deriv_fn: Callable | None = field(default=None, repr=False, compare=False)
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.value_fn is None or self.deriv_fn is None:
            raise ConfigurationError(
                f"sigma model {self.kind.value!r} has no value/derivative callable")
        if self.c_lower < 0:
            raise ConfigurationError("c_lower must be nonnegative")
        if self.satisfies_A1 and not self.c_lower > 0:
            raise ConfigurationError("a model flagged A1 needs c_lower > 0")

    # -- constructors -----------------------------------------------------
    @classmethod
    def quadratic_shifted(cls, base=1.0, scale=0.5):
        """``sigma = base + scale * alpha**2``; the default is ``1 + alpha**2 / 2``."""
        base, scale = float(base), float(scale)
        if base <= 0 or scale < 0:
            raise ConfigurationError("quadratic_shifted needs base > 0 and scale >= 0")
        return cls(SigmaKind.QUADRATIC_SHIFTED, base, True, True,
                   value_fn=lambda a: base + scale * np.square(a),
                   deriv_fn=lambda a: 2.0 * scale * np.asarray(a, dtype=float),
                   params={"base": base, "scale": scale})

    @classmethod
    def quadratic(cls, scale=0.5):
        """``sigma = scale * alpha**2``.  Degenerate at 0, so (A1) fails."""
        scale = float(scale)
        if scale <= 0:
            raise ConfigurationError("quadratic needs scale > 0")
        return cls(SigmaKind.QUADRATIC, 0.0, False, True,
                   value_fn=lambda a: scale * np.square(a),
                   deriv_fn=lambda a: 2.0 * scale * np.asarray(a, dtype=float),
                   params={"scale": scale})

    @classmethod
    def custom(cls, value, deriv, c_lower=0.0, satisfies_A1=False,
               satisfies_A2=False, validate=True):
        """Wrap user callables.  Declared flags are spot-checked on a grid."""
        if not callable(value) or not callable(deriv):
            raise ConfigurationError("custom sigma needs callable value and derivative")
        model = cls(SigmaKind.CUSTOM, float(c_lower), bool(satisfies_A1),
                    bool(satisfies_A2), value_fn=value, deriv_fn=deriv)
        if validate:
            model.check_assumptions()
        return model

    @classmethod
    def from_config(cls, kind, **params):
        """Build a built-in model from its config kind string."""
        try:
            kind = SigmaKind(str(kind).strip().lower())
        except ValueError:
            raise ConfigurationError(f"unknown sigma kind {kind!r}") from None
        if kind is SigmaKind.QUADRATIC_SHIFTED:
            return cls.quadratic_shifted(**params)
        if kind is SigmaKind.QUADRATIC:
            params.pop("base", None)
            return cls.quadratic(**params)
        raise ConfigurationError("custom sigma cannot be built from a config file")

    # -- evaluation -------------------------------------------------------
    def value(self, alpha):
        v = self.value_fn(alpha)
        return float(v) if np.ndim(v) == 0 else np.asarray(v, dtype=float)

    def deriv(self, alpha):
        d = self.deriv_fn(alpha)
        return float(d) if np.ndim(d) == 0 else np.asarray(d, dtype=float)

    __call__ = value

    def check_assumptions(self, alphas=ALPHA_SAMPLES, atol=1e-12):
        """Spot-check the (A1)/(A2) flags on ``alphas``; raise if a flag lies."""
        alphas = np.asarray(alphas, dtype=float)
        vals = np.asarray(self.value_fn(alphas), dtype=float)
        ders = np.asarray(self.deriv_fn(alphas), dtype=float)
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(ders))):
            raise ConfigurationError("sigma is not finite on the sample grid")
        if np.any(vals < -atol):
            raise ConfigurationError("sigma must be nonnegative")
        if self.satisfies_A1 and vals.min() < self.c_lower - atol:
            raise ConfigurationError(
                f"A1 flagged but min sigma {vals.min():.3g} < c_lower {self.c_lower:.3g}")
        if self.satisfies_A2 and np.min(alphas * ders) < -atol:
            raise ConfigurationError("A2 flagged but alpha*sigma'(alpha) < 0 somewhere")
        return True

    def to_config(self):
        return {"kind": self.kind.value, **dict(self.params)}


def sigma_eval(model, alpha):
    return model.value(alpha)


def sigma_deriv(model, alpha):
    return model.deriv(alpha)


@dataclass(frozen=True)
class AnisotropicSigma:
    """Energy density ``sigma(theta, alpha)`` of the normal angle and misorientation.

    All four callables take ``(theta, alpha)`` and broadcast over arrays of
    ``theta``.  ``d_theta2`` is needed for the stiffness
    ``sigma_thth + sigma`` that multiplies curvature in the normal velocity.
    """

    value_fn: Callable = field(repr=False)
    d_theta: Callable = field(repr=False)
    d_theta2: Callable = field(repr=False)
    d_alpha: Callable = field(repr=False)
    name: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def isotropic(cls, model: SigmaModel):
        zero = lambda th, a: np.zeros_like(np.asarray(th, dtype=float))
        return cls(
            value_fn=lambda th, a: model.value(a) + zero(th, a),
            d_theta=zero, d_theta2=zero,
            d_alpha=lambda th, a: model.deriv(a) + zero(th, a),
            name=f"isotropic[{model.kind.value}]",
            params=dict(model.params))

    @classmethod
    def harmonic(cls, base=2.0, amplitude=1.0, k=2):
        """``sigma = base + amplitude * cos(k theta)``, independent of alpha."""
        base, amplitude, k = float(base), float(amplitude), int(k)
        if k < 1:
            raise ConfigurationError("harmonic anisotropy needs k >= 1")
        if base - abs(amplitude) < 0:
            raise ConfigurationError("harmonic sigma must stay nonnegative")
        return cls(
            value_fn=lambda th, a: base + amplitude * np.cos(k * np.asarray(th)),
            d_theta=lambda th, a: -k * amplitude * np.sin(k * np.asarray(th)),
            d_theta2=lambda th, a: -k * k * amplitude * np.cos(k * np.asarray(th)),
            d_alpha=lambda th, a: np.zeros_like(np.asarray(th, dtype=float)),
            name="harmonic",
            params={"base": base, "amplitude": amplitude, "k": k})

    def value(self, theta, alpha):
        return self.value_fn(theta, alpha)

    def stiffness(self, theta, alpha):
        return self.d_theta2(theta, alpha) + self.value_fn(theta, alpha)

    def min_stiffness(self, alpha, samples=720):
        theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        return float(np.min(self.stiffness(theta, alpha)))

    def to_config(self):
        return {"kind": self.name, **dict(self.params)}


def stiffness(model: AnisotropicSigma, theta, alpha):
    """``sigma_thth(theta, alpha) + sigma(theta, alpha)``."""
    return model.stiffness(theta, alpha)
