"""Run configuration: INI files, flag overrides and initial-condition presets.

A config file is plain INI.  Sections only group keys for readability; the
file is flattened into one namespace, so ``[params] mu = 2`` and a top-level
``mu = 2`` mean the same thing.  Inside ``[sigma]`` the keys ``kind``,
``base`` and ``scale`` are short for ``sigma``, ``sigma_base`` and
``sigma_scale``.
"""

from __future__ import annotations

import configparser
import math
import shlex
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .curve_solver import CurveState, circle, ellipse
from .errors import ConfigurationError
from .geometry import Grid1D
from .graph_solver import SCHEMES, Params
from .sigma import AnisotropicSigma, SigmaModel

MODES = ("graph", "curve")


@dataclass
class RunConfig:
    mode: str = "graph"
    name: str = "run"
    n: int = 128
    m: int = 256
    initial: str | None = None
    alpha0: float = 0.0
    sigma: str = "quadratic_shifted"
    sigma_base: float | None = None
    sigma_scale: float | None = None
    anisotropy: str = "none"
    mu: float = 1.0
    gamma: float = 1.0
    dt: str = "auto"
    t_end: float = 1.0
    cfl_safety: float = 0.5
    scheme: str = "euler"
    snapshot_every: int | None = None
    reparam_every: int = 10
    extinction_threshold: float | None = None
    seed: int = 0

    def __post_init__(self):
        self.validate()

    # -- parsing ----------------------------------------------------------
    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, values):
        cfg = cls.__new__(cls)
        for f in fields(cls):
            setattr(cfg, f.name, f.default)
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in cls.field_names():
                raise ConfigurationError(f"unknown config field {key!r}")
            setattr(cfg, key, raw)
        cfg._coerce()
        cfg.validate()
        return cfg

    @staticmethod
    def read_flat(path):
        """Flattened ``{field: raw string}`` mapping from an INI file."""
        parser = configparser.ConfigParser(default_section="__defaults__",
                                           inline_comment_prefixes=(";", "#"))
        path = Path(path)
        text = path.read_text()
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
        flat = {}
        for section in parser.sections():
            for key, value in parser.items(section):
                flat[_canonical(section, key)] = value
        return flat

    @classmethod
    def from_file(cls, path, overrides=None):
        return cls.from_dict({**cls.read_flat(path), **(overrides or {})})

    def _coerce(self):
        casts = {
            "n": int, "m": int, "alpha0": float, "mu": float, "gamma": float,
            "t_end": float, "cfl_safety": float, "reparam_every": int, "seed": int,
            "sigma_base": float, "sigma_scale": float, "snapshot_every": int,
            "extinction_threshold": float,
        }
        optional = ("sigma_base", "sigma_scale", "snapshot_every", "extinction_threshold")
        for name, cast in casts.items():
            val = getattr(self, name)
            if name in optional and (val is None or str(val).strip().lower() in ("", "none", "auto")):
                setattr(self, name, None)
                continue
            try:
                if cast is int:
                    as_float = float(val)
                    if as_float != int(as_float):
                        raise ValueError
                    val = int(as_float)
                setattr(self, name, cast(val))
            except (TypeError, ValueError):
                raise ConfigurationError(f"field {name!r}: cannot parse {val!r}") from None
        self.dt = str(self.dt).strip().lower()
        for name in ("mode", "sigma", "scheme", "anisotropy", "name"):
            setattr(self, name, str(getattr(self, name)).strip())
        if self.initial is not None:
            self.initial = str(self.initial).strip()

    def validate(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"field 'mode': expected one of {MODES}, got {self.mode!r}")
        for name in ("alpha0", "mu", "gamma", "t_end", "cfl_safety"):
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ConfigurationError(f"field {name!r} must be a finite number")
        if self.mu <= 0 or self.gamma <= 0:
            raise ConfigurationError("fields 'mu' and 'gamma' must be positive")
        if self.t_end < 0:
            raise ConfigurationError("field 't_end' must be nonnegative")
        if self.dt != "auto":
            try:
                dt = float(self.dt)
            except ValueError:
                raise ConfigurationError(f"field 'dt': expected a number or 'auto', got {self.dt!r}") from None
            if not (math.isfinite(dt) and dt > 0):
                raise ConfigurationError("field 'dt' must be positive")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"field 'scheme': expected one of {SCHEMES}")
        if self.mode == "graph" and self.n < 8:
            raise ConfigurationError("field 'n' must be >= 8")
        if self.mode == "curve" and self.m < 16:
            raise ConfigurationError("field 'm' must be >= 16")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ConfigurationError("field 'snapshot_every' must be >= 1")
        if self.reparam_every < 1:
            raise ConfigurationError("field 'reparam_every' must be >= 1")

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return RunConfig.from_dict(values)

    @property
    def initial_spec(self):
        if self.initial:
            return self.initial
        return "sine 0.1 1" if self.mode == "graph" else "circle 1"


def _canonical(section, key):
    key = key.strip().lower().replace("-", "_")
    section = section.strip().lower()
    names = RunConfig.field_names()
    if section == "sigma" and key == "kind":
        return "sigma"
    if key in names:
        return key
    joined = f"{section}_{key}"
    if joined in names:
        return joined
    raise ConfigurationError(f"unknown config field {key!r} in section [{section}]")


# -- model and initial data ------------------------------------------------------

def build_sigma(cfg: RunConfig):
    params = {}
    if cfg.sigma_base is not None:
        params["base"] = cfg.sigma_base
    if cfg.sigma_scale is not None:
        params["scale"] = cfg.sigma_scale
    return SigmaModel.from_config(cfg.sigma, **params)


def build_model(cfg: RunConfig):
    """The density driving the run; anisotropic curve runs get ``AnisotropicSigma``."""
    words = cfg.anisotropy.split()
    if not words or words[0] == "none":
        return build_sigma(cfg)
    if cfg.mode != "curve":
        raise ConfigurationError("field 'anisotropy' is only supported in curve mode")
    if words[0] != "harmonic":
        raise ConfigurationError(f"field 'anisotropy': unknown kind {words[0]!r}")
    try:
        nums = [float(w) for w in words[1:]]
    except ValueError:
        raise ConfigurationError("field 'anisotropy': expected 'harmonic base amplitude k'") from None
    return AnisotropicSigma.harmonic(*nums[:2], *(int(k) for k in nums[2:3]))


def build_params(cfg: RunConfig, dt):
    return Params(mu=cfg.mu, gamma=cfg.gamma, dt=dt, t_end=cfg.t_end,
                  cfl_safety=cfg.cfl_safety, scheme=cfg.scheme)


def _numbers(words, count_min, count_max, spec):
    if not count_min <= len(words) <= count_max:
        raise ConfigurationError(f"field 'initial': cannot parse {spec!r}")
    try:
        return [float(w) for w in words]
    except ValueError:
        raise ConfigurationError(f"field 'initial': cannot parse {spec!r}") from None


def random_sine_params(seed):
    """Amplitude in [0, 2], mode in {1, 2, 3}, offset in [-1, 1]."""
    rng = np.random.default_rng(seed)
    return float(rng.uniform(0.0, 2.0)), int(rng.integers(1, 4)), float(rng.uniform(-1.0, 1.0))


def graph_initial(cfg: RunConfig, base_dir=None):
    """``(grid, u0)`` from the preset or sample file named by ``cfg.initial``."""
    spec = cfg.initial_spec
    words = shlex.split(spec)
    kind = words[0].lower()
    if kind == "constant":
        (c,) = _numbers(words[1:], 1, 1, spec)
        grid = Grid1D(cfg.n)
        return grid, np.full(grid.n, c)
    if kind == "sine":
        nums = _numbers(words[1:], 2, 3, spec)
        a, k = nums[0], nums[1]
        b = nums[2] if len(nums) == 3 else 0.0
        if k != int(k):
            raise ConfigurationError("field 'initial': sine mode must be an integer")
        grid = Grid1D(cfg.n)
        return grid, a * np.sin(2 * np.pi * int(k) * grid.x) + b
    if kind == "random_sine":
        seed = int(_numbers(words[1:], 1, 1, spec)[0]) if len(words) > 1 else cfg.seed
        a, k, b = random_sine_params(seed)
        grid = Grid1D(cfg.n)
        return grid, a * np.sin(2 * np.pi * k * grid.x) + b
    if kind in ("circle", "ellipse"):
        raise ConfigurationError(f"field 'initial': {kind!r} needs mode=curve")
    from .io import read_csv
    path = Path(spec)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    if not path.exists():
        raise ConfigurationError(f"field 'initial': unknown preset or missing file {spec!r}")
    table = read_csv(path)
    u = table["u"] if "u" in table else next(iter(table.values()))
    return Grid1D(len(u)), np.asarray(u, dtype=float)


def curve_initial(cfg: RunConfig, base_dir=None):
    spec = cfg.initial_spec
    words = shlex.split(spec)
    kind = words[0].lower()
    if kind == "circle":
        (R,) = _numbers(words[1:], 1, 1, spec)
        return circle(R, cfg.m, alpha=cfg.alpha0)
    if kind == "ellipse":
        a, b = _numbers(words[1:], 2, 2, spec)
        return ellipse(a, b, cfg.m, alpha=cfg.alpha0)
    if kind in ("constant", "sine", "random_sine"):
        raise ConfigurationError(f"field 'initial': {kind!r} needs mode=graph")
    from .io import read_csv
    path = Path(spec)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    if not path.exists():
        raise ConfigurationError(f"field 'initial': unknown preset or missing file {spec!r}")
    table = read_csv(path)
    return CurveState(np.column_stack([table["x"], table["y"]]), cfg.alpha0)
