"""Line-oriented ``key = value`` run configuration with named figure presets."""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ParameterError
from .integrate import IntegratorOptions
from .spectral import BandGapSpectrum, derive_pseudomodes

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PI_EXPR = re.compile(
    rf"^\s*(?P<sign>[-+])?\s*(?:(?P<num>{_NUMBER})\s*\*?\s*)?pi\s*(?:/\s*(?P<den>{_NUMBER}))?\s*$"
)
_FLOAT = re.compile(rf"^\s*{_NUMBER}\s*$")

ENGINES = ("paper", "oracle")
FORMATS = ("csv", "plotdata")
POLICIES = ("zero", "optimal")
NORMALIZATIONS = ("unit", "raw")


def parse_number(text: str) -> float:
    """Float literal or a multiple/fraction of ``pi`` such as ``pi/6`` or ``2*pi/3``."""
    text = text.strip()
    if _FLOAT.match(text):
        return float(text)
    m = _PI_EXPR.match(text)
    if not m:
        raise ValueError(f"cannot parse number {text!r}")
    value = math.pi * float(m["num"] or 1.0)
    if m["den"] is not None:
        den = float(m["den"])
        if den == 0:
            raise ValueError("division by zero")
        value /= den
    return -value if m["sign"] == "-" else value


def parse_grid(text: str) -> tuple:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range must be start:stop:count")
        start, stop = parse_number(parts[0]), parse_number(parts[1])
        count = int(parts[2])
        if count < 1:
            raise ValueError("count must be at least 1")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    if not text:
        raise ValueError("empty grid")
    return tuple(parse_number(v) for v in text.split(","))


@dataclass(frozen=True)
class RunConfig:
    W1: float = 1.1
    W2: float = 0.1
    Gamma1: float = 11.0
    Gamma2: float = 1.0
    delta: float = 0.0
    theta: float = math.pi / 3
    p: float = 0.0
    p_r: float | str = 0.0
    p_r_policy: str = "zero"
    engine: str = "paper"
    normalization: str = "unit"
    t_max: float = 30.0
    t_samples: int = 301
    theta_grid: tuple | None = None
    p_grid: tuple | None = None
    p_r_grid: tuple | str | None = None
    t_grid: tuple | None = None
    tol_p: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        validate(self)

    # derived objects -----------------------------------------------------
    def spectrum(self) -> BandGapSpectrum:
        return BandGapSpectrum(self.W1, self.W2, self.Gamma1, self.Gamma2)

    def params(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return derive_pseudomodes(self.spectrum(), self.delta)

    def integrator(self) -> IntegratorOptions:
        return IntegratorOptions(rtol=self.rtol, atol=self.atol, max_step=self.max_step)

    def times(self) -> tuple:
        if self.t_grid is not None:
            return self.t_grid
        if self.t_samples == 1:
            return (0.0,)
        return tuple(float(v) for v in np.linspace(0.0, self.t_max, self.t_samples))

    def thetas(self) -> tuple:
        return self.theta_grid if self.theta_grid is not None else (self.theta,)

    def ps(self) -> tuple:
        return self.p_grid if self.p_grid is not None else (self.p,)

    def p_rs(self):
        return self.p_r_grid if self.p_r_grid is not None else (
            "optimal" if self.p_r == "optimal" else (self.p_r,)
        )


_KINDS = {
    "W1": "number", "W2": "number", "Gamma1": "number", "Gamma2": "number",
    "delta": "number", "theta": "number", "p": "number", "p_r": "strength_or_optimal",
    "p_r_policy": "word", "engine": "word", "normalization": "word",
    "t_max": "number", "t_samples": "int",
    "theta_grid": "grid", "p_grid": "grid", "p_r_grid": "grid_or_optimal", "t_grid": "grid",
    "tol_p": "number", "rtol": "number", "atol": "number", "max_step": "number",
    "out": "word", "format": "word",
}


def _in_unit(v, name):
    if not (0.0 <= v <= 1.0):
        raise ConfigError(f"{name} = {v!r} outside the interval [0, 1]", key=name)


def _check_theta(v, name):
    if not (0.0 <= v <= math.pi):
        raise ConfigError(f"{name} = {v!r} outside the interval [0, pi]", key=name)
    if v in (0.0, math.pi):
        warnings.warn(f"{name} = {v!r} is a product state; concurrence is 0 throughout", stacklevel=3)


def validate(cfg: RunConfig) -> None:
    """Range checks on every field; raises :class:`ConfigError`."""
    try:
        cfg.spectrum()
    except ParameterError as exc:
        raise ConfigError(f"spectrum (W1, W2, Gamma1, Gamma2): {exc}", key="W1") from None
    if not math.isfinite(cfg.delta):
        raise ConfigError("delta must be finite", key="delta")
    _check_theta(cfg.theta, "theta")
    _in_unit(cfg.p, "p")
    if cfg.p_r != "optimal":
        if isinstance(cfg.p_r, str):
            raise ConfigError(f"p_r must be a strength in [0, 1] or 'optimal', got {cfg.p_r!r}", key="p_r")
        _in_unit(cfg.p_r, "p_r")
    for name, allowed in (
        ("p_r_policy", POLICIES), ("engine", ENGINES),
        ("normalization", NORMALIZATIONS), ("format", FORMATS),
    ):
        if getattr(cfg, name) not in allowed:
            raise ConfigError(f"{name} must be one of {allowed}, got {getattr(cfg, name)!r}", key=name)
    if not (cfg.t_max > 0 and math.isfinite(cfg.t_max)):
        raise ConfigError(f"t_max must be positive and finite, got {cfg.t_max!r}", key="t_max")
    if not (isinstance(cfg.t_samples, int) and cfg.t_samples >= 1):
        raise ConfigError(f"t_samples must be a positive integer, got {cfg.t_samples!r}", key="t_samples")
    if cfg.theta_grid is not None:
        for v in cfg.theta_grid:
            _check_theta(v, "theta_grid")
    if cfg.p_grid is not None:
        for v in cfg.p_grid:
            _in_unit(v, "p_grid")
    if cfg.p_r_grid is not None and cfg.p_r_grid != "optimal":
        if isinstance(cfg.p_r_grid, str):
            raise ConfigError("p_r_grid must be a grid or 'optimal'", key="p_r_grid")
        for v in cfg.p_r_grid:
            _in_unit(v, "p_r_grid")
    if cfg.t_grid is not None:
        if any(v < 0 or not math.isfinite(v) for v in cfg.t_grid):
            raise ConfigError("t_grid values must be finite and non-negative", key="t_grid")
        if any(b <= a for a, b in zip(cfg.t_grid, cfg.t_grid[1:])):
            raise ConfigError("t_grid must be strictly increasing", key="t_grid")
    if not (0 < cfg.tol_p < 0.5):
        raise ConfigError(f"tol_p must lie in (0, 0.5), got {cfg.tol_p!r}", key="tol_p")
    if not (cfg.rtol > 0 and cfg.atol > 0):
        raise ConfigError(f"rtol and atol must be positive, got {cfg.rtol!r}, {cfg.atol!r}", key="rtol" if cfg.rtol <= 0 else "atol")
    if not cfg.max_step > 0:
        raise ConfigError("max_step must be positive", key="max_step")
    if cfg.out is not None and not cfg.out:
        raise ConfigError("out must be a non-empty path", key="out")


def _convert(key: str, raw: str):
    kind = _KINDS[key]
    if kind == "number":
        return parse_number(raw)
    if kind == "int":
        v = parse_number(raw)
        if v != int(v):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(v)
    if kind == "word":
        if not raw:
            raise ValueError("empty value")
        return raw
    if kind == "strength_or_optimal":
        return "optimal" if raw == "optimal" else parse_number(raw)
    if kind == "grid":
        return parse_grid(raw)
    if kind == "grid_or_optimal":
        return "optimal" if raw == "optimal" else parse_grid(raw)
    raise AssertionError(kind)


def parse_overrides(text: str) -> dict:
    """Parse ``key = value`` lines into typed overrides and their line numbers.

    No range validation happens here.
    """
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KINDS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
        lines[key] = lineno
    return values, lines


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Build a validated :class:`RunConfig` from config text layered on ``base``."""
    values, lines = parse_overrides(text)
    base = base or RunConfig()
    try:
        return replace(base, **values)
    except ConfigError as exc:
        key = exc.key
        if key == "W1":
            key = next((k for k in lines if k in ("W1", "W2", "Gamma1", "Gamma2")), None)
        if key in lines:
            raise ConfigError(exc.bare, lines[key], exc.key) from None
        raise


_FIG_GRID = "0:0.98:50"
_FIG_TIMES = "0:30:151"

PRESETS = {
    "default": "",
    "fig1a": f"theta = pi/3\np_grid = {_FIG_GRID}\np_r = 0\nt_grid = {_FIG_TIMES}",
    "fig1b": f"theta = pi/3\np = 0\np_r_grid = {_FIG_GRID}\nt_grid = {_FIG_TIMES}",
    "fig1c": f"theta = pi/6\np_grid = {_FIG_GRID}\np_r = 0\nt_grid = {_FIG_TIMES}",
    "fig1d": f"theta = pi/6\np = 0\np_r_grid = {_FIG_GRID}\nt_grid = {_FIG_TIMES}",
    "fig2a": f"theta = pi/3\np_grid = {_FIG_GRID}\np_r_grid = {_FIG_GRID}\nt_grid = 15",
    "fig2b": f"theta = pi/6\np_grid = {_FIG_GRID}\np_r_grid = {_FIG_GRID}\nt_grid = 15",
    "fig3a": f"theta = pi/3\np_grid = {_FIG_GRID}\np_r = optimal\nt_grid = {_FIG_TIMES}",
    "fig3b": f"theta = pi/6\np_grid = {_FIG_GRID}\np_r = optimal\nt_grid = {_FIG_TIMES}",
    "fig4": f"theta_grid = pi/6, pi/4, pi/3\np_grid = {_FIG_GRID}\np_r = optimal\nt_grid = 15",
    "fig5a": f"theta = pi/20\np_grid = {_FIG_GRID}\np_r = 0\nt_grid = {_FIG_TIMES}",
    "fig5b": f"theta = pi/20\np = 0\np_r_grid = {_FIG_GRID}\nt_grid = {_FIG_TIMES}",
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return parse_config(PRESETS[name])


def load_config(text: str = "", preset_name: str | None = None) -> RunConfig:
    """Defaults, then the preset, then the config text."""
    base = preset(preset_name) if preset_name else RunConfig()
    return parse_config(text, base)
