"""Band-gap spectral density and its two-pseudomode decomposition.

All frequencies and rates are in units of the qubit/pseudomode coupling
Omega, which is therefore fixed to 1.  Only the detuning
``delta = omega_c - omega_0`` enters the rotating-frame dynamics.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ParameterError

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class BandGapSpectrum:
    """Two Lorentzians centred at ``omega_c``, the second with negative weight."""

    W1: float
    W2: float
    Gamma1: float
    Gamma2: float
    omega_c: float = 0.0

    def __post_init__(self):
        for name in ("W1", "W2", "Gamma1", "Gamma2", "omega_c"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if abs(self.W1 - self.W2 - 1.0) > _WEIGHT_TOL:
            raise ParameterError(f"W1 - W2 must equal 1, got {self.W1 - self.W2!r}")
        if self.W1 <= 0 or self.W2 < 0:
            raise ParameterError("need W1 > 0 and W2 >= 0")
        if self.Gamma1 <= 0 or self.Gamma2 <= 0:
            raise ParameterError("Lorentzian widths must be positive")
        g1, g2 = _decay_rates(self)
        if g1 < -_WEIGHT_TOL * max(self.Gamma1, self.Gamma2) or g2 <= 0:
            raise ParameterError(
                f"spectrum yields negative pseudomode decay rates ({g1:.6g}, {g2:.6g})"
            )


@dataclass(frozen=True)
class PseudomodeParams:
    """Constants of the two-pseudomode master equation (units of Omega)."""

    gamma1p: float
    gamma2p: float
    V: float
    delta: float = 0.0
    Omega: float = 1.0

    def __post_init__(self):
        if self.Omega != 1.0:
            raise ParameterError("Omega is the unit of frequency and must be 1")
        if self.gamma1p < 0 or self.gamma2p < 0:
            raise ParameterError("pseudomode decay rates must be non-negative")
        for name in ("gamma1p", "gamma2p", "V", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")


def _decay_rates(s: BandGapSpectrum) -> tuple[float, float]:
    return s.W1 * s.Gamma2 - s.W2 * s.Gamma1, s.W1 * s.Gamma1 - s.W2 * s.Gamma2


def spectral_density(omega, s: BandGapSpectrum):
    """Density of states D(omega); works elementwise on arrays.

    Negative values are returned as is; for a valid spectrum they do not occur.
    """
    x2 = (omega - s.omega_c) ** 2
    return s.W1 * s.Gamma1 / (x2 + (s.Gamma1 / 2) ** 2) - s.W2 * s.Gamma2 / (
        x2 + (s.Gamma2 / 2) ** 2
    )


def derive_pseudomodes(s: BandGapSpectrum, delta: float = 0.0) -> PseudomodeParams:
    g1, g2 = _decay_rates(s)
    if g2 <= 0:
        raise ParameterError(f"second pseudomode decay rate {g2!r} is not positive")
    if g1 < 0:
        # round-off from a perfect gap lands here, e.g. 1.1*1 - 0.1*11
        if g1 < -_WEIGHT_TOL * max(s.Gamma1, s.Gamma2):
            raise ParameterError(f"first pseudomode decay rate {g1!r} is negative")
        g1 = 0.0
    V = math.sqrt(s.W1 * s.W2) * (s.Gamma1 - s.Gamma2) / 2
    params = PseudomodeParams(gamma1p=g1, gamma2p=g2, V=V, delta=delta)
    if params.Omega > g2 / 4:
        warnings.warn(
            f"Omega > Gamma'_2/4 ({g2 / 4:.3g}); strong-coupling regime (heuristic)",
            stacklevel=2,
        )
    return params


def check_perfect_gap(s: BandGapSpectrum, tol: float = 1e-12) -> bool:
    """True when D(omega_c) vanishes, i.e. W1/Gamma1 == W2/Gamma2 within ``tol``."""
    if tol <= 0:
        raise ParameterError("tol must be positive")
    return abs(s.W1 / s.Gamma1 - s.W2 / s.Gamma2) <= tol


DEFAULT_SPECTRUM = BandGapSpectrum(W1=1.1, W2=0.1, Gamma1=11.0, Gamma2=1.0)
