"""Weak measurement, reduced X-state assembly and post-measurement maps.

Both qubits are measured with the same strength.  The reduced two-qubit
state is kept in the unnormalised form

    a |0><0| + b |2><2| + c |+><+| + d |2><0| + d* |0><2|

with ``|0> = |gg>``, ``|2> = |ee>`` and ``|+> = (|eg> + |ge>)/sqrt(2)``.
The normalisation ``P = a + b + c`` is carried along and is the cumulative
success probability of everything applied so far.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DegenerateMeasurementError, ParameterError, PositivityError

_POS_TOL = 1e-12


class PostBranch(enum.IntEnum):
    """Which post-measurement is applied after the decoherence interval."""

    WeakMeasurement = 0
    Reversal = 1


@dataclass(frozen=True)
class MeasurementStrengths:
    p: float
    p_r: float = 0.0

    def __post_init__(self):
        check_strength(self.p, "p")
        check_strength(self.p_r, "p_r")


@dataclass(frozen=True)
class XComponents:
    a: float
    b: float
    c: float
    d: complex
    P: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) < -_POS_TOL:
            raise PositivityError(f"negative population in {self}")
        if abs(self.d) ** 2 > self.a * self.b + _POS_TOL:
            raise PositivityError(f"|d|^2 > ab in {self}")

    def normalized(self) -> "XComponents":
        return XComponents(self.a / self.P, self.b / self.P, self.c / self.P, self.d / self.P, 1.0)


class PreMeasured(NamedTuple):
    ee: float
    gg: float
    success: float


def check_strength(value: float, name: str = "p") -> float:
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_theta(theta: float, allow_product: bool = False) -> float:
    """Validate the Bell-like-state angle; product states only on request."""
    if not (0.0 <= theta <= math.pi):
        raise ParameterError(f"theta must lie in (0, pi), got {theta!r}")
    if theta in (0.0, math.pi) and not allow_product:
        raise ParameterError("theta in {0, pi} is a product state")
    return theta


def pre_measure(theta: float, p: float) -> PreMeasured:
    """Weak measurement on ``cos(theta)|ee> + sin(theta)|gg>``.

    Returns the normalised ``|ee>`` and ``|gg>`` coefficients and the success
    probability ``cos^2(theta)(1-p)^2 + sin^2(theta)``.
    """
    check_strength(p)
    ee = math.cos(theta) * (1 - p)
    gg = math.sin(theta)
    success = ee * ee + gg * gg
    if success <= 1e-300:
        warnings.warn("pre-measurement annihilates the state; returning |gg>", stacklevel=2)
        return PreMeasured(0.0, 1.0, 0.0)
    n = math.sqrt(success)
    return PreMeasured(ee / n, gg / n, success)


def assemble_x(theta: float, p: float, amps) -> XComponents:
    """Reduced X-state ingredients from the no-jump amplitudes at one time."""
    c = getattr(amps, "c", amps)
    pop = np.abs(np.asarray(c)) ** 2
    cs, sn = math.cos(theta), math.sin(theta)
    w = cs * cs * (1 - p) ** 2
    a = sn * sn + w * float(pop[3] + pop[4] + pop[5])
    b = w * float(pop[0])
    cc = w * float(pop[1] + pop[2])
    d = complex(cs * sn * (1 - p) * c[0])
    return XComponents(a, b, cc, d, a + b + cc)


def select_branch(x: XComponents) -> PostBranch:
    return PostBranch.WeakMeasurement if x.a < x.b else PostBranch.Reversal


def post_measure(x: XComponents, p_r: float, branch: PostBranch) -> XComponents:
    """Apply the post-measurement of the given branch with strength ``p_r``.

    The returned ``P`` is the new unnormalised weight ``a' + b' + c'``.
    """
    check_strength(p_r, "p_r")
    s = 1.0 - p_r
    if branch == PostBranch.WeakMeasurement:
        a, b = x.a, x.b * s * s
    else:
        a, b = x.a * s * s, x.b
    c, d = x.c * s, x.d * s
    P = a + b + c
    if P <= 0:
        raise DegenerateMeasurementError(
            f"{branch.name} with p_r={p_r} has zero success probability"
        )
    return XComponents(a, b, c, d, P)


def to_density_matrix(x: XComponents) -> np.ndarray:
    """Normalised 4x4 matrix in the basis ``|gg>, |ge>, |eg>, |ee>``."""
    if x.P <= 0:
        raise DegenerateMeasurementError("X state with zero weight")
    if abs(x.d) ** 2 > x.a * x.b + 1e-9 * x.P**2:
        raise PositivityError(f"|d|^2 exceeds ab by more than tolerance in {x}")
    n = x.normalized()  # scalar division stays finite for subnormal P
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = n.a
    rho[1, 1] = rho[2, 2] = rho[1, 2] = rho[2, 1] = n.c / 2
    rho[3, 3] = n.b
    rho[3, 0] = n.d
    rho[0, 3] = np.conj(n.d)
    return rho


def x_from_density_matrix(rho, tol: float = 1e-9) -> XComponents:
    """Inverse of :func:`to_density_matrix` for symmetric X states (``P`` = trace)."""
    rho = np.asarray(rho)
    mask = np.array(
        [[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]], dtype=bool
    )
    off = max(np.abs(rho[mask]).max(), abs(rho[1, 1] - rho[2, 2]), abs(rho[1, 2] - rho[1, 1]))
    if off > tol * max(1.0, abs(np.trace(rho))):
        raise ValueError(f"not a symmetric X state (residual {off:.3g})")
    a, b = rho[0, 0].real, rho[3, 3].real
    c = (rho[1, 1] + rho[2, 2]).real
    d = complex(rho[3, 0])
    # clip round-off so the positivity invariant holds exactly
    if abs(d) ** 2 > a * b:
        d *= math.sqrt(max(a * b, 0.0)) / abs(d)
    return XComponents(max(a, 0.0), max(b, 0.0), max(c, 0.0), d, float(np.trace(rho).real))
