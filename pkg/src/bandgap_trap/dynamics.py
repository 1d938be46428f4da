"""No-jump amplitude dynamics of the two-excitation sector.

The six amplitudes multiply, in this order, the kets
``|2,0,0>, |+,0,1>, |+,1,0>, |0,0,2>, |0,1,1>, |0,2,0>`` where the first
label is the collective qubit state (``|2> = |ee>``, ``|+>`` the symmetric
single excitation, ``|0> = |gg>``) and the other two are the occupations of
pseudomodes 1 and 2.  The system is integrated in the frame rotating at the
qubit frequency, so the only frequency left is the detuning ``delta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorOptions, solve
from .spectral import PseudomodeParams

SQRT2 = np.sqrt(2.0)
BASIS_LABELS = ("|2,0,0>", "|+,0,1>", "|+,1,0>", "|0,0,2>", "|0,1,1>", "|0,2,0>")
INITIAL_AMPLITUDES = np.array([1, 0, 0, 0, 0, 0], dtype=complex)


@dataclass(frozen=True)
class AmplitudeState:
    t: float
    c: np.ndarray

    @property
    def norm(self) -> float:
        return norm(self)


@dataclass(frozen=True)
class Trajectory:
    params: PseudomodeParams
    samples: tuple

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def amplitudes(self) -> np.ndarray:
        """Array of shape ``(n_times, 6)``."""
        return np.array([s.c for s in self.samples])

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i) -> AmplitudeState:
        return self.samples[i]


def drift_matrix(params: PseudomodeParams, omega0: float = 0.0) -> np.ndarray:
    """Matrix ``A`` with ``dC/dt = A C``.

    ``omega0`` is the qubit frequency of the frame; 0 selects the rotating
    frame.  A nonzero value reproduces the lab-frame equations with
    ``omega_c = omega0 + delta``.
    """
    W, V = params.Omega, params.V
    wc = omega0 + params.delta
    z1 = wc - 0.5j * params.gamma1p
    z2 = wc - 0.5j * params.gamma2p
    H = np.zeros((6, 6), dtype=complex)
    H[0, 0] = 2 * omega0
    H[1, 1] = omega0 + z2
    H[2, 2] = omega0 + z1
    H[3, 3] = 2 * z2
    H[4, 4] = z1 + z2
    H[5, 5] = 2 * z1
    couplings = [
        (0, 1, SQRT2 * W),
        (1, 3, 2 * W),
        (1, 2, V),
        (2, 4, SQRT2 * W),
        (3, 4, SQRT2 * V),
        (4, 5, SQRT2 * V),
    ]
    for i, j, g in couplings:
        H[i, j] = H[j, i] = g
    return -1j * H


def evolve_from(
    params: PseudomodeParams,
    c0,
    t_grid,
    opts: IntegratorOptions | None = None,
    omega0: float = 0.0,
) -> Trajectory:
    """Integrate from arbitrary amplitudes ``c0`` given at ``t_grid[0]``."""
    A = drift_matrix(params, omega0)
    c0 = np.asarray(c0, dtype=complex)
    if c0.shape != (6,):
        raise ValueError("need six amplitudes")
    t = np.asarray(t_grid, dtype=float)
    ys = solve(lambda _t, y: A @ y, c0, t, opts)
    return Trajectory(params, tuple(AmplitudeState(float(ti), yi) for ti, yi in zip(t, ys)))


def evolve(
    params: PseudomodeParams,
    t_grid,
    opts: IntegratorOptions | None = None,
    omega0: float = 0.0,
) -> Trajectory:
    """Trajectory of the amplitudes starting from ``|ee>`` and the pseudomode vacuum."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or t[0] != 0.0:
        raise ValueError("time grid must start at 0")
    return evolve_from(params, INITIAL_AMPLITUDES, t, opts, omega0)


def norm(state) -> float:
    c = state.c if isinstance(state, AmplitudeState) else np.asarray(state)
    return float(np.sum(np.abs(c) ** 2))


NORMALIZATIONS = ("unit", "raw")


def protocol_amplitudes(amps, normalization: str = "unit") -> np.ndarray:
    """Amplitudes as fed to the measurement protocol.

    ``"unit"`` rescales every sample to ``sum |C_i|^2 = 1``, i.e. the excited
    branch is conditioned on no photon having leaked out; this is the
    convention that reproduces the published trapping and ESD curves.
    ``"raw"`` passes the decaying no-jump amplitudes through unchanged.
    Accepts a :class:`Trajectory`, an :class:`AmplitudeState` or an array
    whose last axis has length 6.
    """
    if isinstance(amps, Trajectory):
        c = amps.amplitudes
    else:
        c = np.asarray(getattr(amps, "c", amps), dtype=complex)
    if normalization == "raw":
        return c
    if normalization != "unit":
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
    n = np.sqrt(np.sum(np.abs(c) ** 2, axis=-1, keepdims=True))
    if np.any(n == 0):
        raise ValueError("cannot renormalise a vanishing amplitude vector")
    return c / n
