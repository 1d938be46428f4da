"""Adaptive Dormand-Prince 5(4) integrator for complex linear-ish ODE systems.

Output times are hit exactly by clipping the step; there is no dense-output
interpolation.  An optional ``post_step`` hook may project the state after
every accepted step (used to re-symmetrise density matrices).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import IntegrationError

# Dormand & Prince (1980) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A_ROWS = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A = np.zeros((7, 7))
for _i, _row in enumerate(_A_ROWS):
    _A[_i, : len(_row)] = _row
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = np.inf
    first_step: Optional[float] = None
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("integrator tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("time grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(t)):
        raise ValueError("time grid must be finite")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t


def _initial_step(f, t0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    d2 = np.sqrt(np.mean(np.abs((f(t0 + h0, y1) - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def solve(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_grid,
    opts: IntegratorOptions | None = None,
    post_step: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Integrate ``y' = f(t, y)`` and return the states at every time in ``t_grid``.

    ``t_grid[0]`` is the initial time.  The result has shape ``(len(t_grid),) + y0.shape``.
    """
    opts = opts or IntegratorOptions()
    t_out = _check_grid(t_grid)
    y = np.array(y0, dtype=complex)
    shape = y.shape
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite initial state", float(t_out[0]))
    out = np.empty((t_out.size, y.size), dtype=complex)
    out[0] = y.ravel()
    if t_out.size == 1:
        return out.reshape((t_out.size,) + shape)

    # work on flat vectors so stage sums are single matrix products
    user_f, user_hook = f, post_step
    f = lambda t, v: np.asarray(user_f(t, v.reshape(shape)), dtype=complex).ravel()
    if user_hook is not None:
        post_step = lambda v: np.asarray(user_hook(v.reshape(shape)), dtype=complex).ravel()
    y = y.ravel()

    t = t_out[0]
    fy = f(t, y)
    h = opts.first_step or _initial_step(f, t, y, fy, opts.rtol, opts.atol)
    h = min(h, opts.max_step)
    k = np.empty((7, y.size), dtype=complex)
    steps = 0
    for idx in range(1, t_out.size):
        t_target = t_out[idx]
        while t < t_target:
            steps += 1
            if steps > opts.max_steps:
                raise IntegrationError("maximum number of steps exceeded", t)
            h_min = 16 * np.finfo(float).eps * max(abs(t), 1.0)
            if h < h_min:
                raise IntegrationError("step size underflow", t)
            clipped = t + h >= t_target
            h_try = t_target - t if clipped else h

            k[0] = fy
            for s in range(1, 7):
                k[s] = f(t + _C[s] * h_try, y + h_try * (_A[s, :s] @ k[:s]))
            y_new = y + h_try * (_B5 @ k)
            err = h_try * (_E @ k)
            scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = np.sqrt(np.mean(np.abs(err / scale) ** 2))

            if not np.isfinite(err_norm) or not np.all(np.isfinite(y_new)):
                if not np.all(np.isfinite(y)):
                    raise IntegrationError("non-finite state", t)
                h = 0.5 * h_try
                continue

            if err_norm <= 1.0:
                t = t_target if clipped else t + h_try
                y = y_new
                if post_step is not None:
                    y = post_step(y)
                    fy = f(t, y)
                else:
                    fy = k[6]  # FSAL
                factor = (
                    _MAX_FACTOR
                    if err_norm == 0
                    else min(_MAX_FACTOR, _SAFETY * err_norm ** -0.2)
                )
                # a clipped step says nothing about the natural step length
                h_next = h_try * factor
                h = min(max(h, h_next) if clipped else h_next, opts.max_step)
            else:
                h = h_try * max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", t)
        out[idx] = y
    return out.reshape((t_out.size,) + shape)
