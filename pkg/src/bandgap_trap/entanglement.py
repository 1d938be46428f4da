"""Wootters concurrence: general formula, X-state closed form, protocol form."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PositivityError
from .protocol import XComponents

_SY_SY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex
)


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    branch_active: str  # "zero", "u" or "v"

    def __float__(self):
        return self.value


def concurrence_general(rho) -> ConcurrenceResult:
    """Concurrence of a two-qubit density matrix from the spin-flip spectrum.

    With ``rho = W W^dagger`` (``W = U sqrt(D)`` from the eigendecomposition),
    the square roots of the eigenvalues of ``rho (sy sy) rho* (sy sy)`` are the
    singular values of ``tau = W^T (sy sy) W``.  Working with ``tau`` keeps
    small square roots accurate; square-rooting tiny eigenvalues of the
    product would turn 1e-16 round-off into 1e-8 errors.  Negative round-off
    eigenvalues of ``rho`` are clamped to zero.  ``branch_active`` is ``"v"``
    for any positive value.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("expected a 4x4 density matrix")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > 1e-10:
        raise PositivityError(f"matrix is not Hermitian (residual {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-10:
        raise PositivityError(f"trace {tr!r} differs from 1")
    w, U = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w.min() < -1e-9:
        raise PositivityError(f"matrix has negative eigenvalue {w.min():.3g}")
    W = U * np.sqrt(np.clip(w, 0.0, None))
    r = np.linalg.svd(W.T @ _SY_SY @ W, compute_uv=False)  # descending
    value = float(np.clip(r[0] - r[1] - r[2] - r[3], 0.0, 1.0))
    return ConcurrenceResult(value, "v" if value > 0 else "zero")


def concurrence_x(x, y, z, w, u, v) -> ConcurrenceResult:
    """Closed form ``2 max{0, |u| - sqrt(xw), |v| - sqrt(yz)}`` for an X state.

    ``x, y, z, w`` are the diagonal entries, ``u = <ge|rho|eg>`` and
    ``v = <gg|rho|ee>``.
    """
    if min(x, y, z, w) < -1e-12:
        raise PositivityError("negative diagonal entry")
    if abs(x + y + z + w - 1) > 1e-10:
        raise PositivityError("X state is not normalised")
    tol = 1e-10
    if abs(u) ** 2 > y * z + tol or abs(v) ** 2 > x * w + tol:
        raise PositivityError("X state is not positive semidefinite")
    tu = abs(u) - np.sqrt(max(x * w, 0.0))
    tv = abs(v) - np.sqrt(max(y * z, 0.0))
    if max(tu, tv) <= 0:
        return ConcurrenceResult(0.0, "zero")
    if tu > tv:
        return ConcurrenceResult(float(min(2 * tu, 1.0)), "u")
    return ConcurrenceResult(float(min(2 * tv, 1.0)), "v")


def concurrence_protocol(x: XComponents) -> ConcurrenceResult:
    """``(2/P) max{0, |d| - c/2}`` on an already post-measured X state.

    The discarded term ``c/2 - sqrt(ab)`` is checked, not assumed, to be
    non-positive; a violation raises because the short form would be wrong.
    """
    u_term = x.c / 2 - np.sqrt(x.a * x.b)
    if u_term > 1e-12 * max(x.P, 1.0):
        raise PositivityError(
            f"c/2 - sqrt(ab) = {u_term:.3g} > 0; the short concurrence form does not apply"
        )
    v_term = abs(x.d) - x.c / 2
    if v_term <= 0:
        return ConcurrenceResult(0.0, "zero")
    return ConcurrenceResult(float(min(2 * v_term / x.P, 1.0)), "v")
