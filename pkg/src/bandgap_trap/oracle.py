"""Full pseudomode master equation for two qubits and two lossy modes.

This is the brute-force counterpart of the amplitude pipeline: it keeps the
quantum-jump terms the no-jump amplitudes drop.  States are dense matrices
over product kets ``|qA, qB, n1, n2>`` with at most ``max_excitations``
quanta in total.  Because the Hamiltonian conserves the excitation number
and the jumps lower it, truncating at the initial excitation number is exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .entanglement import ConcurrenceResult, concurrence_general
from .errors import DegenerateMeasurementError
from .integrate import IntegratorOptions, solve
from .protocol import PostBranch, check_strength, pre_measure
from .spectral import PseudomodeParams


@dataclass(frozen=True)
class TruncatedBasis:
    """Product kets ``(qA, qB, n1, n2)`` ordered by excitation number, then lexicographically.

    ``q = 0`` is ``g`` and ``q = 1`` is ``e``.
    """

    max_excitations: int = 2
    fock_cutoff: int = 2

    @cached_property
    def states(self) -> tuple:
        ranges = (range(2), range(2), range(self.fock_cutoff + 1), range(self.fock_cutoff + 1))
        kets = [k for k in itertools.product(*ranges) if sum(k) <= self.max_excitations]
        return tuple(sorted(kets, key=lambda k: (sum(k), k)))

    @cached_property
    def index(self) -> dict:
        return {k: i for i, k in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    def excitations(self) -> np.ndarray:
        return np.array([sum(k) for k in self.states])

    def _lowering(self, slot: int) -> np.ndarray:
        op = np.zeros((self.dim, self.dim))
        for j, ket in enumerate(self.states):
            n = ket[slot]
            if n == 0:
                continue
            lowered = list(ket)
            lowered[slot] -= 1
            op[self.index[tuple(lowered)], j] = math.sqrt(n)
        return op

    @cached_property
    def sigma_minus_a(self):
        return self._lowering(0)

    @cached_property
    def sigma_minus_b(self):
        return self._lowering(1)

    @cached_property
    def a1(self):
        return self._lowering(2)

    @cached_property
    def a2(self):
        return self._lowering(3)

    def ket(self, qa: int, qb: int, n1: int = 0, n2: int = 0) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[(qa, qb, n1, n2)]] = 1.0
        return v


DEFAULT_BASIS = TruncatedBasis()


@dataclass(frozen=True)
class OracleState:
    t: float
    rho: np.ndarray


def build_hamiltonian(params: PseudomodeParams, basis: TruncatedBasis = DEFAULT_BASIS) -> np.ndarray:
    """Rotating-frame effective Hamiltonian (frame at the qubit frequency)."""
    a1, a2 = basis.a1, basis.a2
    s_minus = basis.sigma_minus_a + basis.sigma_minus_b
    # lowering factors act first: a raising-first product would be clipped by the truncation
    hop_qubit = a2.T @ s_minus
    hop_modes = a1.T @ a2
    H = params.delta * (a1.T @ a1 + a2.T @ a2)
    H = H + params.Omega * (hop_qubit + hop_qubit.T)
    H = H + params.V * (hop_modes + hop_modes.T)
    return H.astype(complex)


def _dissipators(params, basis):
    return [(params.gamma1p, basis.a1), (params.gamma2p, basis.a2)]


def lindblad_rhs(rho, params: PseudomodeParams, basis: TruncatedBasis = DEFAULT_BASIS) -> np.ndarray:
    rho = getattr(rho, "rho", rho)
    H = build_hamiltonian(params, basis)
    out = -1j * (H @ rho - rho @ H)
    for g, L in _dissipators(params, basis):
        if g == 0:
            continue
        LdL = L.T @ L
        out -= 0.5 * g * (LdL @ rho - 2 * L @ rho @ L.T + rho @ LdL)
    return out


def liouvillian(params: PseudomodeParams, basis: TruncatedBasis = DEFAULT_BASIS) -> np.ndarray:
    """Superoperator acting on row-major ``rho.ravel()``."""
    n = basis.dim
    eye = np.eye(n)
    H = build_hamiltonian(params, basis)
    # vec(A rho B) = kron(A, B.T) vec(rho) for row-major flattening
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for g, J in _dissipators(params, basis):
        if g == 0:
            continue
        JdJ = J.T @ J
        L += g * np.kron(J, J) - 0.5 * g * (np.kron(JdJ, eye) + np.kron(eye, JdJ.T))
    return L


def evolve_me(
    rho0,
    params: PseudomodeParams,
    t_grid,
    opts: IntegratorOptions | None = None,
    basis: TruncatedBasis = DEFAULT_BASIS,
) -> list:
    """Integrate the master equation; the state is re-symmetrised after each step."""
    n = basis.dim
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (n, n):
        raise ValueError(f"initial state must be {n}x{n}")
    L = liouvillian(params, basis)

    def hermitize(y):
        m = y.reshape(n, n)
        return (0.5 * (m + m.conj().T)).ravel()

    t = np.asarray(t_grid, dtype=float)
    ys = solve(lambda _t, y: L @ y, rho0.ravel(), t, opts, post_step=hermitize)
    return [OracleState(float(ti), y.reshape(n, n)) for ti, y in zip(t, ys)]


def reduced_qubits(rho, basis: TruncatedBasis = DEFAULT_BASIS) -> np.ndarray:
    """Partial trace over both pseudomodes; basis ``|gg>, |ge>, |eg>, |ee>``."""
    rho = getattr(rho, "rho", rho)
    out = np.zeros((4, 4), dtype=complex)
    by_modes: dict = {}
    for i, (qa, qb, n1, n2) in enumerate(basis.states):
        by_modes.setdefault((n1, n2), []).append((2 * qa + qb, i))
    for entries in by_modes.values():
        for qi, i in entries:
            for qj, j in entries:
                out[qi, qj] += rho[i, j]
    return out


def initial_state(theta: float, p: float, basis: TruncatedBasis = DEFAULT_BASIS):
    """Pre-measured Bell-like state times the pseudomode vacuum, and its success probability."""
    pm = pre_measure(theta, p)
    psi = pm.ee * basis.ket(1, 1) + pm.gg * basis.ket(0, 0)
    return np.outer(psi, psi.conj()), pm.success


def _post_operator(p_r: float, branch: PostBranch) -> np.ndarray:
    s = math.sqrt(1 - p_r)
    single = np.diag([1.0, s]) if branch == PostBranch.WeakMeasurement else np.diag([s, 1.0])
    return np.kron(single, single)


def measure_reduced(rho_q, p_r: float, branch: PostBranch | None = None):
    """Apply the post-measurement to a normalised qubit state.

    Returns ``(normalised state, branch, conditional success probability)``.
    The branch defaults to comparing the ``|gg>`` and ``|ee>`` populations.
    """
    check_strength(p_r, "p_r")
    if branch is None:
        branch = PostBranch.WeakMeasurement if rho_q[0, 0].real < rho_q[3, 3].real else PostBranch.Reversal
    M = _post_operator(p_r, branch)
    out = M @ rho_q @ M.conj().T
    prob = np.trace(out).real
    if prob <= 0:
        raise DegenerateMeasurementError(f"{branch.name} with p_r={p_r} annihilates the state")
    return out / prob, branch, prob


def reduced_trajectory(theta, p, params, t_grid, opts=None, basis=DEFAULT_BASIS):
    """Normalised reduced qubit states at every grid time, plus the pre-measurement success."""
    rho0, success = initial_state(theta, p, basis)
    states = evolve_me(rho0, params, t_grid, opts, basis)
    return [reduced_qubits(s.rho, basis) for s in states], states, success


def oracle_protocol(
    theta: float,
    p: float,
    p_r: float,
    params: PseudomodeParams,
    t: float,
    opts: IntegratorOptions | None = None,
    branch: PostBranch | None = None,
) -> tuple[ConcurrenceResult, float]:
    """Full-ME version of the protocol at one time.

    The success probability is the product of the pre-measurement and the
    post-measurement probabilities (jump trajectories are not discarded).
    """
    grid = [0.0] if t == 0 else [0.0, t]
    reduced, _, success = reduced_trajectory(theta, p, params, grid, opts)
    rho, _, prob = measure_reduced(reduced[-1], p_r, branch)
    rho = 0.5 * (rho + rho.conj().T)
    return concurrence_general(rho), success * prob
