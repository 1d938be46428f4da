"""Optimal post-measurement strength, optimal trapping curves, ESD thresholds, sweeps."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import dynamics
from .entanglement import ConcurrenceResult, concurrence_protocol
from .errors import BandgapTrapError, NonMonotoneError
from .integrate import IntegratorOptions
from .protocol import (
    PostBranch,
    XComponents,
    assemble_x,
    check_strength,
    post_measure,
    pre_measure,
    select_branch,
)
from .spectral import PseudomodeParams

ESD_EPS = 1e-6
ESD_TIME_POINTS = 2000
ESD_REFINE = 10
TRAP_TOL = 1e-2


@dataclass(frozen=True)
class OptimalPoint:
    p_r_star: float
    C_opt: float
    P_opt: float
    branch: PostBranch
    boundary: bool = False


class ProtocolPoint(NamedTuple):
    branch: PostBranch
    C: float
    P: float
    x: XComponents


def worker_count() -> int:
    raw = os.environ.get("BANDGAP_TRAP_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise BandgapTrapError(f"BANDGAP_TRAP_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise BandgapTrapError(f"BANDGAP_TRAP_THREADS must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items, threads: int | None = None) -> list:
    """Map over a worker pool; results keep the input order."""
    items = list(items)
    threads = threads or worker_count()
    if threads == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def concurrence_at(x: XComponents, p_r: float, branch: PostBranch) -> float:
    return concurrence_protocol(post_measure(x, p_r, branch)).value


def evaluate_point(theta: float, p: float, p_r: float, amps) -> ProtocolPoint:
    """Full protocol at one time with a fixed post-measurement strength.

    ``amps`` are the (already normalised) amplitudes at that time; the branch
    is chosen by comparing the ``|gg>`` and ``|ee>`` weights.
    """
    x = assemble_x(theta, p, amps)
    branch = select_branch(x)
    post = post_measure(x, p_r, branch)
    return ProtocolPoint(branch, concurrence_protocol(post).value, post.P, post)


def optimal_pr(x: XComponents) -> OptimalPoint:
    """Closed-form maximiser of the concurrence over the post-measurement strength.

    With ``s = 1 - p_r`` the concurrence is ``s(|d| - c/2)`` over the branch
    weight; it peaks at ``s = sqrt(a/b)`` (weak branch, ``a < b``) or
    ``s = sqrt(b/a)`` (reversal, ``a >= b``).  Corners ``a = 0`` or ``b = 0``
    have no interior optimum and fall back to the grid search.
    """
    if x.a + x.b <= 0:
        raise ValueError("optimal_pr needs a + b > 0")
    if x.a == 0 or x.b == 0:
        g = grid_validate(x, 1e-4)
        return OptimalPoint(g.p_r_star, g.C_opt, g.P_opt, g.branch, boundary=True)
    branch = select_branch(x)
    ratio = x.a / x.b if branch == PostBranch.WeakMeasurement else x.b / x.a
    p_r = min(max(1.0 - math.sqrt(ratio), 0.0), 1.0)
    post = post_measure(x, p_r, branch)
    return OptimalPoint(p_r, concurrence_protocol(post).value, post.P, branch)


def grid_validate(x: XComponents, grid_step: float = 1e-4) -> OptimalPoint:
    """Brute-force argmax of the concurrence over ``p_r`` for both branches.

    Ties keep the earliest grid point and prefer the branch ``select_branch`` picks.
    """
    if not (0 < grid_step <= 0.01):
        raise ValueError("grid_step must lie in (0, 0.01]")
    n = int(round(1.0 / grid_step))
    grid = np.linspace(0.0, 1.0, n + 1)
    s = 1.0 - grid
    preferred = select_branch(x)
    best = None
    for branch in (preferred, PostBranch(1 - preferred)):
        if branch == PostBranch.WeakMeasurement:
            a, b = np.full_like(s, x.a), x.b * s * s
        else:
            a, b = x.a * s * s, np.full_like(s, x.b)
        c, d = x.c * s, abs(x.d) * s
        P = a + b + c
        ok = P > 0
        if not ok.any():
            continue
        C = np.full_like(s, -1.0)
        C[ok] = np.minimum(2 * np.maximum(d[ok] - c[ok] / 2, 0.0) / P[ok], 1.0)
        k = int(np.argmax(C))
        if best is None or C[k] > best.C_opt:
            best = OptimalPoint(float(grid[k]), float(C[k]), float(P[k]), branch,
                                boundary=x.a == 0 or x.b == 0)
    if best is None:
        raise BandgapTrapError("no feasible post-measurement strength")
    return best


def optimal_curves(
    theta: float,
    p: float,
    params: PseudomodeParams,
    t_grid,
    opts: IntegratorOptions | None = None,
    normalization: str = "unit",
    trajectory: dynamics.Trajectory | None = None,
) -> list:
    """Rows ``(omega_t, C_opt, P_opt, p_r_star, branch)`` along a time grid."""
    check_strength(p)
    traj = trajectory if trajectory is not None else dynamics.evolve(params, t_grid, opts)
    amps = dynamics.protocol_amplitudes(traj, normalization)
    rows = []
    for t, c in zip(traj.times, amps):
        pt = optimal_pr(assemble_x(theta, p, c))
        rows.append((float(t), pt.C_opt, pt.P_opt, pt.p_r_star, pt.branch))
    return rows


def optimal_vs_p(theta, ps, amps_at_t) -> list:
    """Optimal points at a single time for a list of pre-measurement strengths."""
    return [optimal_pr(assemble_x(theta, p, amps_at_t)) for p in ps]


# --------------------------------------------------------------------------- ESD


class TimeSampler:
    """Amplitudes on a uniform grid plus cached 10x refinements of single cells.

    Build one and pass it to :func:`esd_threshold` / :func:`first_zero_time`
    to share the trajectory between calls.
    """

    def __init__(self, params, t_max=30.0, n_points=ESD_TIME_POINTS, opts=None, normalization="unit"):
        self.params, self.opts, self.normalization = params, opts, normalization
        self.t = np.linspace(0.0, t_max, n_points)
        self.traj = dynamics.evolve(params, self.t, opts)
        self.raw = self.traj.amplitudes
        self.amps = dynamics.protocol_amplitudes(self.raw, normalization)
        self._cells: dict = {}

    def cell(self, i):
        """Times and amplitudes strictly inside ``[t_i, t_{i+1}]`` at 10x density."""
        if i not in self._cells:
            sub = np.linspace(self.t[i], self.t[i + 1], ESD_REFINE + 1)
            tr = dynamics.evolve_from(self.params, self.raw[i], sub, self.opts)
            amps = dynamics.protocol_amplitudes(tr.amplitudes[1:-1], self.normalization)
            self._cells[i] = (sub[1:-1], amps)
        return self._cells[i]


def _concurrence_fn(theta, p, policy):
    if policy == "zero":
        return lambda c: evaluate_point(theta, p, 0.0, c).C
    if policy == "optimal":
        return lambda c: optimal_pr(assemble_x(theta, p, c)).C_opt
    raise ValueError(f"p_r policy must be 'zero' or 'optimal', got {policy!r}")


def _cells_to_refine(C):
    """Cells adjacent to sign changes of ``C - eps`` or to positive discrete local minima.

    Minima already at or below ``eps`` need no refinement: the zero is seen.
    """
    above = C > ESD_EPS
    cells = set(np.flatnonzero(above[:-1] != above[1:]))
    inner = np.flatnonzero((C[1:-1] <= C[:-2]) & (C[1:-1] <= C[2:]) & above[1:-1]) + 1
    for i in inner:
        cells.update((i - 1, i))
    return sorted(cells)


def _concurrence_samples(sampler, theta, p, policy):
    fn = _concurrence_fn(theta, p, policy)
    C = np.array([fn(c) for c in sampler.amps])
    t, vals = [sampler.t], [C]
    for i in _cells_to_refine(C):
        ti, amps = sampler.cell(i)
        t.append(ti)
        vals.append(np.array([fn(c) for c in amps]))
    t, vals = np.concatenate(t), np.concatenate(vals)
    order = np.argsort(t, kind="stable")
    return t[order], vals[order]


def _never_vanishes(sampler, theta, p, policy) -> bool:
    return bool(_concurrence_samples(sampler, theta, p, policy)[1].min() > ESD_EPS)


def esd_threshold(
    theta: float,
    params: PseudomodeParams,
    p_r_policy: str = "zero",
    t_max: float = 30.0,
    tol_p: float = 1e-3,
    opts: IntegratorOptions | None = None,
    normalization: str = "unit",
    p_max: float = 0.99,
    n_coarse: int = 21,
    sampler: TimeSampler | None = None,
) -> float:
    """Smallest pre-measurement strength above which the concurrence never vanishes on ``[0, t_max]``.

    Returns 0 when there is no ESD without measurement.  The predicate is
    evaluated on a coarse ``p`` grid first and must switch from False to True
    exactly once; otherwise :class:`NonMonotoneError` carries the grid data.
    """
    if tol_p <= 0:
        raise ValueError("tol_p must be positive")
    s = sampler or TimeSampler(params, t_max, ESD_TIME_POINTS, opts, normalization)
    pred = lambda p: _never_vanishes(s, theta, p, p_r_policy)
    if pred(0.0):
        return 0.0
    coarse = np.linspace(0.0, p_max, n_coarse)
    flags = [pred(float(p)) for p in coarse]
    data = list(zip(coarse.tolist(), flags))
    if not flags[-1]:
        raise NonMonotoneError(f"concurrence still vanishes at p={p_max}", data)
    first = flags.index(True)
    if not all(flags[first:]):
        raise NonMonotoneError("ESD predicate is not monotone in p", data)
    lo, hi = float(coarse[first - 1]), float(coarse[first])
    while hi - lo > tol_p:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def first_zero_time(
    theta: float,
    p: float,
    params: PseudomodeParams,
    p_r_policy: str = "zero",
    t_max: float = 30.0,
    opts: IntegratorOptions | None = None,
    normalization: str = "unit",
    sampler: TimeSampler | None = None,
) -> float | None:
    """Earliest time where the concurrence drops to ``ESD_EPS``; None if it never does."""
    s = sampler or TimeSampler(params, t_max, ESD_TIME_POINTS, opts, normalization)
    t, C = _concurrence_samples(s, theta, p, p_r_policy)
    below = np.flatnonzero(C <= ESD_EPS)
    if below.size == 0:
        return None
    k = below[0]
    if k == 0:
        return float(t[0])
    c0, c1 = C[k - 1] - ESD_EPS, C[k] - ESD_EPS
    return float(t[k - 1] + (t[k] - t[k - 1]) * c0 / (c0 - c1))


def is_trapped(concurrence_curve, times, t_max: float = 30.0) -> bool:
    """Trapping: ``|C(t_max) - C(t_max/2)| < 1e-2`` with ``C(t_max) > 0``."""
    C = np.interp([t_max / 2, t_max], times, concurrence_curve)
    return bool(C[1] > ESD_EPS and abs(C[1] - C[0]) < TRAP_TOL)


# ------------------------------------------------------------------------- sweep


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid; ``p_r`` values are fixed strengths or the string ``"optimal"``."""

    thetas: Sequence[float]
    ps: Sequence[float]
    p_rs: Sequence[float] | str
    times: Sequence[float]

    def points(self):
        p_rs = [None] if isinstance(self.p_rs, str) else self.p_rs
        for theta in self.thetas:
            for p in self.ps:
                for p_r in p_rs:
                    for t in self.times:
                        yield theta, p, p_r, t


SWEEP_COLUMNS = ("theta", "p", "p_r", "omega_t", "branch", "C", "P", "P_pre")


def _paper_row(theta, p, p_r, t, amps):
    pre = pre_measure(theta, p).success
    if p_r is None:
        pt = optimal_pr(assemble_x(theta, p, amps))
        return (theta, p, pt.p_r_star, t, int(pt.branch), pt.C_opt, pt.P_opt, pre)
    pt = evaluate_point(theta, p, p_r, amps)
    return (theta, p, p_r, t, int(pt.branch), pt.C, pt.P, pre)


def sweep(
    grid: SweepGrid,
    params: PseudomodeParams,
    opts: IntegratorOptions | None = None,
    engine: str = "paper",
    normalization: str = "unit",
    threads: int | None = None,
) -> list:
    """Evaluate the protocol on every grid point; rows follow :data:`SWEEP_COLUMNS`.

    Rows are ordered theta, p, p_r, time (time fastest).  ``P`` is the
    success probability of the whole protocol, ``P_pre`` that of the
    pre-measurement alone.
    """
    times = np.asarray(grid.times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    eval_t = np.unique(np.concatenate([[0.0], times]))
    if engine == "paper":
        traj = dynamics.evolve(params, eval_t, opts)
        amps = dynamics.protocol_amplitudes(traj, normalization)
        lookup = {float(t): a for t, a in zip(eval_t, amps)}
        return ordered_map(
            lambda pt: _paper_row(*pt, lookup[float(pt[3])]), grid.points(), threads
        )
    if engine == "oracle":
        return _oracle_sweep(grid, params, opts, eval_t, threads)
    raise ValueError(f"engine must be 'paper' or 'oracle', got {engine!r}")


def _oracle_sweep(grid, params, opts, eval_t, threads):
    from .entanglement import concurrence_general
    from .oracle import measure_reduced, reduced_trajectory
    from .protocol import x_from_density_matrix

    keys = [(th, p) for th in grid.thetas for p in grid.ps]

    def states(key):
        reduced, _, pre = reduced_trajectory(key[0], key[1], params, eval_t, opts)
        return {float(t): r for t, r in zip(eval_t, reduced)}, pre

    cache = dict(zip(keys, ordered_map(states, keys, threads)))

    def row(pt):
        theta, p, p_r, t = pt
        reduced, pre = cache[(theta, p)]
        rho = reduced[float(t)]
        if p_r is None:
            best = optimal_pr(x_from_density_matrix(rho))
            return (theta, p, best.p_r_star, t, int(best.branch), best.C_opt, pre * best.P_opt, pre)
        post, branch, prob = measure_reduced(rho, p_r)
        C = concurrence_general(0.5 * (post + post.conj().T)).value
        return (theta, p, p_r, t, int(branch), C, pre * prob, pre)

    return ordered_map(row, grid.points(), threads)
