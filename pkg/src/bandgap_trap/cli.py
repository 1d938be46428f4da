"""``bandgap-trap`` command line: scenario runners and table emission."""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dynamics, optimize
from .config import RunConfig, load_config
from .entanglement import concurrence_general
from .errors import BandgapTrapError, ConfigError
from .oracle import DEFAULT_BASIS, measure_reduced, reduced_trajectory
from .protocol import assemble_x, x_from_density_matrix

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
NO_ZERO = -1.0  # t_first_zero_at_p0 when the concurrence never vanishes


@dataclass
class ResultTable:
    columns: tuple
    rows: list = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            self.check_row(row)

    def check_row(self, row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} values, expected {len(self.columns)}")
        if not all(math.isfinite(float(v)) for v in row):
            raise ValueError(f"non-finite value in row {row}")

    def append(self, row):
        row = tuple(float(v) for v in row)
        self.check_row(row)
        self.rows.append(row)

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def format_table(table: ResultTable, fmt: str = "csv") -> str:
    if fmt == "csv":
        lines = [",".join(table.columns)]
        lines += [",".join(f"{v:.12e}" for v in row) for row in table.rows]
    elif fmt == "plotdata":
        lines = ["# " + " ".join(table.columns)]
        lines += [" ".join(f"{v:.12e}" for v in row) for row in table.rows]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return "\n".join(lines) + "\n"


def emit(table: ResultTable, fmt: str = "csv", path=None) -> str:
    """Write the table as UTF-8 text with LF endings; returns the text."""
    text = format_table(table, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def read_csv(text: str) -> ResultTable:
    lines = text.rstrip("\n").split("\n")
    cols = tuple(lines[0].split(","))
    return ResultTable(cols, [tuple(float(v) for v in ln.split(",")) for ln in lines[1:]])


# ----------------------------------------------------------------- scenarios

SIMULATE_COLUMNS = (
    ("omega_t",)
    + tuple(f"{part}_c{i}" for i in range(1, 7) for part in ("re", "im"))
    + ("norm", "a", "b", "c", "abs_d", "P", "C")
)
OPTIMIZE_COLUMNS = ("theta", "p", "omega_t", "p_r_star", "C_opt", "P_opt", "branch", "P_pre")
ESD_COLUMNS = ("theta", "p_star", "t_first_zero_at_p0")
COMPARE_COLUMNS = ("omega_t", "C_paper", "C_oracle", "delta_C", "coherence_residual")


def _oracle_concurrence(rho, p_r):
    if p_r == "optimal":
        return optimize.optimal_pr(x_from_density_matrix(rho)).C_opt
    post, _, _ = measure_reduced(rho, p_r)
    return concurrence_general(0.5 * (post + post.conj().T)).value


def _paper_concurrence(theta, p, p_r, amps):
    if p_r == "optimal":
        return optimize.optimal_pr(assemble_x(theta, p, amps)).C_opt
    return optimize.evaluate_point(theta, p, p_r, amps).C


def run_simulate(cfg: RunConfig) -> ResultTable:
    params, opts = cfg.params(), cfg.integrator()
    times = np.asarray(cfg.times())
    traj = dynamics.evolve(params, np.unique(np.concatenate([[0.0], times])), opts)
    keep = np.isin(traj.times, times)
    raw = traj.amplitudes[keep]
    amps = dynamics.protocol_amplitudes(raw, cfg.normalization)
    if cfg.engine == "oracle":
        reduced, _, _ = reduced_trajectory(cfg.theta, cfg.p, params, traj.times, opts)
        reduced = [r for r, k in zip(reduced, keep) if k]
    table = ResultTable(SIMULATE_COLUMNS)
    for i, t in enumerate(times):
        x = assemble_x(cfg.theta, cfg.p, amps[i])
        if cfg.engine == "oracle":
            C = _oracle_concurrence(reduced[i], cfg.p_r)
        else:
            C = _paper_concurrence(cfg.theta, cfg.p, cfg.p_r, amps[i])
        flat = [v for c in raw[i] for v in (c.real, c.imag)]
        table.append([t, *flat, dynamics.norm(raw[i]), x.a, x.b, x.c, abs(x.d), x.P, C])
    return table


def run_sweep(cfg: RunConfig) -> ResultTable:
    grid = optimize.SweepGrid(cfg.thetas(), cfg.ps(), cfg.p_rs(), cfg.times())
    rows = optimize.sweep(
        grid, cfg.params(), cfg.integrator(), cfg.engine, cfg.normalization
    )
    return ResultTable(optimize.SWEEP_COLUMNS, [tuple(float(v) for v in r) for r in rows])


def run_optimize(cfg: RunConfig) -> ResultTable:
    grid = optimize.SweepGrid(cfg.thetas(), cfg.ps(), "optimal", cfg.times())
    rows = optimize.sweep(
        grid, cfg.params(), cfg.integrator(), cfg.engine, cfg.normalization
    )
    table = ResultTable(OPTIMIZE_COLUMNS)
    for theta, p, p_r, t, branch, C, P, pre in rows:
        table.append((theta, p, t, p_r, C, P, branch, pre))
    return table


def run_esd(cfg: RunConfig) -> ResultTable:
    if cfg.engine != "paper":
        raise ConfigError("esd supports only engine = paper", key="engine")
    params, opts = cfg.params(), cfg.integrator()
    sampler = optimize.TimeSampler(
        params, cfg.t_max, optimize.ESD_TIME_POINTS, opts, cfg.normalization
    )
    table = ResultTable(ESD_COLUMNS)
    for theta in cfg.thetas():
        p_star = optimize.esd_threshold(
            theta, params, cfg.p_r_policy, cfg.t_max, cfg.tol_p, opts,
            cfg.normalization, sampler=sampler,
        )
        t0 = optimize.first_zero_time(
            theta, 0.0, params, cfg.p_r_policy, cfg.t_max, opts, cfg.normalization, sampler
        )
        table.append((theta, p_star, NO_ZERO if t0 is None else t0))
    return table


def run_compare(cfg: RunConfig) -> ResultTable:
    params, opts = cfg.params(), cfg.integrator()
    times = np.asarray(cfg.times())
    eval_t = np.unique(np.concatenate([[0.0], times]))
    traj = dynamics.evolve(params, eval_t, opts)
    amps = dynamics.protocol_amplitudes(traj, cfg.normalization)
    reduced, states, pre = reduced_trajectory(cfg.theta, cfg.p, params, eval_t, opts)
    i_ee, i_gg = DEFAULT_BASIS.index[(1, 1, 0, 0)], DEFAULT_BASIS.index[(0, 0, 0, 0)]
    coeff = math.cos(cfg.theta) * math.sin(cfg.theta) * (1 - cfg.p) / pre
    table = ResultTable(COMPARE_COLUMNS)
    for k, t in enumerate(eval_t):
        if t not in times:
            continue
        Cp = _paper_concurrence(cfg.theta, cfg.p, cfg.p_r, amps[k])
        Co = _oracle_concurrence(reduced[k], cfg.p_r)
        resid = abs(states[k].rho[i_ee, i_gg] - coeff * traj[k].c[0])
        table.append((t, Cp, Co, Co - Cp, resid))
    return table


SCENARIOS = {
    "simulate": run_simulate,
    "sweep": run_sweep,
    "optimize": run_optimize,
    "esd": run_esd,
    "compare": run_compare,
}


def run_scenario(command: str, cfg: RunConfig) -> ResultTable:
    try:
        return SCENARIOS[command](cfg)
    except BandgapTrapError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise type(exc)(f"{command} (theta={cfg.theta:.6g}, p={cfg.p}, p_r={cfg.p_r}): {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bandgap-trap",
        description="Entanglement trapping with weak measurement and reversal in a photonic band gap.",
    )
    ap.add_argument("command", choices=sorted(SCENARIOS))
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--engine", choices=("paper", "oracle"))
    ap.add_argument("--preset", help="named parameter set (default, fig1a ... fig5b)")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "plotdata"))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                print(f"bandgap-trap: {exc}", file=sys.stderr)
                return EXIT_IO
        cfg = load_config(text, args.preset)
        overrides = {k: getattr(args, k) for k in ("engine", "out", "format") if getattr(args, k)}
        if overrides:
            cfg = replace(cfg, **overrides)
    except ConfigError as exc:
        print(f"bandgap-trap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = run_scenario(args.command, cfg)
    except ConfigError as exc:
        print(f"bandgap-trap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BandgapTrapError, ArithmeticError, ValueError) as exc:
        print(f"bandgap-trap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        emit(table, cfg.format, cfg.out)
    except OSError as exc:
        print(f"bandgap-trap: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
