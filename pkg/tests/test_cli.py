import math
from pathlib import Path

import numpy as np
import pytest

from bandgap_trap.cli import (
    COMPARE_COLUMNS,
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    NO_ZERO,
    OPTIMIZE_COLUMNS,
    SIMULATE_COLUMNS,
    ResultTable,
    emit,
    format_table,
    main,
    read_csv,
    run_scenario,
)
from bandgap_trap.config import load_config
from bandgap_trap.optimize import SWEEP_COLUMNS

FIXTURES = Path(__file__).parent / "fixtures"


def run(tmp_path, *args, config=None):
    out = tmp_path / "out.csv"
    argv = list(args) + ["--out", str(out)]
    if config is not None:
        cfg = tmp_path / "run.cfg"
        cfg.write_text(config, encoding="utf-8")
        argv += ["--config", str(cfg)]
    code = main(argv)
    return code, out.read_bytes() if out.exists() else None


def test_result_table_rejects_bad_rows():
    t = ResultTable(("x", "y"))
    with pytest.raises(ValueError):
        t.append((1.0,))
    with pytest.raises(ValueError):
        t.append((1.0, math.nan))
    with pytest.raises(ValueError):
        ResultTable(("x",), [(math.inf,)])


def test_emit_formats(tmp_path):
    t = ResultTable(("a", "b"), [(1.0, -2.5e-7)])
    assert format_table(t) == "a,b\n1.000000000000e+00,-2.500000000000e-07\n"
    assert format_table(t, "plotdata") == "# a b\n1.000000000000e+00 -2.500000000000e-07\n"
    path = tmp_path / "t.csv"
    emit(t, "csv", path)
    assert b"\r" not in path.read_bytes()
    with pytest.raises(ValueError):
        format_table(t, "xml")


def test_empty_table_is_header_only():
    assert format_table(ResultTable(("omega_t", "C"))) == "omega_t,C\n"


def test_csv_round_trip(rng):
    rows = [tuple(v) for v in rng.normal(size=(20, 3)) * 10.0 ** rng.integers(-8, 3, size=(20, 3))]
    back = read_csv(format_table(ResultTable(("x", "y", "z"), rows)))
    assert np.allclose(np.array(back.rows), np.array(rows), rtol=1e-12, atol=0)


def test_golden_default_simulate(tmp_path):
    code, data = run(tmp_path, "simulate")
    assert code == EXIT_OK
    assert data == (FIXTURES / "simulate_default.csv").read_bytes()


def test_simulate_columns_and_t0():
    table = run_scenario("simulate", load_config("theta = pi/5\nt_samples = 1"))
    assert table.columns == SIMULATE_COLUMNS
    assert len(table.rows) == 1
    assert table.column("C")[0] == pytest.approx(math.sin(2 * math.pi / 5), abs=1e-12)


def test_simulate_oracle_engine():
    cfg = load_config("t_samples = 7\nengine = oracle")
    oracle = run_scenario("simulate", cfg).column("C")
    paper = run_scenario("simulate", load_config("t_samples = 7")).column("C")
    assert oracle[0] == pytest.approx(paper[0], abs=1e-12)
    assert np.all(oracle <= paper + 1e-10)


def test_sweep_preset_enhancement_region():
    table = run_scenario("sweep", load_config("t_grid = 0:30:16", "fig1b"))
    assert table.columns == SWEEP_COLUMNS
    p_r, t, C = table.column("p_r"), table.column("omega_t"), table.column("C")
    for tk in np.unique(t)[1:]:
        at = t == tk
        assert C[at][p_r[at] > 0].max() > C[at][p_r[at] == 0][0]


def test_optimize_consistent_with_esd():
    esd = run_scenario("esd", load_config("tol_p = 0.01", "fig5a"))
    p_star = esd.column("p_star")[0]
    assert 0.3 <= p_star <= 0.5
    assert esd.column("t_first_zero_at_p0")[0] > 0
    text = (f"theta = pi/20\np_grid = 0, {p_star - 0.1}, {p_star + 0.02}, {p_star + 0.2}\n"
            "t_grid = 0:30:601\n")
    table = run_scenario("optimize", load_config(text))
    assert table.columns == OPTIMIZE_COLUMNS
    p, C = table.column("p"), table.column("C_opt")
    for pk in np.unique(p):
        vanishes = C[p == pk].min() <= 1e-6
        assert vanishes == (pk < p_star)


def test_esd_without_sudden_death():
    table = run_scenario("esd", load_config("theta = pi/3\ntol_p = 0.01"))
    assert table.rows == [(math.pi / 3, 0.0, NO_ZERO)]


def test_esd_rejects_oracle(tmp_path):
    code, _ = run(tmp_path, "esd", "--engine", "oracle")
    assert code == EXIT_CONFIG


def test_compare_engine_parity_at_t0():
    table = run_scenario("compare", load_config("t_samples = 11\np = 0.3\np_r = 0.4"))
    assert table.columns == COMPARE_COLUMNS
    assert abs(table.column("delta_C")[0]) <= 1e-12
    assert table.column("coherence_residual").max() < 1e-6


def test_determinism(tmp_path, monkeypatch):
    cfg = "p_grid = 0:0.9:4\np_r = optimal\nt_grid = 0:30:7\n"
    monkeypatch.setenv("BANDGAP_TRAP_THREADS", "1")
    first = run(tmp_path, "sweep", config=cfg)
    monkeypatch.setenv("BANDGAP_TRAP_THREADS", "4")
    second = run(tmp_path, "sweep", config=cfg)
    assert first[0] == second[0] == EXIT_OK
    assert first[1] == second[1]


def test_plotdata_output(tmp_path):
    code, data = run(tmp_path, "simulate", "--format", "plotdata", config="t_samples = 3")
    assert code == EXIT_OK
    lines = data.decode().splitlines()
    assert lines[0].startswith("# omega_t re_c1")
    assert len(lines) == 4 and len(lines[1].split()) == len(SIMULATE_COLUMNS)


def test_stdout_output(capsys):
    assert main(["simulate", "--preset", "default", "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("omega_t,re_c1")


def test_exit_config_error(tmp_path, capsys):
    code, data = run(tmp_path, "simulate", config="theta = pi/4\np = 1.5\n")
    assert code == EXIT_CONFIG and data is None
    err = capsys.readouterr().err
    assert "line 2" in err and "p" in err and "[0, 1]" in err


def test_exit_unknown_preset(tmp_path):
    assert run(tmp_path, "simulate", "--preset", "fig9")[0] == EXIT_CONFIG


def test_exit_numeric_failure(tmp_path, capsys):
    # p = p_r = 1 on the reversal branch annihilates the state
    code, _ = run(tmp_path, "simulate", config="p = 1\np_r = 1\nt_samples = 2\n")
    assert code == EXIT_NUMERIC
    assert "theta=" in capsys.readouterr().err


def test_exit_io_errors(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == EXIT_IO
    assert main(["simulate", "--out", str(tmp_path / "no" / "dir.csv")]) == EXIT_IO


def test_bad_command():
    with pytest.raises(SystemExit):
        main(["plot"])
