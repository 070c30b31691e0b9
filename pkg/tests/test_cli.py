"""Config parsing, CSV round trips, chart emission, CLI subcommands."""

import math
import re

import pytest

from netcournot.charts import render_charts
from netcournot.cli import main
from netcournot.config import RunConfig, parse_config, parse_config_file
from netcournot.csvio import SWEEP_COLUMNS, read_sweep_csv, write_sweep_csv
from netcournot.exceptions import ParseError, ValidationError
from netcournot.model import RDMode
from netcournot.sweep import SweepRow, sweep_b


def test_defaults_reproduce_baseline_parameterisation():
    config = parse_config()
    assert config.a == 1.0
    assert config.c1 == config.c2 == 0.7
    assert config.phi == config.theta == 2.5
    assert config.m_values == (0.05, 0.25)
    params = config.params(b=0.1, m=0.25)
    assert params.phi1 == params.theta2 == 2.5
    assert params.b1 == params.b2 == 0.1


def test_b_grid_arithmetic():
    config = parse_config(flags={"b_step": 0.25, "b_max": 0.5})
    assert config.b_grid() == [0.0, 0.25, 0.5]
    fine = parse_config(flags={"b_max": 0.03, "b_step": 0.01})
    assert fine.b_grid() == [0.0, 0.01, 0.02, 0.03]


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        """
        # sweep setup
        mode = product
        m_values = 0.05, 0.25
        b_step = 0.1   # coarse
        emit_plots = true
        seed = 7
        """
    )
    values = parse_config_file(cfg)
    assert values["mode"] is RDMode.PRODUCT_ONLY
    assert values["m_values"] == (0.05, 0.25)
    assert values["b_step"] == 0.1
    assert values["emit_plots"] is True
    assert values["seed"] == 7


def test_flags_override_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("b_step = 0.1\nseed = 7\n")
    config = parse_config(file=cfg, flags={"b_step": 0.05})
    assert config.b_step == 0.05
    assert config.seed == 7


def test_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("b_stepp = 0.1\n")
    with pytest.raises(ParseError, match="b_stepp"):
        parse_config_file(cfg)
    with pytest.raises(ParseError):
        parse_config(flags={"nope": 1.0})


def test_malformed_line_reports_location(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mode process\n")
    with pytest.raises(ParseError, match="line 1"):
        parse_config_file(cfg)


def test_out_of_range_values_rejected():
    with pytest.raises(ValidationError):
        parse_config(flags={"m_values": (1.5,)})
    with pytest.raises(ValidationError):
        parse_config(flags={"b_max": 1.2})
    with pytest.raises(ValidationError):
        parse_config(flags={"c1": 1.0})
    with pytest.raises(ValidationError):
        RunConfig(b_step=-0.01)


def test_cli_stage2_runs(capsys):
    code = main(["stage2", "--mode", "process", "--b", "0.2", "--point-m", "0.05"])
    out = capsys.readouterr().out
    assert code == 0
    assert "quantities" in out
    assert "interior" in out


def test_cli_nash_prints_closed_form_subsidy(capsys):
    code = main(["nash", "--mode", "process", "--b", "0", "--point-m", "0"])
    out = capsys.readouterr().out
    assert code == 0
    match = re.search(r"s2=([0-9.]+)", out)
    assert match is not None
    assert abs(float(match.group(1)) - 1.0 / 3.0) < 1e-6


def test_cli_nash_solver_failure_exit_code(capsys):
    code = main(["nash", "--mode", "process", "--b", "0", "--point-m", "0.05", "--phi", "0.4"])
    assert code == 1
    assert "solver failure" in capsys.readouterr().err


def test_cli_validation_exit_code(capsys):
    code = main(["sweep", "--m", "1.5"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_cli_sweep_writes_csv_and_charts(tmp_path, capsys):
    argv = [
        "sweep", "--mode", "process", "--m", "0.05",
        "--b-max", "0.1", "--b-step", "0.05",
        "--out-dir", str(tmp_path), "--plots",
    ]
    assert main(argv) == 0
    csv_path = tmp_path / "sweep_process.csv"
    assert csv_path.exists()
    rows = read_sweep_csv(csv_path)
    assert len(rows) == 3
    assert all(r.feasible for r in rows)
    for name in ("welfare_differences_process.svg", "policy_instruments_process.svg"):
        chart = tmp_path / name
        assert chart.exists() and chart.stat().st_size > 0

    before = csv_path.read_bytes()
    assert main(argv) == 0
    assert csv_path.read_bytes() == before  # byte-identical rerun


def test_cli_out_dir_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("NETCOURNOT_OUT_DIR", str(tmp_path / "envdir"))
    argv = ["sweep", "--mode", "process", "--m", "0.05", "--b-max", "0.0", "--b-step", "0.01"]
    assert main(argv) == 0
    assert (tmp_path / "envdir" / "sweep_process.csv").exists()


def test_cli_check_passes(capsys):
    code = main(["check", "--samples", "4", "--seed", "42"])
    out = capsys.readouterr().out
    assert code == 0
    assert "all checks passed" in out
    assert "FAIL" not in out


def test_cli_check_deterministic(capsys):
    main(["check", "--samples", "4", "--seed", "11"])
    first = capsys.readouterr().out
    main(["check", "--samples", "4", "--seed", "11"])
    second = capsys.readouterr().out
    assert first == second


def test_csv_round_trip_bitwise(tmp_path):
    rows = sweep_b(parse_config().params(), [0.0, 0.05], [0.05], RDMode.PROCESS_ONLY)
    path = write_sweep_csv(rows, tmp_path / "out.csv")
    with open(path) as handle:
        assert handle.readline().strip() == ",".join(SWEEP_COLUMNS)
    back = read_sweep_csv(path)
    assert back == rows


def test_csv_round_trip_nan_cells(tmp_path):
    nan = float("nan")
    row = SweepRow(
        b=0.5, m=0.25, mode="process", t_star=nan, s1_star=nan, s2_star=nan,
        sigma1_star=nan, sigma2_star=nan, q1=nan, q2=nan, W1_nash=nan, W2_nash=nan,
        W1_lf=0.0281, W2_lf=0.0632, dW1=nan, dW2=nan, dW=nan, feasible=False,
        binding_constraint="positive_quantities",
    )
    path = write_sweep_csv([row], tmp_path / "nan.csv")
    back = read_sweep_csv(path)[0]
    assert math.isnan(back.t_star)
    assert back.W1_lf == row.W1_lf
    assert back.binding_constraint == "positive_quantities"
    assert not back.feasible


def test_render_charts_placeholder_on_empty_feasible_set(tmp_path):
    nan = float("nan")
    rows = [
        SweepRow(
            b=0.1, m=0.05, mode="product", t_star=nan, s1_star=nan, s2_star=nan,
            sigma1_star=nan, sigma2_star=nan, q1=nan, q2=nan, W1_nash=nan, W2_nash=nan,
            W1_lf=0.0, W2_lf=0.0, dW1=nan, dW2=nan, dW=nan, feasible=False,
            binding_constraint="delta",
        )
    ]
    with pytest.warns(UserWarning, match="placeholder"):
        paths = render_charts(rows, tmp_path)
    assert len(paths) == 2
    for path in paths:
        assert path.exists() and path.stat().st_size > 0
