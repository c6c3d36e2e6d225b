"""
tests/test_cli.py

Purpose
-------
Drive every command through click's CliRunner and check output and exit
codes (0 ok, 1 usage, 2 input, 3 validation).
"""

import math
from pathlib import Path

from click.testing import CliRunner

from cli import main
from sumbound_core.io import read_sweep_csv
from sumbound_core.report import LABEL_WIDTH


def _run(*args):
    return CliRunner().invoke(main, list(args))


def _line(label: str, value: str) -> str:
    return f"{label:<{LABEL_WIDTH}}{value}"


def _vector(tmp_path: Path, text: str) -> str:
    p = tmp_path / "x.txt"
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_version():
    res = _run("--version")
    assert res.exit_code == 0
    assert "sumbound" in res.output


def test_analyze_two_ones(tmp_path):
    """u = 2**-24 and ln(2/delta) = 1: det = u, azuma = martingale = u*sqrt(2)."""
    res = _run("analyze", _vector(tmp_path, "1\n1\n"), "--delta", repr(2 / math.e))
    assert res.exit_code == 0, res.output
    assert _line("deterministic", "5.960464e-08") in res.output
    assert _line("azuma", "8.429370e-08") in res.output
    assert _line("martingale", "8.429370e-08") in res.output
    assert _line("true relative error", "0.000000e+00") in res.output


def test_analyze_single_value_has_zero_bounds(tmp_path):
    res = _run("analyze", _vector(tmp_path, "3.5\n"), "--precision", "half")
    assert res.exit_code == 0, res.output
    assert _line("deterministic", "0.000000e+00") in res.output
    assert _line("martingale", "0.000000e+00") in res.output


def test_analyze_zero_sum_warns(tmp_path):
    res = _run("analyze", _vector(tmp_path, "1\n-1\n"))
    assert res.exit_code == 0, res.output
    assert "Exact sum is 0" in res.output
    assert "true absolute error" in res.output


def test_analyze_reports_rounded_inputs(tmp_path):
    res = _run("analyze", _vector(tmp_path, "0.1\n0.2\n"), "--out", str(tmp_path / "one.csv"))
    assert res.exit_code == 0, res.output
    assert "2 input value(s) rounded" in res.output
    df = read_sweep_csv(tmp_path / "one.csv")
    assert len(df) == 1 and df["n"].iloc[0] == 2


def test_analyze_input_errors(tmp_path):
    assert _run("analyze", str(tmp_path / "missing.txt")).exit_code == 2
    assert _run("analyze", _vector(tmp_path, "")).exit_code == 2
    assert _run("analyze", _vector(tmp_path, "70000\n"), "--precision", "half").exit_code == 2


def test_usage_errors(tmp_path):
    assert _run("analyze", _vector(tmp_path, "1\n"), "--delta", "0").exit_code == 1
    assert _run("analyze", _vector(tmp_path, "1\n"), "--precision", "quad").exit_code == 1
    assert _run("sweep", "--n", "1:2").exit_code == 1
    assert _run("sweep", "--n", "300:100:100").exit_code == 1
    assert _run("sweep", "--preset", "half-normal", "--n", "100").exit_code == 1
    assert _run("nope").exit_code == 1


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "s.csv"
    res = _run("sweep", "--precision", "half", "--dist", "uniform", "--n", "100:300:100",
               "--trials", "2", "--out", str(out), "--no-timings")
    assert res.exit_code == 0, res.output
    assert "wrote 6 row(s)" in res.output
    df = read_sweep_csv(out)
    assert df["n"].tolist() == [100, 100, 200, 200, 300, 300]
    assert (df["time_c_path_ns"] == 0).all()

    again = tmp_path / "t.csv"
    _run("sweep", "--precision", "half", "--dist", "uniform", "--n", "100:300:100",
         "--trials", "2", "--out", str(again), "--no-timings")
    assert out.read_bytes() == again.read_bytes()


def test_validate_small_run():
    res = _run("validate", "--exhaustive-n", "2", "--traces", "2", "--vectors", "2",
               "--envelope-traces", "2", "--no-grids")
    assert res.exit_code == 0, res.output
    assert "[  ok] exhaustive-half" in res.output
    assert "check(s) passed" in res.output


def test_failure_rate_small_run():
    res = _run("failure-rate", "--n", "50", "--trials", "5", "--delta", "0.5", "--bound", "martingale")
    assert res.exit_code == 0, res.output
    assert res.output.startswith("martingale: ")
    assert "/5 violation(s)" in res.output


def test_plot(tmp_path):
    csv = tmp_path / "s.csv"
    _run("sweep", "--n", "100:200:100", "--out", str(csv))
    res = _run("plot", str(csv))
    assert res.exit_code == 0, res.output
    assert csv.with_suffix(".svg").exists()

    assert _run("plot", str(csv), "--precision", "half").exit_code == 2


def test_plot_empty_table(tmp_path):
    csv = tmp_path / "empty.csv"
    header = "# sumbound 1.0.0\nn,trial,precision,distribution,delta,seed,det_variant,true_rel_err,det_bound," \
             "azuma_bound,martingale_bound,z_n,sum_abs_x,time_c_path_ns,time_m_path_ns,flags\n"
    csv.write_text(header, encoding="utf-8")
    assert _run("plot", str(csv)).exit_code == 2
    assert _run("plot", str(tmp_path / "missing.csv")).exit_code == 2


def test_analyze_rejects_nan_lines(tmp_path):
    res = _run("analyze", _vector(tmp_path, "1.0\nnan\n2.0\nNA\n"))
    assert res.exit_code == 2
    assert "Not a finite number" in res.output


def test_sweep_defaults_to_outputs_folder(tmp_path):
    folder = tmp_path / "runs"
    res = _run("sweep", "--precision", "half", "--n", "100", "--outputs-folder", str(folder))
    assert res.exit_code == 0, res.output
    assert (folder / "half_normal.csv").is_file()
    assert len(read_sweep_csv(folder / "half_normal.csv")) == 1
