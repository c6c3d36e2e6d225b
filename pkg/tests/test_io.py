"""
tests/test_io.py

Purpose
-------
Vector-file ingestion and the sweep CSV format.
"""

import math
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest

from sumbound_core.config import build_config
from sumbound_core.errors import EmptyInputError, FormatOverflowError, InvalidInputError
from sumbound_core.experiments import COLUMNS, rows_to_frame, run_point, run_sweep
from sumbound_core.io import csv_header_comment, read_sweep_csv, read_sweep_rows, read_vector_file, write_sweep_csv
from sumbound_core.precision import HALF, SINGLE
from sumbound_core.version import __version__


def _write(tmp_path: Path, text: str, name: str = "x.txt") -> Path:
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# ------------------------
# Vector files
# ------------------------
def test_read_vector_file_with_comments(tmp_path):
    p = _write(tmp_path, "# my data\n1\n\n0.5   # half\n-2.25\n")
    vf = read_vector_file(p, SINGLE)
    assert vf.n == 3
    assert vf.values.dtype == SINGLE.dtype
    assert vf.values.tolist() == [1.0, 0.5, -2.25]
    assert vf.rounded == 0


def test_read_vector_file_counts_rounded_values(tmp_path):
    p = _write(tmp_path, "0.1\n0.25\n0.3\n")
    with pytest.warns(UserWarning, match="2 of 3"):
        vf = read_vector_file(p, HALF)
    assert vf.rounded == 2
    assert Fraction(float(vf.values[0])) != Fraction(1, 10)


def test_read_vector_file_errors(tmp_path):
    with pytest.raises(EmptyInputError):
        read_vector_file(_write(tmp_path, ""), SINGLE)
    with pytest.raises(InvalidInputError):
        read_vector_file(_write(tmp_path, "1\nabc\n", "bad.txt"), SINGLE)
    with pytest.raises(InvalidInputError):
        read_vector_file(_write(tmp_path, "1\ninf\n", "inf.txt"), SINGLE)
    with pytest.raises(InvalidInputError):
        read_vector_file(tmp_path / "missing.txt", SINGLE)
    with pytest.raises(FormatOverflowError) as info:
        read_vector_file(_write(tmp_path, "1\n2\n70000\n", "big.txt"), HALF)
    assert info.value.step == 3


@pytest.mark.parametrize("token", ["nan", "NaN", "NA", "N/A", "null", "-inf"])
def test_read_vector_file_rejects_missing_value_markers(tmp_path, token):
    """Markers pandas would treat as missing must not be dropped silently."""
    p = _write(tmp_path, f"1.0\n{token}\n2.0\n")
    with pytest.raises(InvalidInputError):
        read_vector_file(p, SINGLE)


def test_read_vector_file_skips_whitespace_only_lines(tmp_path):
    vf = read_vector_file(_write(tmp_path, "1\n   \n2\n"), SINGLE)
    assert vf.values.tolist() == [1.0, 2.0]


# ------------------------
# Sweep CSV
# ------------------------
def _rows():
    return run_sweep(build_config("half", "uniform", 100, 300, 100, trials_per_point=2))


def test_sweep_csv_layout(tmp_path):
    out = write_sweep_csv(_rows(), tmp_path / "nested" / "sweep.csv")
    lines = out.read_text(encoding="utf-8").split("\n")
    assert lines[0] == csv_header_comment() == f"# sumbound {__version__}"
    assert lines[1] == ",".join(COLUMNS)
    assert len([ln for ln in lines[2:] if ln]) == 6


def test_sweep_csv_round_trip_is_exact(tmp_path):
    rows = _rows()
    out = write_sweep_csv(rows, tmp_path / "sweep.csv")
    back = read_sweep_rows(out)
    assert back == rows
    df = read_sweep_csv(out)
    assert df["det_bound"].tolist() == [r.det_bound for r in rows]


def test_sweep_csv_from_frame(tmp_path):
    rows = _rows()
    out = write_sweep_csv(rows_to_frame(rows), tmp_path / "frame.csv")
    assert read_sweep_rows(out) == rows


def test_no_timings_reruns_are_byte_identical(tmp_path):
    a = write_sweep_csv(_rows(), tmp_path / "a.csv", timings=False)
    b = write_sweep_csv(_rows(), tmp_path / "b.csv", timings=False)
    assert a.read_bytes() == b.read_bytes()
    df = read_sweep_csv(a)
    assert (df["time_c_path_ns"] == 0).all() and (df["time_m_path_ns"] == 0).all()


def test_flags_and_nan_survive(tmp_path):
    row = run_point(build_config("single", "normal", 100, 100, 100), 100)
    flagged = replace(row, flags=("zero_sum", "subnormal"), azuma_bound=math.nan)
    back = read_sweep_rows(write_sweep_csv([flagged], tmp_path / "f.csv"))[0]
    assert back.flags == ("zero_sum", "subnormal")
    assert math.isnan(back.azuma_bound)
    assert back.det_bound == row.det_bound


def test_read_sweep_csv_errors(tmp_path):
    with pytest.raises(InvalidInputError):
        read_sweep_csv(_write(tmp_path, "", "empty.csv"))
    with pytest.raises(InvalidInputError):
        read_sweep_csv(_write(tmp_path, "n,trial\n1,0\n", "short.csv"))
    with pytest.raises(InvalidInputError):
        read_sweep_csv(tmp_path / "missing.csv")
    good = write_sweep_csv(_rows()[:1], tmp_path / "good.csv").read_text(encoding="utf-8")
    lines = good.split("\n")
    lines[2] = "abc" + lines[2][lines[2].index(","):]
    with pytest.raises(InvalidInputError):
        read_sweep_csv(_write(tmp_path, "\n".join(lines), "bad.csv"))
