"""
tests/test_report.py

Purpose
-------
Text summaries and the SVG plot of a sweep.
"""

import warnings

import numpy as np
import pandas as pd
import pytest

from sumbound_core.bounds import report_for_values
from sumbound_core.config import build_config
from sumbound_core.errors import EmptyInputError, InvalidInputError
from sumbound_core.experiments import COLUMNS, rows_to_frame, run_sweep
from sumbound_core.precision import SINGLE
from sumbound_core.report import format_report, plain_language_summary, plot_sweep, plot_sweep_svg, sweep_summary


@pytest.fixture(scope="module")
def sweep_df():
    return rows_to_frame(run_sweep(build_config("single", "normal", 100, 500, 100)))


def test_format_report_lists_every_quantity():
    rep = report_for_values(np.array([1.0, 1.0, 0.1], dtype=np.float32), SINGLE, failure_prob=0.01)
    text = format_report(rep, rounded=1)
    for label in ("n", "precision", "true relative error", "deterministic", "azuma", "martingale", "flags"):
        assert label in text
    assert "1 input value(s) rounded" in text
    assert "absolute" not in text


def test_zero_sum_report_says_absolute():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = report_for_values(np.array([1.0, -1.0], dtype=np.float32), SINGLE)
    assert "true absolute error" in format_report(rep)
    assert "absolute" in plain_language_summary(rep)


def test_plain_language_summary_mentions_gaps():
    rng = np.random.default_rng(0)
    rep = report_for_values(rng.standard_normal(1000).astype(np.float32), SINGLE)
    text = plain_language_summary(rep)
    assert text.startswith("Summing 1,000 values")
    assert "orders of magnitude above" in text


def test_sweep_summary(sweep_df):
    text = sweep_summary(sweep_df)
    assert "5 point(s) from n = 100 to n = 500" in text
    assert "The martingale bound held at 5 of 5 point(s)." in text
    assert sweep_summary(pd.DataFrame(columns=list(COLUMNS))) == "No sweep points were computed."


def test_plot_sweep_has_four_log_series(sweep_df):
    fig = plot_sweep(sweep_df)
    ax = fig.axes[0]
    assert ax.get_xscale() == "log" and ax.get_yscale() == "log"
    assert len(ax.get_lines()) == 4
    assert "single" in ax.get_title()


def test_plot_sweep_rejects_bad_tables():
    with pytest.raises(EmptyInputError):
        plot_sweep(pd.DataFrame(columns=list(COLUMNS)))
    with pytest.raises(InvalidInputError):
        plot_sweep(pd.DataFrame({"x": [1.0]}))


def test_svg_output_is_deterministic(sweep_df, tmp_path):
    a = plot_sweep_svg(sweep_df, tmp_path / "a.svg", title="same")
    b = plot_sweep_svg(sweep_df, tmp_path / "sub" / "b.svg", title="same")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text(encoding="utf-8").lstrip().startswith("<?xml")
