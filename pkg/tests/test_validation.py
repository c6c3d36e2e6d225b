"""
tests/test_validation.py

Purpose
-------
The exact checks behind ``sumbound validate``, on small inputs, and one
small end-to-end run of the suite. Full-size runs are marked ``slow``.
"""

from fractions import Fraction

import numpy as np
import pytest

from sumbound_core.bounds import accumulate
from sumbound_core.precision import HALF, SINGLE
from sumbound_core.trace import run_summation
from sumbound_core.validation import (
    ValidationReport,
    check_domination,
    check_envelopes,
    check_recurrence,
    exact_c_sum,
    run_validation,
)


def test_exact_c_sum_matches_exact_accumulators():
    rng = np.random.default_rng(2)
    a = np.abs(rng.standard_normal(500).astype(np.float32)).astype(np.float64)
    u = SINGLE.unit_roundoff
    assert exact_c_sum(a, u) == accumulate(a, u, exact=True).c_sum
    assert exact_c_sum(a[:1], u) == 0
    assert exact_c_sum(np.array([0.0, 0.0, 1.0]), u) == u


def test_exact_c_sum_small_example():
    """[1, 1, 1]: c_2 = 2u, c_3 = 3u."""
    u = Fraction(1, 2 ** 24)
    assert exact_c_sum(np.array([1.0, 1.0, 1.0]), u) == 5 * u


def test_check_domination_on_random_traces():
    rng = np.random.default_rng(6)
    for _ in range(20):
        x = rng.random(300).astype(np.float16)
        assert check_domination(run_summation(x, HALF))
    streamed = run_summation(x, HALF, n_trace_max=0)
    assert check_domination(streamed, exact_c_sum(np.abs(x.astype(np.float64)), HALF.unit_roundoff))


def test_check_domination_detects_a_too_small_sum():
    t = run_summation(np.array([1.0, 2.0 ** -24], dtype=np.float32))
    assert t.error != 0
    assert not check_domination(t, Fraction(0))


def test_check_envelopes_and_recurrence():
    rng = np.random.default_rng(10)
    x = rng.standard_normal(40).astype(np.float16)
    assert check_envelopes(run_summation(x, HALF)) == 0
    values = [float(v) for v in rng.standard_normal(60).astype(np.float32)]
    assert check_recurrence(values, SINGLE.unit_roundoff) == 0
    assert check_recurrence(values, SINGLE.unit_roundoff, k_max=10) == 0


def test_report_bookkeeping():
    rep = ValidationReport()
    rep.add("a", True, "fine")
    rep.add("b", True, "seen", kind="observation")
    assert rep.passed and len(rep.checks) == 1 and len(rep.observations) == 1
    rep.add("c", False, "broken")
    assert not rep.passed
    assert [r.name for r in rep.failures] == ["c"]


def test_small_suite_passes():
    rep = run_validation(
        exhaustive_n=3, traces=3, vectors=3, envelope_traces=3, grids=(), domination_lengths=(10, 100),
    )
    names = [r.name for r in rep.checks]
    assert names == [
        "exhaustive-half", "exhaustive-single", "recurrence", "envelopes",
        "error-identity", "domination-half", "domination-single",
    ]
    assert rep.passed, [r.detail for r in rep.failures]


def test_suite_sections_can_be_skipped():
    rep = run_validation(exhaustive_n=0, traces=0, vectors=0, envelope_traces=0, grids=())
    assert rep.results == []
    assert rep.passed


@pytest.mark.slow
def test_default_suite_passes():
    rep = run_validation()
    assert rep.passed, [r.detail for r in rep.failures]
    assert rep.observations
