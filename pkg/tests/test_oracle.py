"""
tests/test_oracle.py

Purpose
-------
The oracle is the yardstick for everything else, so it gets checked
against hand arithmetic and against a second, independent implementation.

What we check
-------------
- exact_sum on tiny dyadic inputs and against Neumaier / 256-bit sums.
- Closed forms of m_k and of the |z_hat_k| envelope on worked examples.
- exhaustive_delta_check finds no violations on small value sets.
"""

from fractions import Fraction

import numpy as np
import pytest

from sumbound_core.errors import EmptyInputError, OracleIndexError
from sumbound_core.oracle import (
    ExactSumAccumulator,
    compensated_sum,
    exact_sum,
    exhaustive_delta_check,
    highprec_sum,
    m_closed_form,
    zhat_envelope,
)
from sumbound_core.precision import HALF, SINGLE, TargetValue

U = Fraction(1, 2 ** 24)


def test_exact_sum_small_inputs():
    assert exact_sum([1.0]) == 1
    assert exact_sum([0.5, 0.25, 0.25]) == 1
    assert exact_sum([TargetValue(2048.0, HALF), TargetValue(1.0, HALF)]) == 2049
    with pytest.raises(EmptyInputError):
        exact_sum([])


def test_exact_sum_array_paths_agree():
    """The vectorized half/single path equals a plain Fraction sum."""
    rng = np.random.default_rng(7)
    x = (rng.standard_normal(5000) * 1e3).astype(np.float32)
    expected = sum((Fraction(float(v)) for v in x), Fraction(0))
    assert exact_sum(x) == expected
    h = rng.standard_normal(3000).astype(np.float16)
    assert exact_sum(h) == sum((Fraction(float(v)) for v in h), Fraction(0))


def test_exact_sum_matches_independent_references():
    """10**4 random single values: exact, Neumaier and 256-bit sums agree."""
    rng = np.random.default_rng(123)
    x = rng.standard_normal(10_000).astype(np.float32)
    exact = exact_sum(x)
    assert compensated_sum(x) == float(exact)
    assert float(highprec_sum(x)) == float(exact)


def test_streaming_accumulator():
    x = np.array([1.0, -2.0, 0.5, 0.25], dtype=np.float32)
    acc = ExactSumAccumulator()
    acc.add(x[:2])
    acc.add(x[2:])
    acc.add(x[:0])
    assert acc.total == Fraction(-1, 4)
    assert acc.abs_total == Fraction(15, 4)
    assert acc.count == 4


def test_m_closed_form_examples():
    """
    k = 1: exponents collapse, m_1 = |a| + |b|.
    k = 2, x = [1, 1, 1]: m_2 = 2(1+u) + 1.
    u = 0: m_k is the plain 1-norm of x_1..x_{k+1}.
    """
    assert m_closed_form([3.0, -4.0, 5.0], 1, U) == 7
    assert m_closed_form([1.0, 1.0, 1.0], 2, U) == 2 * (1 + U) + 1
    assert m_closed_form([1.0, -2.0, 3.0, 4.0], 3, Fraction(0)) == 10
    with pytest.raises(OracleIndexError):
        m_closed_form([1.0, 1.0], 2, U)
    with pytest.raises(OracleIndexError):
        m_closed_form([1.0, 1.0], 0, U)


def test_zhat_envelope_examples():
    assert zhat_envelope([-3.0, 1.0], 1, U) == 3
    assert zhat_envelope([1.0, 1.0], 2, U) == 2 * (1 + U)
    with pytest.raises(OracleIndexError):
        zhat_envelope([1.0], 2, U)


def test_exhaustive_signed_halves():
    """
    n = 2 over {+-1, +-0.5} in half: 16 vectors, every sum exact, 4 of
    them cancel to zero.
    """
    rep = exhaustive_delta_check(2, HALF, [1, -1, 0.5, -0.5])
    assert rep.cases == 16
    assert rep.zero_sum_cases == 4
    assert rep.passed
    assert rep.max_ratio == 0


def test_exhaustive_with_rounding():
    """n = 6 over {1, 2**-11, -2**-12} in half: ties and cancellation, no violations."""
    rep = exhaustive_delta_check(6, HALF, [1, 2 ** -11, -(2 ** -12)])
    assert rep.cases == 3 ** 6
    assert rep.passed, rep.witnesses
    assert 0 < rep.max_ratio <= 1


def test_exhaustive_random_half_values():
    rng = np.random.default_rng(5)
    values = [float(v) for v in rng.standard_normal(4).astype(np.float16)]
    rep = exhaustive_delta_check(8, HALF, values)
    assert rep.cases == len(set(values)) ** 8
    assert rep.passed, rep.witnesses


def test_exhaustive_single_parallel_matches_serial():
    values = [1, "0.1", 2 ** -24, -3]
    serial = exhaustive_delta_check(4, SINGLE, values)
    parallel = exhaustive_delta_check(4, SINGLE, values, workers=2)
    assert serial.cases == parallel.cases == 4 ** 4
    assert serial.delta_checks == parallel.delta_checks
    assert serial.max_ratio == parallel.max_ratio
    assert parallel.passed


def test_exhaustive_rejects_bad_n():
    with pytest.raises(OracleIndexError):
        exhaustive_delta_check(13, HALF, [1])
