"""
tests/test_trace.py

Purpose
-------
Check sequential summation traces: partial sums, realized rounding errors
delta_k and the error decomposition.

What we check
-------------
- Worked examples (one element, exact powers of two, the 1 + 2**-24 tie).
- |delta_k| <= u at every non-subnormal step of random traces.
- Streaming (chunked numpy) and retained (step-by-step) paths agree.
- The m-terms telescope exactly; the first-order residual is tiny.
- Errors: empty input, overflow with step, non-retained traces.
"""

from fractions import Fraction

import numpy as np
import pytest

from sumbound_core.errors import (
    EmptyInputError,
    FormatOverflowError,
    InvalidInputError,
    TraceNotRetainedError,
)
from sumbound_core.oracle import exact_sum
from sumbound_core.precision import HALF, SINGLE, TargetValue, round_rational
from sumbound_core.trace import SequentialSummer, decompose_error, extract_deltas, run_summation


def test_single_element_trace():
    t = run_summation([TargetValue(1.0, SINGLE)])
    assert t.z_hat == (1.0,)
    assert t.delta == ()
    assert t.error == 0
    assert t.relative_error == 0


def test_powers_of_two_in_half_are_exact():
    """Partial sums 2**k - 1 (k <= 11) fit in 11 bits, so every delta_k is 0."""
    x = [TargetValue(2.0 ** i, HALF) for i in range(11)]
    t = run_summation(x)
    assert t.z_hat_n == 2047.0
    assert all(d == 0 for d in t.delta)
    assert len(t.delta) == 10


def test_tie_after_one_in_single():
    """
    1 + 2**-24 is the midpoint of 1 and 1 + 2**-23; ties-to-even gives 1,
    so delta_2 = 1 / (1 + 2**-24) - 1 = -2**-24 / (1 + 2**-24).
    """
    t = run_summation(np.array([1.0, 2.0 ** -24], dtype=np.float32))
    u = Fraction(1, 2 ** 24)
    assert extract_deltas(t) == (-u / (1 + u),)
    assert t.delta == extract_deltas(t)
    assert t.z_hat_n == 1.0
    assert t.z_exact_n == 1 + u


def test_exact_sum_of_two_ones():
    t = run_summation([1.0, 1.0], SINGLE)
    assert extract_deltas(t) == (Fraction(0),)


def test_decimal_inputs_in_single():
    """x = [0.1, 0.2, 0.3] rounded into single: |delta| <= u and z_3 is exact."""
    x = [TargetValue.from_real(s, SINGLE) for s in ("0.1", "0.2", "0.3")]
    t = run_summation(x)
    assert t.z_exact_n == sum(round_rational(s, SINGLE) for s in ("0.1", "0.2", "0.3"))
    assert all(abs(d) <= SINGLE.unit_roundoff for d in t.delta)
    assert t.z_hat_n == float(np.float32(np.float32(x[0].value) + np.float32(x[1].value)) + np.float32(x[2].value))


@pytest.mark.parametrize("fmt", [HALF, SINGLE])
def test_random_traces_obey_standard_model(fmt):
    rng = np.random.default_rng(11)
    for trial in range(20):
        x = rng.standard_normal(200).astype(fmt.dtype)
        t = run_summation(x)
        for i, d in enumerate(t.delta):
            if i + 2 not in t.subnormal_steps:
                assert abs(d) <= fmt.unit_roundoff
        assert t.z_exact_n == exact_sum(x)


@pytest.mark.parametrize("fmt", [HALF, SINGLE])
def test_streaming_matches_retained(fmt):
    rng = np.random.default_rng(3)
    x = rng.random(5000).astype(fmt.dtype)
    full = run_summation(x, n_trace_max=10_000)
    streamed = run_summation(x, n_trace_max=100, chunk_size=333)
    assert full.retained and not streamed.retained
    assert streamed.z_hat_n == full.z_hat_n
    assert streamed.z_exact_n == full.z_exact_n
    assert streamed.abs_sum == full.abs_sum
    with pytest.raises(TraceNotRetainedError):
        extract_deltas(streamed)


def test_sequential_summer_matches_python_loop():
    """Chunked np.add.accumulate rounds after every element, like a plain loop."""
    rng = np.random.default_rng(9)
    x = rng.standard_normal(1000).astype(np.float16)
    s = SequentialSummer(HALF)
    for start in range(0, x.size, 77):
        s.feed(x[start:start + 77])
    loop = np.float16(0)
    for v in x:
        loop = np.float16(loop + v)
    assert float(s.z_hat) == float(loop)
    assert s.k == 1000


def test_decompose_error_identity_and_residual():
    rng = np.random.default_rng(21)
    u = SINGLE.unit_roundoff
    for _ in range(50):
        x = rng.standard_normal(100).astype(np.float32)
        t = run_summation(x)
        dec = decompose_error(t)
        assert dec.identity_holds
        assert dec.m_total == t.error
        n = t.n
        assert abs(dec.residual) <= n * n * u * u * t.abs_sum


def test_decompose_error_all_exact():
    t = run_summation([1.0, 2.0, 4.0], SINGLE)
    dec = decompose_error(t)
    assert all(term == 0 for term in dec.m_terms + dec.z_terms)
    assert dec.residual == 0


def test_subnormal_steps_are_flagged():
    """Two half subnormals: their sum 2 * 2**-24 stays subnormal."""
    tiny = float(HALF.smallest_subnormal)
    with pytest.warns(UserWarning):
        t = run_summation([tiny, tiny], HALF)
    assert t.subnormal_steps == frozenset({1, 2})


def test_errors():
    with pytest.raises(EmptyInputError):
        run_summation([], SINGLE)
    with pytest.raises(FormatOverflowError) as info:
        run_summation([60000.0, 60000.0, 1.0], HALF)
    assert info.value.step == 2
    with pytest.raises(FormatOverflowError) as info:
        run_summation(np.array([60000.0, 1.0, 60000.0], dtype=np.float16), n_trace_max=1)
    assert info.value.step == 3
    with pytest.raises(InvalidInputError):
        run_summation([0.1], SINGLE)
    with pytest.raises(InvalidInputError):
        run_summation([TargetValue(1.0, HALF), TargetValue(1.0, SINGLE)])
