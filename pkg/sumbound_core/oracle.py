"""
sumbound_core.oracle
--------------------
Exact and brute-force reference computations.

Everything else in the package is tested against this module, so it is kept
independent: it rounds with ``precision.round_rational`` (integer arithmetic)
rather than with numpy, and never imports the trace or bounds modules.

What's here
-----------
- ``exact_sum``            sum of target-format values with zero error
- ``ExactSumAccumulator``  the same, fed chunk by chunk
- ``NeumaierSum`` / ``compensated_sum``  independent float cross-check
- ``highprec_sum``         256-bit binary floating-point reference
- ``m_closed_form``        closed form of the martingale weights m_k
- ``zhat_envelope``        a-priori bound on |z_hat_k|
- ``exhaustive_delta_check``  every vector over a small value set
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import mpmath
import numpy as np

from .errors import EmptyInputError, OracleIndexError
from .precision import FloatFormat, TargetValue, is_subnormal, round_rational, to_fraction

log = logging.getLogger(__name__)

# Exact reference scalar. Closed under + - * / and compared exactly.
ExactScalar = Fraction

# Significand bits of the numpy types we can bucket exactly.
_BUCKET_BITS = {np.dtype(np.float16): 11, np.dtype(np.float32): 24}

# Elements per bucketing pass: BUCKET_CHUNK * 2**24 stays below 2**53, so the
# float64 bucket totals are exact integers.
BUCKET_CHUNK = 1 << 20


def _as_array(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x
    vals = list(x)
    if vals and isinstance(vals[0], TargetValue):
        return np.array([v.value for v in vals], dtype=vals[0].format.dtype)
    return np.asarray([float(v) for v in vals], dtype=np.float64)


def _bucket_sum(arr: np.ndarray, bits: int) -> Fraction:
    """
    Exact sum of an array whose values have at most ``bits`` significant bits.

    Every value is split into an integer significand and a power of two.
    Significands sharing a power of two are summed with ``np.bincount``;
    the per-exponent totals are then combined with Python integers.
    """
    total = Fraction(0)
    for start in range(0, arr.size, BUCKET_CHUNK):
        part = arr[start:start + BUCKET_CHUNK].astype(np.float64)
        mant, expo = np.frexp(part)
        ints = np.ldexp(mant, bits)
        expo = expo.astype(np.int64) - bits
        base = int(expo.min())
        buckets = np.bincount(expo - base, weights=ints)
        acc = 0
        for offset in np.flatnonzero(buckets):
            acc += int(buckets[offset]) << int(offset)
        total += acc * Fraction(2) ** base
    return total


def exact_sum(x: Sequence | np.ndarray) -> Fraction:
    """
    Sum of ``x`` with zero error.

    Parameters
    ----------
    x : sequence of TargetValue / float, or numpy array
        half and single arrays take a vectorized path; anything else is
        summed as Fractions.

    Returns
    -------
    Fraction

    Raises
    ------
    EmptyInputError
        ``x`` is empty.

    Examples
    --------
    >>> exact_sum([0.5, 0.25, 0.25])
    Fraction(1, 1)
    """
    arr = _as_array(x)
    if arr.size == 0:
        raise EmptyInputError("exact_sum needs at least one value")
    bits = _BUCKET_BITS.get(arr.dtype)
    if bits is not None:
        return _bucket_sum(arr, bits)
    return sum((Fraction(float(v)) for v in arr.ravel()), Fraction(0))


class ExactSumAccumulator:
    """
    Streaming version of ``exact_sum``: call ``add(chunk)`` repeatedly.

    Keeps the running sum of the values and of their absolute values.
    """

    def __init__(self):
        self.total = Fraction(0)
        self.abs_total = Fraction(0)
        self.count = 0

    def add(self, chunk: np.ndarray) -> None:
        if chunk.size == 0:
            return
        self.total += exact_sum(chunk)
        self.abs_total += exact_sum(np.abs(chunk))
        self.count += int(chunk.size)


class NeumaierSum:
    """
    Incremental Neumaier (improved Kahan) summation in binary64.

    Used only as an independently coded cross-check of ``exact_sum``.
    """

    def __init__(self):
        self.sum = 0.0
        self.carry = 0.0

    def add(self, value: float) -> None:
        value = float(value)
        t = self.sum + value
        if abs(self.sum) >= abs(value):
            self.carry += (self.sum - t) + value
        else:
            self.carry += (value - t) + self.sum
        self.sum = t

    def get(self) -> float:
        return self.sum + self.carry


def compensated_sum(values: Iterable[float]) -> float:
    """Neumaier-compensated binary64 sum of ``values``."""
    acc = NeumaierSum()
    for v in values:
        acc.add(float(v))
    return acc.get()


def highprec_sum(values: Iterable[float], bits: int = 256) -> mpmath.mpf:
    """Sum in ``bits``-bit binary floating point (the 256-bit reference mode)."""
    with mpmath.workprec(bits):
        return mpmath.fsum(mpmath.mpf(float(v)) for v in values)


# ------------------------
# Closed forms
# ------------------------
def _abs_fractions(x: Sequence) -> List[Fraction]:
    return [abs(to_fraction(float(v) if isinstance(v, TargetValue) else v)) for v in x]


def m_closed_form(x: Sequence, k: int, u: Fraction) -> Fraction:
    """
    Closed form of the martingale weight m_k (1-based k):

        m_k = |x_1|(1+u)^(k-1) + sum_{j=2..k+1} |x_j|(1+u)^(k-j+1)

    Valid for 1 <= k <= n-1.

    Raises
    ------
    OracleIndexError
        ``k`` outside 1..n-1.
    """
    a = _abs_fractions(x)
    n = len(a)
    if not 1 <= k <= n - 1:
        raise OracleIndexError(f"m_k needs 1 <= k <= n-1 = {n - 1}, got k = {k}")
    u = Fraction(u)
    growth = 1 + u
    total = Fraction(0)
    power = Fraction(1)
    # j = k+1 down to 2 carries exponents 0, 1, ..., k-1.
    for j in range(k + 1, 1, -1):
        total += a[j - 1] * power
        power *= growth
    return total + a[0] * growth ** (k - 1)


def zhat_envelope(x: Sequence, k: int, u: Fraction) -> Fraction:
    """
    Upper bound on the computed partial sum |z_hat_k| (1-based k):

        |x_1|(1+u)^(k-1) + sum_{j=2..k} |x_j|(1+u)^(k-j+1)

    Raises
    ------
    OracleIndexError
        ``k`` outside 1..n.
    """
    a = _abs_fractions(x)
    n = len(a)
    if not 1 <= k <= n:
        raise OracleIndexError(f"envelope needs 1 <= k <= n = {n}, got k = {k}")
    u = Fraction(u)
    growth = 1 + u
    total = Fraction(0)
    power = growth
    # j = k down to 2 carries exponents 1, 2, ..., k-1.
    for j in range(k, 1, -1):
        total += a[j - 1] * power
        power *= growth
    return total + a[0] * growth ** (k - 1)


# ------------------------
# Exhaustive small-n check
# ------------------------
_MAX_WITNESSES = 10


@dataclass
class ExhaustiveReport:
    """
    Outcome of ``exhaustive_delta_check``.

    ``max_ratio`` is the largest |z_hat_n - z_n| / sum(c_k) seen over vectors
    with a nonzero deterministic bound; the deterministic bound says it
    never exceeds 1.
    """

    n: int
    format: str
    value_set: Tuple[float, ...]
    cases: int = 0
    zero_sum_cases: int = 0
    delta_checks: int = 0
    delta_violations: int = 0
    domination_violations: int = 0
    subnormal_steps: int = 0
    max_ratio: Fraction = Fraction(0)
    witnesses: List[Tuple[float, ...]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return self.delta_violations + self.domination_violations

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def merge(self, other: "ExhaustiveReport") -> None:
        self.cases += other.cases
        self.zero_sum_cases += other.zero_sum_cases
        self.delta_checks += other.delta_checks
        self.delta_violations += other.delta_violations
        self.domination_violations += other.domination_violations
        self.subnormal_steps += other.subnormal_steps
        self.max_ratio = max(self.max_ratio, other.max_ratio)
        self.witnesses.extend(other.witnesses[: max(0, _MAX_WITNESSES - len(self.witnesses))])


def _walk(report, fmt, u, values, n, prefix, z_hat, z, abs_sum, c_sum, step_violation, subnormal):
    """Depth-first enumeration that shares work between common prefixes."""
    k = len(prefix)
    if k == n:
        report.cases += 1
        if z == 0:
            report.zero_sum_cases += 1
        err = abs(z_hat - z)
        if c_sum > 0:
            report.max_ratio = max(report.max_ratio, err / c_sum)
        bad = err > c_sum and not subnormal
        if bad:
            report.domination_violations += 1
        if (bad or step_violation) and len(report.witnesses) < _MAX_WITNESSES:
            report.witnesses.append(tuple(float(v) for v in prefix))
        return

    for v in values:
        exact = z_hat + v
        new = round_rational(exact, fmt)
        delta = new / exact - 1 if exact != 0 else Fraction(0)
        sub = is_subnormal(new, fmt)
        bad_step = False
        report.delta_checks += 1
        if sub:
            report.subnormal_steps += 1
        elif abs(delta) > u:
            report.delta_violations += 1
            bad_step = True
        s = abs_sum + abs(v)
        _walk(report, fmt, u, values, n, prefix + (v,), new, z + v, s, c_sum + u * s,
              step_violation or bad_step, subnormal or sub)


def _check_from_first(args) -> ExhaustiveReport:
    n, fmt, values, first = args
    u = fmt.unit_roundoff
    part = ExhaustiveReport(n=n, format=fmt.name, value_set=tuple(float(v) for v in values))
    # c_1 = 0: the first element contributes nothing to the bound.
    _walk(part, fmt, u, values, n, (first,), first, first, abs(first), Fraction(0), False,
          is_subnormal(first, fmt))
    return part


def exhaustive_delta_check(
    n: int,
    fmt: FloatFormat,
    value_set: Iterable,
    workers: int = 1,
) -> ExhaustiveReport:
    """
    Check the standard model and the deterministic bound on *every* vector of length n
    drawn from ``value_set``.

    For each vector the sum is replayed step by step with exact rounding,
    checking |delta_k| <= u at every non-subnormal step and
    |z_hat_n - z_n| <= sum(c_k) at the end.

    Parameters
    ----------
    n : int
        Vector length, 1..12.
    fmt : FloatFormat
    value_set : iterable of numbers
        Values are rounded into ``fmt`` first (duplicates removed).
    workers : int
        Number of processes; the enumeration is split by the first element
        and results are merged by count.

    Returns
    -------
    ExhaustiveReport
        ``report.passed`` is False if any violation was found; the first
        offending vectors are listed in ``report.witnesses``.
    """
    if not 1 <= n <= 12:
        raise OracleIndexError(f"exhaustive check supports 1 <= n <= 12, got {n}")
    values = sorted({round_rational(v, fmt) for v in value_set})
    if not values:
        raise EmptyInputError("value_set is empty")
    combos = len(values) ** n
    log.info("exhaustive check: %d vectors of length %d in %s", combos, n, fmt.name)

    jobs = [(n, fmt, values, first) for first in values]
    report = ExhaustiveReport(n=n, format=fmt.name, value_set=tuple(float(v) for v in values))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_check_from_first, jobs))
    else:
        parts = [_check_from_first(job) for job in jobs]
    for part in parts:
        report.merge(part)
    return report
