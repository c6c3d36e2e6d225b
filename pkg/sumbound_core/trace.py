"""
sumbound_core.trace
-------------------
Sequential summation in a target precision, run side by side with the exact
sum, recording what every rounding did.

Notation (1-based steps, as in the docs)
----------------------------------------
- ``z_k``      exact partial sum x_1 + ... + x_k
- ``z_hat_k``  computed partial sum: z_hat_1 = x_1, z_hat_k = fl(z_hat_{k-1} + x_k)
- ``delta_k``  realized rounding error of step k >= 2:
               z_hat_k = (z_hat_{k-1} + x_k)(1 + delta_k)
- ``M_k``      accumulated error z_hat_k - z_k, with M_1 = 0

In code every sequence is 0-based: ``trace.z_hat[0]`` is z_hat_1 and
``trace.delta[0]`` is delta_2.

Two ways to run
---------------
``run_summation`` keeps every partial sum and every delta_k as exact
rationals, up to ``n_trace_max`` elements. Longer inputs are streamed
through ``SequentialSummer``, which adds chunks with numpy (one rounding per
element, strictly in order) and keeps only the totals.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyInputError, FormatOverflowError, InvalidInputError, TraceNotRetainedError
from .oracle import ExactSumAccumulator
from .precision import FORMATS, FloatFormat, TargetValue, round_add_float, subnormal_mask

log = logging.getLogger(__name__)

DEFAULT_N_TRACE_MAX = 100_000

# Subnormal step numbers kept by the streaming summer (the count is always exact).
_MAX_SUBNORMAL_STEPS = 1000


@dataclass(frozen=True)
class SummationTrace:
    """
    Result of one sequential summation.

    Attributes
    ----------
    format : FloatFormat
    n : int
    x : tuple[float, ...]
        The summands (exact values of ``format``); empty if not retained.
    z_hat : tuple[float, ...]
        Computed partial sums z_hat_1..z_hat_n; empty if not retained.
    z_exact : tuple[Fraction, ...]
        Exact partial sums z_1..z_n; empty if not retained.
    delta : tuple[Fraction, ...]
        delta_2..delta_n (length n-1); empty if not retained.
    subnormal_steps : frozenset[int]
        1-based steps whose partial sum was subnormal.
    z_hat_n, z_exact_n : float, Fraction
        Final computed and exact sums (always kept).
    abs_sum : Fraction
        Exact sum of |x_k| (always kept).
    retained : bool
        False when the input was longer than ``n_trace_max``.
    subnormal_count : int
        Number of subnormal steps (can exceed ``len(subnormal_steps)`` for
        streamed traces).
    """

    format: FloatFormat
    n: int
    z_hat_n: float
    z_exact_n: Fraction
    abs_sum: Fraction
    x: Tuple[float, ...] = ()
    z_hat: Tuple[float, ...] = ()
    z_exact: Tuple[Fraction, ...] = ()
    delta: Tuple[Fraction, ...] = ()
    subnormal_steps: FrozenSet[int] = frozenset()
    subnormal_count: int = 0
    retained: bool = True

    @property
    def error(self) -> Fraction:
        """Exact forward error z_hat_n - z_n."""
        return Fraction(self.z_hat_n) - self.z_exact_n

    @property
    def relative_error(self) -> Optional[Fraction]:
        """|z_hat_n - z_n| / |z_n|, or None when z_n = 0."""
        if self.z_exact_n == 0:
            return None
        return abs(self.error) / abs(self.z_exact_n)

    def require_retained(self) -> None:
        if not self.retained:
            raise TraceNotRetainedError(
                f"Trace of n = {self.n} was streamed; per-step data is only kept up to n_trace_max."
            )


@dataclass(frozen=True)
class ErrorDecomposition:
    """
    Two ways of writing the forward error as a sum of per-step terms.

    ``m_terms[i]`` is delta_k (z_hat_{k-1} + x_k) for step k = i + 2. These add
    up to z_hat_n - z_n *exactly*.

    ``z_terms[i]`` is the first-order term delta_k (x_1 + ... + x_k). Their sum
    ``z_total`` differs from the true error by ``residual``, which is of
    second order in u.
    """

    m_terms: Tuple[Fraction, ...]
    m_total: Fraction
    z_terms: Tuple[Fraction, ...]
    z_total: Fraction
    residual: Fraction
    m_partial: Tuple[Fraction, ...] = field(default=())

    @property
    def identity_holds(self) -> bool:
        """True if every M_k - M_{k-1} equals its m-term (always, by construction)."""
        return all(
            self.m_partial[i + 1] - self.m_partial[i] == term for i, term in enumerate(self.m_terms)
        )


# ------------------------
# Input normalisation
# ------------------------
def _format_of_dtype(dtype) -> FloatFormat:
    for fmt in FORMATS.values():
        if np.dtype(fmt.dtype) == dtype:
            return fmt
    raise InvalidInputError(f"No target format for dtype {dtype}")


def as_target_array(x, fmt: Optional[FloatFormat] = None) -> Tuple[np.ndarray, FloatFormat]:
    """
    Turn ``x`` into a numpy array of its target format.

    Accepts a sequence of TargetValue (one shared format), a numpy array of
    float16/float32/float64, or plain floats together with ``fmt``. Values
    must already be exactly representable; nothing is rounded here.

    Raises
    ------
    InvalidInputError
        Mixed formats, missing format, NaN/inf, or non-representable values.
    """
    if isinstance(x, np.ndarray):
        fmt = fmt or _format_of_dtype(x.dtype)
        arr = x
    else:
        vals = list(x)
        if vals and isinstance(vals[0], TargetValue):
            formats = {v.format for v in vals}
            if len(formats) != 1:
                raise InvalidInputError("All summands must share one format")
            fmt = fmt or vals[0].format
            if fmt not in formats:
                raise InvalidInputError(f"Summands are not {fmt.name} values")
            arr = np.array([v.value for v in vals], dtype=np.float64)
        else:
            if fmt is None:
                raise InvalidInputError("A format is needed for plain float input")
            arr = np.asarray(vals, dtype=np.float64)

    wide = arr.astype(np.float64)
    if not np.all(np.isfinite(wide)):
        raise InvalidInputError("Summands must be finite")
    with np.errstate(over="ignore"):
        narrow = wide.astype(fmt.dtype)
    if not np.array_equal(narrow.astype(np.float64), wide):
        bad = int(np.argmax(narrow.astype(np.float64) != wide)) + 1
        raise InvalidInputError(f"Summand {bad} is not exactly representable in {fmt.name} precision")
    return narrow, fmt


# ------------------------
# Streaming summation
# ------------------------
class SequentialSummer:
    """
    Sequential target-precision summation, fed chunk by chunk.

    Each chunk is added with ``np.add.accumulate`` in the target dtype, which
    rounds after every single addition and processes elements strictly in
    order, so the result is identical to a one-element-at-a-time loop.

    Example
    -------
    >>> s = SequentialSummer(SINGLE)
    >>> s.feed(np.ones(3, dtype=np.float32))
    >>> float(s.z_hat)
    3.0
    """

    def __init__(self, fmt: FloatFormat):
        self.format = fmt
        self.k = 0
        self.z_hat = fmt.dtype(0)
        self.exact = ExactSumAccumulator()
        self.subnormal_steps: List[int] = []
        self.subnormal_count = 0

    def feed(self, chunk: np.ndarray) -> None:
        """
        Add the next chunk of summands.

        Raises
        ------
        FormatOverflowError
            A partial sum overflowed; ``err.step`` is the 1-based step.
        """
        fmt = self.format
        chunk = np.asarray(chunk, dtype=fmt.dtype)
        if chunk.size == 0:
            return
        if self.k == 0:
            seq = chunk
        else:
            seq = np.concatenate((np.array([self.z_hat], dtype=fmt.dtype), chunk))

        with np.errstate(over="ignore", invalid="ignore"):
            partials = np.add.accumulate(seq, dtype=fmt.dtype)
        if self.k > 0:
            partials = partials[1:]

        finite = np.isfinite(partials)
        if not finite.all():
            step = self.k + int(np.argmax(~finite)) + 1
            raise FormatOverflowError(f"Partial sum overflowed {fmt.name} precision at step {step}", step=step)

        sub = np.flatnonzero(subnormal_mask(partials, fmt))
        if sub.size:
            self.subnormal_count += int(sub.size)
            room = _MAX_SUBNORMAL_STEPS - len(self.subnormal_steps)
            self.subnormal_steps.extend(int(i) + self.k + 1 for i in sub[:room])

        self.z_hat = partials[-1]
        self.exact.add(chunk)
        self.k += int(chunk.size)

    def to_trace(self) -> SummationTrace:
        """Freeze the totals into a (non-retained) SummationTrace."""
        if self.k == 0:
            raise EmptyInputError("No summands were fed")
        return SummationTrace(
            format=self.format,
            n=self.k,
            z_hat_n=float(self.z_hat),
            z_exact_n=self.exact.total,
            abs_sum=self.exact.abs_total,
            subnormal_steps=frozenset(self.subnormal_steps),
            subnormal_count=self.subnormal_count,
            retained=False,
        )


# ------------------------
# Public operations
# ------------------------
def run_summation(
    x,
    fmt: Optional[FloatFormat] = None,
    n_trace_max: int = DEFAULT_N_TRACE_MAX,
    chunk_size: int = 1 << 16,
) -> SummationTrace:
    """
    Sum ``x`` sequentially in its target format, next to the exact sum.

    Parameters
    ----------
    x : sequence of TargetValue, numpy array, or floats (with ``fmt``)
    fmt : FloatFormat, optional
        Needed only for plain float input.
    n_trace_max : int
        Inputs up to this length keep every per-step value; longer inputs
        are streamed and keep totals only.
    chunk_size : int
        Chunk length for the streamed path.

    Returns
    -------
    SummationTrace

    Raises
    ------
    EmptyInputError
        ``x`` is empty.
    FormatOverflowError
        A partial sum overflowed (``err.step`` says where).
    InvalidInputError
        Non-finite, mixed-format or non-representable summands.

    Examples
    --------
    >>> t = run_summation([1.0, 1.0], SINGLE)
    >>> t.z_hat, t.delta
    ((1.0, 2.0), (Fraction(0, 1),))
    """
    arr, fmt = as_target_array(x, fmt)
    n = int(arr.size)
    if n == 0:
        raise EmptyInputError("Cannot sum an empty vector")

    if n > n_trace_max:
        log.debug("streaming n = %d (> n_trace_max = %d)", n, n_trace_max)
        summer = SequentialSummer(fmt)
        for start in range(0, n, chunk_size):
            summer.feed(arr[start:start + chunk_size])
        trace = summer.to_trace()
    else:
        trace = _full_trace(arr, fmt)

    if trace.subnormal_count:
        warnings.warn(
            f"{trace.subnormal_count} partial sum(s) fell in the {fmt.name} subnormal range; "
            "|delta| <= u is not guaranteed at those steps."
        )
    return trace


def _full_trace(arr: np.ndarray, fmt: FloatFormat) -> SummationTrace:
    xs = [float(v) for v in arr]
    tiny = float(fmt.smallest_normal)

    zh = xs[0]
    ze = Fraction(xs[0])
    abs_sum = abs(ze)
    z_hat = [zh]
    z_exact = [ze]
    delta: List[Fraction] = []
    subnormal = {1} if 0 < abs(zh) < tiny else set()

    for k in range(1, len(xs)):
        xk = xs[k]
        s = round_add_float(zh, xk, fmt)
        if not np.isfinite(s):
            raise FormatOverflowError(f"Partial sum overflowed {fmt.name} precision at step {k + 1}", step=k + 1)
        fx = Fraction(xk)
        exact_step = Fraction(zh) + fx
        # fl(0) = 0, so a zero intermediate sum carries no rounding error.
        delta.append(Fraction(s) / exact_step - 1 if exact_step != 0 else Fraction(0))
        if 0 < abs(s) < tiny:
            subnormal.add(k + 1)
        zh = s
        ze += fx
        abs_sum += abs(fx)
        z_hat.append(zh)
        z_exact.append(ze)

    return SummationTrace(
        format=fmt,
        n=len(xs),
        z_hat_n=zh,
        z_exact_n=ze,
        abs_sum=abs_sum,
        x=tuple(xs),
        z_hat=tuple(z_hat),
        z_exact=tuple(z_exact),
        delta=tuple(delta),
        subnormal_steps=frozenset(subnormal),
        subnormal_count=len(subnormal),
        retained=True,
    )


def extract_deltas(trace: SummationTrace) -> Tuple[Fraction, ...]:
    """
    Realized rounding errors delta_2..delta_n of a retained trace.

    Each entry is recomputed as z_hat_k / (z_hat_{k-1} + x_k) - 1 in exact
    arithmetic, and 0 where the intermediate sum is exactly 0.

    Raises
    ------
    TraceNotRetainedError
        The trace was streamed.
    """
    trace.require_retained()
    out = []
    for k in range(1, trace.n):
        exact_step = Fraction(trace.z_hat[k - 1]) + Fraction(trace.x[k])
        out.append(Fraction(trace.z_hat[k]) / exact_step - 1 if exact_step != 0 else Fraction(0))
    return tuple(out)


def decompose_error(trace: SummationTrace) -> ErrorDecomposition:
    """
    Split the forward error of a retained trace into per-step terms.

    The m-terms delta_k (z_hat_{k-1} + x_k) telescope exactly to
    z_hat_n - z_n. The first-order terms delta_k z_k are returned alongside,
    together with the (second-order) residual of their sum.

    Raises
    ------
    TraceNotRetainedError
        The trace was streamed.
    """
    trace.require_retained()
    m_terms = []
    z_terms = []
    m_partial = [Fraction(0)]
    for k in range(1, trace.n):
        d = trace.delta[k - 1]
        m_terms.append(d * (Fraction(trace.z_hat[k - 1]) + Fraction(trace.x[k])))
        z_terms.append(d * trace.z_exact[k])
        m_partial.append(Fraction(trace.z_hat[k]) - trace.z_exact[k])

    m_total = sum(m_terms, Fraction(0))
    z_total = sum(z_terms, Fraction(0))
    return ErrorDecomposition(
        m_terms=tuple(m_terms),
        m_total=m_total,
        z_terms=tuple(z_terms),
        z_total=z_total,
        residual=trace.error - z_total,
        m_partial=tuple(m_partial),
    )
