"""
sumbound_core.bounds
--------------------
The three forward-error bounds for sequential summation, computed from
running accumulators that cost O(1) per element.

Audience
--------
Readers who want to check the formulas against the code. Everything below
uses 1-based step numbers, like the docs.

Quantities
----------
- ``S_j = |x_1| + ... + |x_j|``
- ``c_1 = 0``, ``c_j = u * S_j`` for j >= 2          (deterministic weights)
- ``m_1 = |x_1| + |x_2|``,
  ``m_k = m_{k-1} (1 + u) + |x_{k+1}|`` for k >= 2    (martingale weights)

The recurrence for m_k is algebraically the same as the closed form
``|x_1|(1+u)^(k-1) + sum_{j=2..k+1} |x_j|(1+u)^(k-j+1)`` (see
``oracle.m_closed_form``) but costs O(1) per element instead of O(k).

Bounds (relative, z_n = exact sum)
----------------------------------
- deterministic:  sum(c_k) / |z_n|                         (variant "theorem")
                  sqrt(n) * sum(c_k) / |z_n|               (variant "graphs")
- Azuma:          sqrt(2 ln(2/delta)) sqrt(sum c_k^2) / |z_n|
- martingale:     u sqrt(2 ln(2/delta)) sqrt(sum_{k<n} m_k^2) / |z_n|

The probabilistic bounds hold with probability at least 1 - delta under the
model where the rounding errors are independent and zero-mean.

Working precision
-----------------
Accumulators run either in binary64 (``exact=False``, the default: at
least 53 bits for half and single targets) or in exact rationals
(``exact=True``). Final evaluations (ratios, logs, roots) use mpmath at
``WORKING_DPS`` decimal digits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union

import mpmath
import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, DomainError, ZeroSumError

Number = Union[float, Fraction]

WORKING_DPS = 50
DEFAULT_FAILURE_PROB = 1e-16
DET_VARIANTS = ("theorem", "graphs")
BOUND_IDS = ("azuma", "martingale")


def to_mpf(value) -> mpmath.mpf:
    """Convert float / int / Fraction / str / mpf to mpmath.mpf at WORKING_DPS."""
    with mpmath.workdps(WORKING_DPS):
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        return mpmath.mpf(value)


def check_variant(variant: str) -> str:
    v = str(variant).strip().lower()
    if v not in DET_VARIANTS:
        raise ConfigError(f"det_variant must be one of {DET_VARIANTS}, got {variant!r}")
    return v


# ------------------------
# Accumulators
# ------------------------
@dataclass(frozen=True)
class BoundAccumulators:
    """
    Running state for all three bounds after ``k`` elements.

    Attributes
    ----------
    u : Fraction
        Unit roundoff of the target format.
    exact : bool
        True: Fractions throughout. False: binary64.
    k : int
        Elements seen so far.
    abs_sum : S_k
    c_sum : sum_{j<=k} c_j
    c_sq_sum : sum_{j<=k} c_j^2
    m_current : m_{k-1} (0 while k < 2)
    m_sq_sum : sum_{j<=k-1} m_j^2
    paths : tuple
        Which families are tracked: "c" (deterministic + Azuma), "m"
        (martingale). Both by default.
    """

    u: Fraction
    exact: bool = False
    k: int = 0
    abs_sum: Number = 0.0
    c_sum: Number = 0.0
    c_sq_sum: Number = 0.0
    m_current: Number = 0.0
    m_sq_sum: Number = 0.0
    paths: Tuple[str, ...] = field(default=("c", "m"))

    @classmethod
    def start(cls, u: Fraction, exact: bool = False, paths: Iterable[str] = ("c", "m")) -> "BoundAccumulators":
        """Empty accumulators for unit roundoff ``u``."""
        zero = Fraction(0) if exact else 0.0
        return cls(
            u=Fraction(u), exact=exact, abs_sum=zero, c_sum=zero, c_sq_sum=zero,
            m_current=zero, m_sq_sum=zero, paths=tuple(paths),
        )

    @property
    def n(self) -> int:
        return self.k

    def _scalar(self, value) -> Number:
        if self.exact:
            v = value if isinstance(value, (Fraction, int)) else Fraction(float(value))
        else:
            v = float(value)
        if v < 0:
            raise DomainError(f"|x| must be nonnegative, got {value!r}")
        return v

    def update(self, abs_x_next) -> "BoundAccumulators":
        """
        Advance every accumulator by one element with magnitude ``abs_x_next``.

        Examples
        --------
        After |x| = 1, 1: c_sum = 2u, c_sq_sum = 4u^2, m_current = m_1 = 2.
        """
        a = self._scalar(abs_x_next)
        u = self.u if self.exact else float(self.u)
        k = self.k + 1
        abs_sum = self.abs_sum + a
        changes = dict(k=k, abs_sum=abs_sum)
        if k >= 2:
            if "c" in self.paths:
                c = u * abs_sum
                changes.update(c_sum=self.c_sum + c, c_sq_sum=self.c_sq_sum + c * c)
            if "m" in self.paths:
                m = abs_sum if k == 2 else self.m_current * (1 + u) + a
                changes.update(m_current=m, m_sq_sum=self.m_sq_sum + m * m)
        return replace(self, **changes)

    def update_many(self, abs_chunk) -> "BoundAccumulators":
        """
        Advance by a whole chunk of magnitudes.

        In binary64 mode the chunk is processed with numpy (prefix sums) and a
        first-order linear filter (``scipy.signal.lfilter``) for the m
        recurrence; in exact mode it is a loop over ``update``.
        """
        a = np.asarray(abs_chunk, dtype=np.float64 if not self.exact else object)
        if a.size == 0:
            return self
        if self.exact:
            acc = self
            for v in a.ravel():
                acc = acc.update(v)
            return acc
        if np.any(a < 0):
            raise DomainError("|x| values must be nonnegative")

        u = float(self.u)
        size = int(a.size)
        prefix = self.abs_sum + np.cumsum(a)
        changes = dict(k=self.k + size, abs_sum=float(prefix[-1]))

        # Position i of the chunk is element number self.k + 1 + i; c and m
        # terms start at element 2.
        first = max(0, 1 - self.k)
        if first < size:
            if "c" in self.paths:
                c = u * prefix[first:]
                changes.update(c_sum=self.c_sum + float(c.sum()), c_sq_sum=self.c_sq_sum + float(np.dot(c, c)))
            if "m" in self.paths:
                r = 1.0 + u
                if self.k + first + 1 == 2:
                    m_first = float(prefix[first])
                    rest = a[first + 1:]
                    head = np.array([m_first])
                    prev = m_first
                else:
                    rest = a[first:]
                    head = np.empty(0)
                    prev = float(self.m_current)
                if rest.size:
                    tail, _ = lfilter([1.0], [1.0, -r], rest, zi=[r * prev])
                    ms = np.concatenate((head, tail))
                else:
                    ms = head
                changes.update(m_current=float(ms[-1]), m_sq_sum=self.m_sq_sum + float(np.dot(ms, ms)))
        return replace(self, **changes)

    @classmethod
    def combine(cls, c_part: "BoundAccumulators", m_part: "BoundAccumulators") -> "BoundAccumulators":
        """
        Join a c-only and an m-only accumulator that saw the same elements.

        Raises
        ------
        ValueError
            The two parts disagree on ``k`` or ``u``.
        """
        if c_part.k != m_part.k or c_part.u != m_part.u:
            raise ValueError("Accumulators from different inputs cannot be combined")
        return replace(
            c_part,
            m_current=m_part.m_current,
            m_sq_sum=m_part.m_sq_sum,
            paths=("c", "m"),
        )


def update(acc: BoundAccumulators, abs_x_next) -> BoundAccumulators:
    """Functional form of ``BoundAccumulators.update``."""
    return acc.update(abs_x_next)


def accumulate(abs_values, u: Fraction, exact: bool = False) -> BoundAccumulators:
    """Convenience: accumulators after all of ``abs_values``."""
    return BoundAccumulators.start(u, exact=exact).update_many(abs_values)


# ------------------------
# Bounds
# ------------------------
def _abs_nonzero(z_n) -> mpmath.mpf:
    z = abs(to_mpf(z_n))
    if z == 0:
        raise ZeroSumError(
            "The exact sum is 0, so relative errors are undefined; use absolute_bounds instead."
        )
    return z


def det_bound(acc: BoundAccumulators, z_n, variant: str = "theorem") -> mpmath.mpf:
    """
    Deterministic bound sum(c_k)/|z_n|, times sqrt(n) for variant "graphs".

    >>> acc = accumulate([1, 1], Fraction(1, 2**24), exact=True)
    >>> det_bound(acc, 2) == to_mpf(Fraction(1, 2**24))
    True
    """
    variant = check_variant(variant)
    z = _abs_nonzero(z_n)
    with mpmath.workdps(WORKING_DPS):
        value = to_mpf(acc.c_sum) / z
        if variant == "graphs":
            value *= mpmath.sqrt(acc.k)
        return +value


def concentration_radius(weights_sq_sum, failure_prob) -> mpmath.mpf:
    """
    sqrt(2 ln(2/failure_prob)) * sqrt(weights_sq_sum).

    Exactly 0 when all weights are 0.

    Raises
    ------
    DomainError
        failure_prob outside (0, 1) or a negative weight sum.
    """
    with mpmath.workdps(WORKING_DPS):
        delta = to_mpf(failure_prob)
        if not 0 < delta < 1:
            raise DomainError(f"failure probability must lie in (0, 1), got {failure_prob}")
        w = to_mpf(weights_sq_sum)
        if w < 0:
            raise DomainError("sum of squared weights must be nonnegative")
        if w == 0:
            return mpmath.mpf(0)
        return mpmath.sqrt(2 * mpmath.log(2 / delta)) * mpmath.sqrt(w)


def azuma_bound(acc: BoundAccumulators, z_n, failure_prob=DEFAULT_FAILURE_PROB) -> mpmath.mpf:
    """concentration_radius(sum c_k^2, delta) / |z_n|."""
    z = _abs_nonzero(z_n)
    with mpmath.workdps(WORKING_DPS):
        return concentration_radius(acc.c_sq_sum, failure_prob) / z


def martingale_bound(acc: BoundAccumulators, z_n, failure_prob=DEFAULT_FAILURE_PROB) -> mpmath.mpf:
    """u * concentration_radius(sum_{k<n} m_k^2, delta) / |z_n|."""
    z = _abs_nonzero(z_n)
    with mpmath.workdps(WORKING_DPS):
        return to_mpf(acc.u) * concentration_radius(acc.m_sq_sum, failure_prob) / z


def absolute_bounds(
    acc: BoundAccumulators,
    failure_prob=DEFAULT_FAILURE_PROB,
    variant: str = "theorem",
) -> Tuple[mpmath.mpf, mpmath.mpf, mpmath.mpf]:
    """
    The three bounds on |z_hat_n - z_n| itself (no division by |z_n|).

    Used when the exact sum is 0 and relative errors are undefined.

    Returns
    -------
    (det, azuma, martingale)
    """
    variant = check_variant(variant)
    with mpmath.workdps(WORKING_DPS):
        det = to_mpf(acc.c_sum)
        if variant == "graphs":
            det *= mpmath.sqrt(acc.k)
        azuma = concentration_radius(acc.c_sq_sum, failure_prob)
        mart = to_mpf(acc.u) * concentration_radius(acc.m_sq_sum, failure_prob)
        return +det, azuma, mart


# ------------------------
# Reports
# ------------------------
@dataclass(frozen=True)
class BoundReport:
    """
    Everything known about one (n, distribution, precision, delta) point.

    When ``absolute`` is True the exact sum was 0: ``true_rel_err`` and the
    three bound fields then hold *absolute* quantities, and ``flags``
    contains "zero_sum".
    """

    n: int
    precision: str
    distribution: str
    failure_prob: float
    det_variant: str
    true_rel_err: mpmath.mpf
    det_bound: mpmath.mpf
    azuma_bound: mpmath.mpf
    martingale_bound: mpmath.mpf
    z_n_exact: Fraction
    z_hat_n: float
    sum_abs_x: Fraction
    flags: Tuple[str, ...] = ()
    absolute: bool = False

    @property
    def bounds(self) -> dict:
        return {"det": self.det_bound, "azuma": self.azuma_bound, "martingale": self.martingale_bound}


def build_report(
    trace,
    acc: BoundAccumulators,
    failure_prob=DEFAULT_FAILURE_PROB,
    det_variant: str = "theorem",
    distribution: str = "data",
    flags: Iterable[str] = (),
) -> BoundReport:
    """
    Combine a summation trace and matching accumulators into a BoundReport.

    A zero exact sum does not raise: the report switches to absolute bounds,
    carries the "zero_sum" flag, and a warning is issued.

    Parameters
    ----------
    trace : SummationTrace
        Supplies z_hat_n, z_n and the subnormal steps.
    acc : BoundAccumulators
        Must have seen the same n elements.
    """
    if acc.k != trace.n:
        raise ValueError(f"Accumulators saw {acc.k} elements but the trace has {trace.n}")
    variant = check_variant(det_variant)
    flags = list(flags)
    if trace.subnormal_count and "subnormal" not in flags:
        flags.append("subnormal")

    z_n = trace.z_exact_n
    err = abs(trace.error)
    if z_n == 0:
        warnings.warn("Exact sum is 0; reporting absolute error and absolute bounds.")
        flags.append("zero_sum")
        det, az, mart = absolute_bounds(acc, failure_prob, variant)
        true_err = to_mpf(err)
        absolute = True
    else:
        det = det_bound(acc, z_n, variant)
        az = azuma_bound(acc, z_n, failure_prob)
        mart = martingale_bound(acc, z_n, failure_prob)
        true_err = to_mpf(err / abs(z_n))
        absolute = False

    return BoundReport(
        n=trace.n,
        precision=trace.format.name,
        distribution=distribution,
        failure_prob=float(failure_prob),
        det_variant=variant,
        true_rel_err=true_err,
        det_bound=det,
        azuma_bound=az,
        martingale_bound=mart,
        z_n_exact=z_n,
        z_hat_n=trace.z_hat_n,
        sum_abs_x=trace.abs_sum,
        flags=tuple(flags),
        absolute=absolute,
    )


def report_for_values(
    x,
    fmt=None,
    failure_prob=DEFAULT_FAILURE_PROB,
    det_variant: str = "theorem",
    exact: bool = False,
    distribution: str = "data",
    n_trace_max: Optional[int] = None,
) -> BoundReport:
    """
    One-call analysis of a vector: sum it, accumulate, and build the report.
    """
    from .trace import DEFAULT_N_TRACE_MAX, as_target_array, run_summation

    arr, fmt = as_target_array(x, fmt)
    trace = run_summation(arr, fmt, n_trace_max=n_trace_max or DEFAULT_N_TRACE_MAX)
    values = np.abs(arr.astype(np.float64))
    acc = accumulate(values, fmt.unit_roundoff, exact=exact)
    return build_report(trace, acc, failure_prob, det_variant, distribution)
