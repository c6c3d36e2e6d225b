"""
sumbound_core.validation
------------------------
The self-check suite behind ``sumbound validate``.

Two kinds of result
-------------------
- **check**: a mathematical guarantee tested in exact arithmetic. Any
  violation fails the suite (CLI exit code 3).
- **observation**: a measured property of a standard experiment grid
  (orders-of-magnitude gaps, a bound dipping below the true error). These
  are reported, never failed.

Checks
------
1) exhaustive: every vector of length n over small value sets, replayed
   with exact rounding (|delta_k| <= u and deterministic domination).
2) recurrence: the O(1) m_k update equals the closed form exactly.
3) envelopes: |z_hat_k| and the per-step error increments stay under their
   a-priori envelopes; the error terms telescope exactly.
4) domination: |z_hat_n - z_n| <= sum(c_k) exactly on random vectors.
5) sweep grids: the martingale bound at delta = 1e-16 lies above the true
   error at every point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import BoundAccumulators
from .config import preset_config
from .experiments import ExperimentConfig, SweepRow, gap_range, generate, orders_of_magnitude, run_sweep
from .oracle import exhaustive_delta_check, m_closed_form, zhat_envelope
from .precision import HALF, SINGLE, FloatFormat
from .trace import SummationTrace, decompose_error, run_summation

log = logging.getLogger(__name__)

# Value sets for the exhaustive check: mixed signs and magnitudes so that
# rounding, cancellation and exact steps all occur.
EXHAUSTIVE_VALUE_SETS: Tuple[Tuple[FloatFormat, Tuple], ...] = (
    (HALF, (1, "0.333", 2 ** -11, "-0.75")),
    (SINGLE, (1, "0.1", 2 ** -24, -3)),
)

DOMINATION_LENGTHS = (10, 100, 1_000, 10_000)
ENVELOPE_LENGTH = 50


@dataclass(frozen=True)
class CheckResult:
    name: str
    kind: str  # "check" or "observation"
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    """All results of one validation run, in execution order."""

    results: List[CheckResult] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str, kind: str = "check") -> None:
        log.info("%s %s: %s", kind, name, detail)
        self.results.append(CheckResult(name, kind, bool(passed), detail))

    @property
    def checks(self) -> List[CheckResult]:
        return [r for r in self.results if r.kind == "check"]

    @property
    def observations(self) -> List[CheckResult]:
        return [r for r in self.results if r.kind == "observation"]

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.checks if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures


# ------------------------
# Exact per-trace checks
# ------------------------
def exact_c_sum(abs_values: np.ndarray, u: Fraction) -> Fraction:
    """
    sum_{k=2..n} c_k = u * sum_{k=2..n} S_k, exactly.

    The magnitudes are scaled to integers by a common power of two, so the
    prefix sums run in Python integers.
    """
    a = np.asarray(abs_values, dtype=np.float64)
    if a.size < 2:
        return Fraction(0)
    mant, expo = np.frexp(a)
    sig = np.ldexp(mant, 53).astype(np.int64)
    expo = expo.astype(np.int64) - 53
    nz = sig != 0
    base = int(expo[nz].min()) if nz.any() else 0
    running = 0
    total = 0
    for k, (s, e) in enumerate(zip(sig.tolist(), expo.tolist())):
        if s:
            running += s << (e - base)
        if k >= 1:
            total += running
    return Fraction(u) * total * Fraction(2) ** base


def check_domination(trace: SummationTrace, c_sum: Optional[Fraction] = None) -> bool:
    """
    True when |z_hat_n - z_n| <= sum(c_k) holds exactly.

    Parameters
    ----------
    trace : SummationTrace
    c_sum : Fraction, optional
        Exact sum of the c_k. Computed from ``trace.x`` when omitted, which
        needs a retained trace.

    Raises
    ------
    TraceNotRetainedError
        ``c_sum`` omitted for a streamed trace.
    """
    if c_sum is None:
        trace.require_retained()
        c_sum = exact_c_sum(np.abs(np.asarray(trace.x, dtype=np.float64)), trace.format.unit_roundoff)
    return abs(trace.error) <= c_sum


def check_envelopes(trace: SummationTrace) -> int:
    """
    Number of envelope violations on a retained trace.

    For every step k: |z_hat_k| <= zhat_envelope(x, k, u), and for k >= 2
    the error increment |M_k - M_{k-1}| <= u * m_{k-1}.
    Subnormal steps are skipped.
    """
    trace.require_retained()
    u = trace.format.unit_roundoff
    x = trace.x
    bad = 0
    for k in range(1, trace.n + 1):
        if k in trace.subnormal_steps:
            continue
        if abs(Fraction(trace.z_hat[k - 1])) > zhat_envelope(x, k, u):
            bad += 1
        if k >= 2:
            step = Fraction(trace.z_hat[k - 1]) - trace.z_exact[k - 1]
            prev = Fraction(trace.z_hat[k - 2]) - trace.z_exact[k - 2]
            if abs(step - prev) > u * m_closed_form(x, k - 1, u):
                bad += 1
    return bad


def check_recurrence(x: Sequence[float], u: Fraction, k_max: Optional[int] = None) -> int:
    """
    Number of k (1..min(k_max, n-1)) where the recurrence and closed form of
    m_k differ. Both are evaluated in exact rationals.
    """
    n = len(x)
    last = n - 1 if k_max is None else min(k_max, n - 1)
    acc = BoundAccumulators.start(u, exact=True, paths=("m",))
    mismatches = 0
    for value in x[: last + 1]:
        acc = acc.update(abs(Fraction(float(value))))
        k = acc.k - 1
        if k >= 1 and acc.m_current != m_closed_form(x, k, u):
            mismatches += 1
    return mismatches


# ------------------------
# Suites
# ------------------------
def _random_config(fmt: FloatFormat, distribution: str, seed: int) -> ExperimentConfig:
    return ExperimentConfig(precision=fmt.name, distribution=distribution, n_start=1, n_end=1, n_step=1, seed=seed)


def run_exhaustive(report: ValidationReport, n: int, workers: int = 1) -> None:
    for fmt, values in EXHAUSTIVE_VALUE_SETS:
        res = exhaustive_delta_check(n, fmt, values, workers=workers)
        detail = (
            f"{fmt.name}, n = {n}: {res.cases} vectors, {res.delta_checks} steps, "
            f"{res.violations} violation(s), max error/bound {float(res.max_ratio):.3f}"
        )
        if res.witnesses:
            detail += f", first witness {res.witnesses[0]}"
        report.add(f"exhaustive-{fmt.name}", res.passed, detail)


def run_recurrence(report: ValidationReport, vectors: int, seed: int, k_max: int = 200) -> None:
    mismatches = 0
    for i in range(vectors):
        cfg = _random_config(SINGLE, "normal", seed)
        x = [float(v) for v in generate(cfg, k_max + 1, i)]
        mismatches += check_recurrence(x, SINGLE.unit_roundoff, k_max)
    report.add(
        "recurrence",
        mismatches == 0,
        f"{vectors} vector(s), m_k for k <= {k_max}: {mismatches} mismatch(es)",
    )


def run_envelopes(report: ValidationReport, traces: int, seed: int) -> None:
    bad_env = 0
    bad_identity = 0
    for fmt in (HALF, SINGLE):
        for i in range(traces):
            dist = "normal" if i % 2 == 0 else "uniform"
            x = generate(_random_config(fmt, dist, seed), ENVELOPE_LENGTH, i)
            trace = run_summation(x, fmt)
            bad_env += check_envelopes(trace)
            if not decompose_error(trace).identity_holds:
                bad_identity += 1
    report.add("envelopes", bad_env == 0, f"{2 * traces} trace(s) of n = {ENVELOPE_LENGTH}: {bad_env} violation(s)")
    report.add("error-identity", bad_identity == 0, f"{2 * traces} trace(s): {bad_identity} mismatch(es)")


def run_domination(
    report: ValidationReport,
    traces: int,
    seed: int,
    lengths: Iterable[int] = DOMINATION_LENGTHS,
) -> None:
    for fmt in (HALF, SINGLE):
        violations = 0
        skipped = 0
        total = 0
        for n in lengths:
            for i in range(traces):
                dist = "normal" if i % 2 == 0 else "uniform"
                x = generate(_random_config(fmt, dist, seed), n, i)
                # n_trace_max = 0: stream, only the totals are needed
                trace = run_summation(x, fmt, n_trace_max=0)
                total += 1
                if trace.subnormal_count:
                    skipped += 1
                    continue
                c_sum = exact_c_sum(np.abs(x.astype(np.float64)), fmt.unit_roundoff)
                if not check_domination(trace, c_sum):
                    violations += 1
        report.add(
            f"domination-{fmt.name}",
            violations == 0,
            f"{total} trace(s), {violations} violation(s), {skipped} skipped (subnormal)",
        )


def _det_graphs(row: SweepRow) -> float:
    if row.det_variant == "graphs":
        return row.det_bound
    return row.det_bound * math.sqrt(row.n)


def observe_grid(report: ValidationReport, name: str, workers: int = 1, seed: int = 123) -> List[SweepRow]:
    """Run one preset grid and record its checks and observations."""
    cfg = preset_config(name, workers=workers, seed=seed)
    rows = [r for r in run_sweep(cfg) if not math.isnan(r.true_rel_err)]
    if not rows:
        report.add(f"{name}", False, "every point overflowed or failed")
        return rows

    below = [r.n for r in rows if r.martingale_bound < r.true_rel_err]
    report.add(
        f"{name}-martingale",
        not below,
        f"martingale bound >= true error at {len(rows) - len(below)} of {len(rows)} point(s)",
    )
    for col in ("martingale_bound", "azuma_bound"):
        lo, hi = gap_range(rows, col)
        report.add(
            f"{name}-{col.split('_')[0]}-gap",
            True,
            f"log10({col}) - log10(true) ranges over [{lo:.2f}, {hi:.2f}]",
            kind="observation",
        )
    det_gaps = [orders_of_magnitude(_det_graphs(r), r.azuma_bound) for r in rows]
    report.add(
        f"{name}-azuma-vs-det",
        True,
        f"azuma is {min(det_gaps):.2f} to {max(det_gaps):.2f} orders of magnitude below det (graphs)",
        kind="observation",
    )

    azuma_below = [r.n for r in rows if r.azuma_bound < r.true_rel_err]
    report.add(
        f"{name}-azuma-below-true",
        True,
        f"azuma bound below the true error at {len(azuma_below)} point(s)"
        + (f", first at n = {azuma_below[0]}" if azuma_below else ""),
        kind="observation",
    )
    if cfg.precision == "half" and cfg.distribution == "normal":
        last = rows[-1]
        mart_under_one = sum(r.martingale_bound < 1 for r in rows)
        report.add(
            f"{name}-magnitudes",
            True,
            f"martingale < 1 at {mart_under_one} of {len(rows)} point(s); at n = {last.n}: "
            f"det {last.det_bound:.3g}, azuma {last.azuma_bound:.3g}",
            kind="observation",
        )
    return rows


def run_validation(
    exhaustive_n: int = 8,
    traces: int = 1000,
    vectors: int = 1000,
    envelope_traces: int = 100,
    grids: Sequence[str] = ("half-normal", "half-uniform"),
    seed: int = 123,
    workers: int = 1,
    domination_lengths: Iterable[int] = DOMINATION_LENGTHS,
) -> ValidationReport:
    """
    Run the full suite.

    Parameters
    ----------
    exhaustive_n : int
        Vector length of the exhaustive check (1..12); 0 skips it.
    traces : int
        Random traces per (format, length) for the domination check.
    vectors : int
        Random vectors for the recurrence check.
    envelope_traces : int
        Retained traces per format for the envelope and identity checks.
    grids : sequence of preset names
        Sweep grids to run for observations; empty skips them.

    Returns
    -------
    ValidationReport
        ``report.passed`` is False if any check failed.
    """
    report = ValidationReport()
    if exhaustive_n:
        run_exhaustive(report, exhaustive_n, workers)
    if vectors:
        run_recurrence(report, vectors, seed)
    if envelope_traces:
        run_envelopes(report, envelope_traces, seed)
    if traces:
        run_domination(report, traces, seed, domination_lengths)
    for name in grids:
        observe_grid(report, name, workers, seed)
    return report


