"""
sumbound_core.experiments
-------------------------
Seeded data generation, n-sweeps and Monte-Carlo failure rates.

What a sweep point does
-----------------------
For one (n, trial) pair the summands are generated chunk by chunk, so memory
stays O(chunk_size) whatever n is. Two timed passes follow:

1) c-path: sequential summation in the target format, exact reference sum,
   and the c_k accumulators (deterministic and Azuma bounds).
2) m-path: the same summands regenerated from the same seed and fed to the
   m_k recurrence (martingale bound).

The two accumulators are joined and turned into a ``BoundReport``; the row
adds the wall time of each pass.

Random numbers
--------------
Every (seed, n, trial_index) point owns a PCG64 stream seeded with
``SeedSequence([seed, n, trial_index])``. Values are drawn in binary64 and
rounded once into the target format, so the stored summands are exact
values of that format. Uniform draws that round up to 1 are clamped to the
largest value below 1.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.stats import beta

from .bounds import BOUND_IDS, BoundAccumulators, BoundReport, build_report
from .config import ExperimentConfig
from .errors import ConfigError, FormatOverflowError, SumboundError
from .trace import SequentialSummer

log = logging.getLogger(__name__)

# CSV column order of a sweep table.
COLUMNS = (
    "n", "trial", "precision", "distribution", "delta", "seed", "det_variant",
    "true_rel_err", "det_bound", "azuma_bound", "martingale_bound",
    "z_n", "sum_abs_x", "time_c_path_ns", "time_m_path_ns", "flags",
)

FLAG_SEPARATOR = ";"


# ------------------------
# Data generation
# ------------------------
def _rng(seed: int, n: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(n), int(trial_index)]))


def iter_chunks(config: ExperimentConfig, n: int, trial_index: int = 0) -> Iterator[np.ndarray]:
    """
    Yield the n summands of one point in chunks of ``config.chunk_size``.

    Each chunk is a numpy array of the target dtype.
    """
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    fmt = config.format
    rng = _rng(config.seed, n, trial_index)
    below_one = np.nextafter(fmt.dtype(1), fmt.dtype(0))
    done = 0
    while done < n:
        size = min(config.chunk_size, n - done)
        if config.distribution == "normal":
            chunk = rng.standard_normal(size).astype(fmt.dtype)
        else:
            chunk = np.minimum(rng.random(size).astype(fmt.dtype), below_one)
        done += size
        yield chunk


def generate(config: ExperimentConfig, n: int, trial_index: int = 0) -> np.ndarray:
    """
    All n summands of one point as a single array of the target dtype.

    Deterministic in (seed, n, trial_index, distribution, precision) and
    identical to concatenating ``iter_chunks``.

    Examples
    --------
    >>> cfg = build_config("half", "uniform", 100, 100, 100)
    >>> x = generate(cfg, 100)
    >>> bool(((x >= 0) & (x < 1)).all())
    True
    """
    return np.concatenate(list(iter_chunks(config, n, trial_index)))


# ------------------------
# Sweep rows
# ------------------------
@dataclass(frozen=True)
class SweepRow:
    """
    One CSV row: a BoundReport flattened to floats, plus pass timings.

    The bound columns hold NaN when the point overflowed; they hold absolute
    quantities when ``flags`` contains "zero_sum".
    """

    n: int
    trial: int
    precision: str
    distribution: str
    delta: float
    seed: int
    det_variant: str
    true_rel_err: float
    det_bound: float
    azuma_bound: float
    martingale_bound: float
    z_n: float
    sum_abs_x: float
    time_c_path_ns: int = 0
    time_m_path_ns: int = 0
    flags: Tuple[str, ...] = ()
    report: Optional[BoundReport] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_report(cls, report: BoundReport, trial: int, seed: int, time_c: int = 0, time_m: int = 0) -> "SweepRow":
        return cls(
            n=report.n,
            trial=trial,
            precision=report.precision,
            distribution=report.distribution,
            delta=report.failure_prob,
            seed=seed,
            det_variant=report.det_variant,
            true_rel_err=float(report.true_rel_err),
            det_bound=float(report.det_bound),
            azuma_bound=float(report.azuma_bound),
            martingale_bound=float(report.martingale_bound),
            z_n=float(report.z_n_exact),
            sum_abs_x=float(report.sum_abs_x),
            time_c_path_ns=int(time_c),
            time_m_path_ns=int(time_m),
            flags=tuple(report.flags),
            report=report,
        )

    def bound(self, bound_id: str) -> float:
        """Value of "det", "azuma" or "martingale"."""
        return float(getattr(self, f"{bound_id}_bound"))

    def to_record(self) -> dict:
        """Plain dict in ``COLUMNS`` order, flags joined with ';'."""
        rec = {c: getattr(self, c) for c in COLUMNS}
        rec["flags"] = FLAG_SEPARATOR.join(self.flags)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "SweepRow":
        flags = rec.get("flags")
        if not isinstance(flags, str) or not flags:
            flags = ""
        return cls(
            n=int(rec["n"]),
            trial=int(rec["trial"]),
            precision=str(rec["precision"]),
            distribution=str(rec["distribution"]),
            delta=float(rec["delta"]),
            seed=int(rec["seed"]),
            det_variant=str(rec["det_variant"]),
            true_rel_err=float(rec["true_rel_err"]),
            det_bound=float(rec["det_bound"]),
            azuma_bound=float(rec["azuma_bound"]),
            martingale_bound=float(rec["martingale_bound"]),
            z_n=float(rec["z_n"]),
            sum_abs_x=float(rec["sum_abs_x"]),
            time_c_path_ns=int(rec["time_c_path_ns"]),
            time_m_path_ns=int(rec["time_m_path_ns"]),
            flags=tuple(f for f in flags.split(FLAG_SEPARATOR) if f),
        )


def _failed_row(config: ExperimentConfig, n: int, trial: int, flag: str) -> SweepRow:
    nan = math.nan
    return SweepRow(
        n=n, trial=trial, precision=config.precision, distribution=config.distribution,
        delta=float(config.failure_prob), seed=config.seed, det_variant=config.det_variant,
        true_rel_err=nan, det_bound=nan, azuma_bound=nan, martingale_bound=nan,
        z_n=nan, sum_abs_x=nan, flags=(flag,),
    )


# ------------------------
# One point
# ------------------------
def _c_pass(config: ExperimentConfig, n: int, trial_index: int):
    fmt = config.format
    summer = SequentialSummer(fmt)
    acc = BoundAccumulators.start(fmt.unit_roundoff, exact=config.exact, paths=("c",))
    for chunk in iter_chunks(config, n, trial_index):
        summer.feed(chunk)
        acc = acc.update_many(np.abs(chunk.astype(np.float64)))
    return summer.to_trace(), acc


def _m_pass(config: ExperimentConfig, n: int, trial_index: int) -> BoundAccumulators:
    acc = BoundAccumulators.start(config.format.unit_roundoff, exact=config.exact, paths=("m",))
    for chunk in iter_chunks(config, n, trial_index):
        acc = acc.update_many(np.abs(chunk.astype(np.float64)))
    return acc


def run_point(config: ExperimentConfig, n: int, trial_index: int = 0) -> SweepRow:
    """
    Sum one generated vector and evaluate all three bounds on it.

    Parameters
    ----------
    config : ExperimentConfig
    n : int
        Vector length (need not lie on the config grid).
    trial_index : int
        Selects an independent random stream for the same n.

    Returns
    -------
    SweepRow
        ``flags`` holds "zero_sum" (absolute bounds reported), "subnormal"
        and/or "overflow" (bounds are NaN).

    Raises
    ------
    ConfigError
        n < 1.
    """
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    try:
        t0 = time.perf_counter_ns()
        trace, c_acc = _c_pass(config, n, trial_index)
        t1 = time.perf_counter_ns()
        m_acc = _m_pass(config, n, trial_index)
        t2 = time.perf_counter_ns()
    except FormatOverflowError as exc:
        log.warning("n = %d trial %d: %s", n, trial_index, exc)
        return _failed_row(config, n, trial_index, "overflow")

    acc = BoundAccumulators.combine(c_acc, m_acc)
    report = build_report(trace, acc, config.failure_prob, config.det_variant, config.distribution)
    return SweepRow.from_report(report, trial_index, config.seed, t1 - t0, t2 - t1)


def _run_job(args) -> SweepRow:
    config, n, trial = args
    try:
        return run_point(config, n, trial)
    except SumboundError as exc:
        log.error("n = %d trial %d failed: %s", n, trial, exc)
        return _failed_row(config, n, trial, "error")


def _map_jobs(config: ExperimentConfig, jobs: list) -> List:
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(job) for job in jobs]


def run_sweep(config: ExperimentConfig) -> List[SweepRow]:
    """
    ``run_point`` over the config grid and trials.

    Rows come back ordered by (n, trial) even when ``config.workers > 1``.
    A failing point becomes a flagged row; the sweep never aborts.

    Raises
    ------
    ConfigError
        The config itself is invalid (e.g. empty grid).
    """
    config.validate()
    jobs = [(config, n, t) for n in config.n_grid for t in range(config.trials_per_point)]
    log.info(
        "sweep: %s/%s, %d points x %d trials",
        config.precision, config.distribution, len(config.n_grid), config.trials_per_point,
    )
    rows = _map_jobs(config, jobs)
    for row in rows:
        log.info(
            "n = %d trial %d: true %.3g det %.3g azuma %.3g martingale %.3g %s",
            row.n, row.trial, row.true_rel_err, row.det_bound, row.azuma_bound,
            row.martingale_bound, ",".join(row.flags),
        )
    return rows


def rows_to_frame(rows: List[SweepRow]) -> pd.DataFrame:
    """Sweep rows as a DataFrame with the CSV columns, in row order."""
    return pd.DataFrame([r.to_record() for r in rows], columns=list(COLUMNS))


# ------------------------
# Orders of magnitude
# ------------------------
def orders_of_magnitude(bound: float, true: float) -> float:
    """
    log10(bound) - log10(true).

    +inf when ``true`` is 0 and the bound is positive; -inf when the bound
    is 0 and ``true`` is positive; NaN when both are 0 or either is NaN.
    """
    b, t = float(bound), float(true)
    if math.isnan(b) or math.isnan(t) or (b == 0 and t == 0):
        return math.nan
    if t == 0:
        return math.inf
    if b == 0:
        return -math.inf
    return math.log10(b) - math.log10(t)


def gap_range(rows: List[SweepRow], upper: str, lower: str = "true_rel_err") -> Tuple[float, float]:
    """
    Smallest and largest orders_of_magnitude(upper, lower) over the rows.

    ``upper`` and ``lower`` are column names (e.g. "martingale_bound").
    Rows whose gap is NaN are skipped; (nan, nan) if none remain.
    """
    gaps = [orders_of_magnitude(getattr(r, upper), getattr(r, lower)) for r in rows]
    gaps = [g for g in gaps if not math.isnan(g)]
    if not gaps:
        return math.nan, math.nan
    return min(gaps), max(gaps)


# ------------------------
# Monte-Carlo failure rates
# ------------------------
def clopper_pearson_upper(violations: int, trials: int, confidence: float = 0.99) -> float:
    """
    One-sided Clopper-Pearson upper confidence bound on a binomial rate.

    >>> round(clopper_pearson_upper(0, 10_000), 6)
    0.00046
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if not 0 <= violations <= trials:
        raise ConfigError("violations must lie in 0..trials")
    if violations == trials:
        return 1.0
    return float(beta.ppf(confidence, violations + 1, trials - violations))


@dataclass(frozen=True)
class FailureRateReport:
    """
    How often a probabilistic bound failed over independent trials.

    ``empirical_rate`` is violations / trials as an exact fraction;
    ``upper_confidence`` its one-sided Clopper-Pearson upper bound at
    ``confidence``. Trials that overflowed are left out of ``trials`` and
    counted in ``skipped``.
    """

    bound_id: str
    failure_prob: float
    trials: int
    violations: int
    empirical_rate: Fraction
    upper_confidence: float
    confidence: float
    n: int
    precision: str
    distribution: str
    seed: int
    skipped: int = 0

    @property
    def within_budget(self) -> bool:
        """True when the upper confidence bound does not exceed failure_prob."""
        return self.upper_confidence <= self.failure_prob


def _bound_violated(args) -> Optional[bool]:
    config, n, trial, bound_id = args
    try:
        trace, c_acc = _c_pass(config, n, trial)
        m_acc = _m_pass(config, n, trial)
    except FormatOverflowError:
        return None
    acc = BoundAccumulators.combine(c_acc, m_acc)
    report = build_report(trace, acc, config.failure_prob, config.det_variant, config.distribution)
    return bool(report.true_rel_err > report.bounds[bound_id])


def estimate_failure_rate(
    config: ExperimentConfig,
    bound_id: str,
    n: int,
    trials: Optional[int] = None,
    confidence: float = 0.99,
) -> FailureRateReport:
    """
    Count the trials where the true error exceeds a probabilistic bound.

    Parameters
    ----------
    config : ExperimentConfig
        Supplies precision, distribution, seed and failure_prob. Use an
        exercisable failure_prob (0.5, 0.1); at 1e-16 no violation is
        expected at any feasible trial count.
    bound_id : {"azuma", "martingale"}
    n : int
    trials : int, optional
        Defaults to ``config.trials_per_point``.

    Returns
    -------
    FailureRateReport
    """
    if bound_id not in BOUND_IDS:
        raise ConfigError(f"bound_id must be one of {BOUND_IDS}, got {bound_id!r}")
    trials = int(trials if trials is not None else config.trials_per_point)
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")

    jobs = [(config, n, t, bound_id) for t in range(trials)]
    if config.workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_bound_violated, jobs, chunksize=max(1, trials // (4 * config.workers))))
    else:
        outcomes = [_bound_violated(job) for job in jobs]

    counted = [o for o in outcomes if o is not None]
    skipped = len(outcomes) - len(counted)
    if not counted:
        raise FormatOverflowError(f"Every trial overflowed {config.precision} precision at n = {n}")
    violations = sum(counted)
    report = FailureRateReport(
        bound_id=bound_id,
        failure_prob=float(config.failure_prob),
        trials=len(counted),
        violations=violations,
        empirical_rate=Fraction(violations, len(counted)),
        upper_confidence=clopper_pearson_upper(violations, len(counted), confidence),
        confidence=confidence,
        n=n,
        precision=config.precision,
        distribution=config.distribution,
        seed=config.seed,
        skipped=skipped,
    )
    log.info(
        "%s bound: %d/%d violations at delta = %g (upper %.3g)",
        bound_id, violations, len(counted), report.failure_prob, report.upper_confidence,
    )
    return report
