#!/usr/bin/env python3
"""
cli.py - Command-line interface for sumbound

Purpose
-------
Sum vectors in half/single/double precision, compare the actual rounding
error with three forward-error bounds, run n-sweeps, validate the library
against exact oracles, and plot sweep tables.

Usage examples
--------------
# Bounds for your own data (one number per line)
python cli.py analyze data.txt --precision single --delta 1e-16

# The single precision / normal grid, written to CSV
python cli.py sweep --precision single --dist normal --n 10000:1000000:10000 \
  --out outputs/single_normal.csv

# Oracle suite (exit code 3 on any violation)
python cli.py validate --exhaustive-n 8

# How often does the martingale bound fail at delta = 0.1?
python cli.py failure-rate --delta 0.1 --n 100 --trials 10000

# Log-log plot of a sweep CSV
python cli.py plot outputs/single_normal.csv --out outputs/single_normal.svg

Exit codes
----------
0 success, 1 usage error, 2 input error, 3 validation failure.
"""

from __future__ import annotations

import logging
import sys
import warnings
from pathlib import Path
from typing import Optional, Tuple

import click

from sumbound_core.bounds import BOUND_IDS, DEFAULT_FAILURE_PROB, DET_VARIANTS, report_for_values
from sumbound_core.config import PRESETS, build_config, ensure_folders, parse_n_range, preset_config
from sumbound_core.errors import ConfigError, SumboundError
from sumbound_core.experiments import SweepRow, estimate_failure_rate, rows_to_frame, run_sweep
from sumbound_core.io import read_sweep_csv, read_vector_file, write_sweep_csv
from sumbound_core.precision import FORMATS, get_format
from sumbound_core.report import format_report, plain_language_summary, plot_sweep_svg, sweep_summary
from sumbound_core.validation import run_validation
from sumbound_core.version import __version__

EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_VALIDATION = 3


class InputError(click.ClickException):
    """Unreadable, malformed or empty input (exit code 2)."""

    exit_code = EXIT_INPUT


class ValidationFailed(click.ClickException):
    """A validation check found a violation (exit code 3)."""

    exit_code = EXIT_VALIDATION


class SumboundGroup(click.Group):
    """click group with sumbound's exit codes (usage errors exit with 1)."""

    def main(self, *args, **kwargs):
        kwargs.pop("standalone_mode", None)
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
            code = rv if isinstance(rv, int) else 0
        except click.UsageError as exc:
            exc.show()
            code = EXIT_USAGE
        except click.ClickException as exc:
            exc.show()
            code = exc.exit_code
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_USAGE
        sys.exit(code)


_precision = click.option(
    "--precision",
    type=click.Choice(sorted(FORMATS)),
    default="single",
    show_default=True,
    help="Target floating-point format.",
)
_delta = click.option(
    "--delta",
    "failure_prob",
    type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
    default=DEFAULT_FAILURE_PROB,
    show_default=True,
    help="Failure probability of the probabilistic bounds.",
)
_det_variant = click.option(
    "--det-variant",
    type=click.Choice(DET_VARIANTS),
    default="theorem",
    show_default=True,
    help="'graphs' multiplies the deterministic bound by sqrt(n).",
)
_exact = click.option("--exact", is_flag=True, help="Accumulate bound quantities in exact rationals (slow).")
_seed = click.option("--seed", type=click.IntRange(min=0), default=123, show_default=True, help="Base random seed.")
_workers = click.option(
    "--workers", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes."
)


def _config_or_usage(**kwargs):
    try:
        return build_config(**kwargs)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


@click.group(cls=SumboundGroup)
@click.version_option(__version__, prog_name="sumbound")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug detail.")
def main(verbose: int):
    """sumbound CLI. Type `python cli.py COMMAND --help` for options."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command("analyze")
@click.argument("input_file", type=click.Path(dir_okay=False))
@_precision
@_delta
@_det_variant
@_exact
@click.option("--out", "out_csv", type=click.Path(dir_okay=False), default=None, help="Also write a one-row CSV.")
def analyze_cmd(
    input_file: str,
    precision: str,
    failure_prob: float,
    det_variant: str,
    exact: bool,
    out_csv: Optional[str],
):
    """
    Bounds and true error for the vector in INPUT_FILE.

    \b
    INPUT_FILE: one decimal number per line, '#' starts a comment.
    Values are rounded once into --precision on input; the count is shown.
    """
    fmt = get_format(precision)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            vf = read_vector_file(input_file, fmt)
            report = report_for_values(vf.values, fmt, failure_prob, det_variant, exact=exact)
        except SumboundError as exc:
            raise InputError(str(exc)) from exc

    for w in caught:
        click.echo(f"WARNING: {w.message}", err=True)
    click.echo(format_report(report, rounded=vf.rounded))
    click.echo("")
    click.echo(plain_language_summary(report))

    if out_csv:
        path = write_sweep_csv([SweepRow.from_report(report, trial=0, seed=0)], out_csv, timings=False)
        click.echo(f"OK: wrote {Path(path).resolve()}")


@main.command("sweep")
@_precision
@click.option("--dist", "distribution", type=click.Choice(["normal", "uniform"]), default="normal", show_default=True)
@click.option("--n", "n_range", default=None, help="Grid start:end:step, or a single n.  [default: 10000:1000000:10000]")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None, help="A standard grid (excludes --n).")
@_delta
@_seed
@click.option("--trials", type=click.IntRange(min=1), default=1, show_default=True, help="Trials per grid point.")
@_det_variant
@_exact
@_workers
@click.option(
    "--out",
    "out_csv",
    type=click.Path(dir_okay=False),
    default=None,
    help="CSV path; folders are created if missing.  [default: OUTPUTS_FOLDER/<precision>_<distribution>.csv]",
)
@click.option(
    "--outputs-folder",
    type=click.Path(file_okay=False),
    default="outputs",
    show_default=True,
    help="Folder for the CSV when --out is not given.",
)
@click.option("--no-timings", is_flag=True, help="Write 0 in the time columns (byte-identical reruns).")
def sweep_cmd(
    precision: str,
    distribution: str,
    n_range: Optional[str],
    preset: Optional[str],
    failure_prob: float,
    seed: int,
    trials: int,
    det_variant: str,
    exact: bool,
    workers: int,
    out_csv: Optional[str],
    outputs_folder: str,
    no_timings: bool,
):
    """Run a sweep over n and write one CSV row per (n, trial)."""
    common = dict(
        failure_prob=failure_prob, seed=seed, trials_per_point=trials,
        det_variant=det_variant, exact=exact, workers=workers, outputs_folder=Path(outputs_folder),
    )
    if preset:
        if n_range:
            raise click.UsageError("--preset and --n cannot be combined.")
        try:
            cfg = preset_config(preset, **common)
        except ConfigError as exc:
            raise click.UsageError(str(exc)) from exc
    else:
        try:
            start, end, step = parse_n_range(n_range or "10000:1000000:10000")
        except ConfigError as exc:
            raise click.UsageError(str(exc)) from exc
        cfg = _config_or_usage(
            precision=precision, distribution=distribution, n_start=start, n_end=end, n_step=step, **common
        )

    rows = run_sweep(cfg)
    if out_csv is None:
        ensure_folders(cfg)
        out_csv = cfg.sweep_csv_path
    path = write_sweep_csv(rows, out_csv, timings=not no_timings)
    click.echo(f"OK: wrote {len(rows)} row(s) to {Path(path).resolve()}")
    click.echo(sweep_summary(rows_to_frame(rows)))


@main.command("validate")
@click.option(
    "--exhaustive-n", type=click.IntRange(0, 12), default=8, show_default=True,
    help="Vector length of the exhaustive check (0 skips it).",
)
@click.option("--traces", type=click.IntRange(min=0), default=1000, show_default=True,
              help="Random traces per format and length for the domination check.")
@click.option("--vectors", type=click.IntRange(min=0), default=1000, show_default=True,
              help="Random vectors for the recurrence check.")
@click.option("--envelope-traces", type=click.IntRange(min=0), default=100, show_default=True,
              help="Retained traces per format for the envelope checks.")
@click.option("--grid", "grids", multiple=True, type=click.Choice(sorted(PRESETS)),
              help="Preset grid to sweep for observations (repeatable).  [default: half-normal, half-uniform]")
@click.option("--no-grids", is_flag=True, help="Skip the sweep grids.")
@_seed
@_workers
def validate_cmd(
    exhaustive_n: int,
    traces: int,
    vectors: int,
    envelope_traces: int,
    grids: Tuple[str, ...],
    no_grids: bool,
    seed: int,
    workers: int,
):
    """Run the oracle suite; exit with 3 if any check fails."""
    if no_grids and grids:
        raise click.UsageError("--grid and --no-grids cannot be combined.")
    if no_grids:
        grids = ()
    elif not grids:
        grids = ("half-normal", "half-uniform")

    report = run_validation(
        exhaustive_n=exhaustive_n, traces=traces, vectors=vectors, envelope_traces=envelope_traces,
        grids=grids, seed=seed, workers=workers,
    )
    for r in report.results:
        status = "ok" if r.passed else "FAIL"
        if r.kind == "observation":
            status = "note"
        click.echo(f"[{status:>4}] {r.name}: {r.detail}")

    if not report.passed:
        raise ValidationFailed(f"{len(report.failures)} check(s) failed.")
    click.echo(f"OK: {len(report.checks)} check(s) passed, {len(report.observations)} observation(s).")


@main.command("failure-rate")
@_precision
@click.option("--dist", "distribution", type=click.Choice(["normal", "uniform"]), default="normal", show_default=True)
@click.option(
    "--delta", "failure_prob", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
    default=0.1, show_default=True, help="Failure probability to test.",
)
@click.option("--n", "n", type=click.IntRange(min=1), default=100, show_default=True, help="Vector length.")
@click.option("--trials", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--bound", "bound_ids", type=click.Choice(BOUND_IDS + ("both",)), default="both", show_default=True)
@_seed
@_det_variant
@_workers
@click.option("--strict", is_flag=True, help="Exit with 3 when the 99% upper bound exceeds --delta.")
def failure_rate_cmd(
    precision: str,
    distribution: str,
    failure_prob: float,
    n: int,
    trials: int,
    bound_ids: str,
    seed: int,
    det_variant: str,
    workers: int,
    strict: bool,
):
    """Monte-Carlo estimate of how often a probabilistic bound fails."""
    cfg = _config_or_usage(
        precision=precision, distribution=distribution, n_start=n, n_end=n, n_step=n,
        failure_prob=failure_prob, seed=seed, trials_per_point=trials,
        det_variant=det_variant, workers=workers,
    )
    ids = BOUND_IDS if bound_ids == "both" else (bound_ids,)
    over = []
    for bound_id in ids:
        try:
            res = estimate_failure_rate(cfg, bound_id, n, trials)
        except SumboundError as exc:
            raise InputError(str(exc)) from exc
        click.echo(
            f"{bound_id}: {res.violations}/{res.trials} violation(s), rate {float(res.empirical_rate):.4g}, "
            f"{res.confidence:.0%} upper bound {res.upper_confidence:.4g} (delta = {res.failure_prob:g})"
        )
        if not res.within_budget:
            over.append(bound_id)
    if strict and over:
        raise ValidationFailed(f"Upper confidence bound exceeds delta for: {', '.join(over)}")


@main.command("plot")
@click.argument("csv_file", type=click.Path(dir_okay=False))
@click.option("--out", "out_svg", type=click.Path(dir_okay=False), default=None,
              help="SVG path.  [default: CSV path with .svg]")
@click.option("--precision", type=click.Choice(sorted(FORMATS)), default=None, help="Only rows of this precision.")
@click.option("--dist", "distribution", type=click.Choice(["normal", "uniform"]), default=None,
              help="Only rows of this distribution.")
@click.option("--title", default=None, help="Plot title.")
def plot_cmd(
    csv_file: str,
    out_svg: Optional[str],
    precision: Optional[str],
    distribution: Optional[str],
    title: Optional[str],
):
    """Log-log SVG of the bounds and the true error against n."""
    try:
        df = read_sweep_csv(csv_file)
    except SumboundError as exc:
        raise InputError(str(exc)) from exc
    if precision:
        df = df[df["precision"] == precision]
    if distribution:
        df = df[df["distribution"] == distribution]
    if len(df) == 0:
        raise InputError(f"No rows to plot in {csv_file} (empty file or empty selection).")

    out = Path(out_svg) if out_svg else Path(csv_file).with_suffix(".svg")
    plot_sweep_svg(df, out, title)
    click.echo(f"OK: wrote {out.resolve()}")


if __name__ == "__main__":
    main()
