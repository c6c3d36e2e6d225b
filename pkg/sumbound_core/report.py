"""
sumbound_core.report
--------------------
Human-readable summaries and static SVG plots.

What this file provides
-----------------------
- format_report(report, rounded=0) -> str
    Multi-line block printed by ``sumbound analyze``.
- plain_language_summary(report) -> str
    One paragraph a non-specialist can read.
- sweep_summary(df) -> str
    One paragraph about a whole sweep table.
- plot_sweep(df) -> Figure, plot_sweep_svg(df, out_path) -> Path
    Log-log plot of the three bounds and the true relative error against n.

Notes
-----
- Plots are built on a bare ``matplotlib.figure.Figure`` (no pyplot, no GUI
  backend) and saved as SVG with a fixed hash salt and no date, so the same
  table always produces the same file.
- Points with several trials are averaged per n before plotting.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Union

import matplotlib
import pandas as pd
from matplotlib.figure import Figure

from .bounds import BoundReport
from .errors import EmptyInputError, InvalidInputError

# column -> (legend label, line style)
SERIES = {
    "true_rel_err": ("true relative error", "-"),
    "det_bound": ("deterministic bound", "--"),
    "azuma_bound": ("Azuma bound", "-."),
    "martingale_bound": ("martingale bound", ":"),
}


LABEL_WIDTH = 21


def _fmt(value) -> str:
    v = float(value)
    if math.isnan(v):
        return "n/a"
    return f"{v:.6e}"


def format_report(report: BoundReport, rounded: int = 0) -> str:
    """
    Text block with every field of a BoundReport, one per line.

    ``rounded`` is the number of input values changed on ingestion; it is
    printed when nonzero.
    """
    kind = "absolute" if report.absolute else "relative"
    pairs = [
        ("n", report.n),
        ("precision", report.precision),
        ("failure prob", f"{report.failure_prob:g}"),
        ("det variant", report.det_variant),
        ("exact sum", _fmt(report.z_n_exact)),
        ("computed sum", _fmt(report.z_hat_n)),
        ("sum |x|", _fmt(report.sum_abs_x)),
        (f"true {kind} error", _fmt(report.true_rel_err)),
        ("deterministic", _fmt(report.det_bound)),
        ("azuma", _fmt(report.azuma_bound)),
        ("martingale", _fmt(report.martingale_bound)),
        ("flags", ", ".join(report.flags) or "-"),
    ]
    if rounded:
        pairs.append(("note", f"{rounded} input value(s) rounded into {report.precision} on input"))
    if report.absolute:
        pairs.append(("note", "exact sum is 0: errors and bounds are absolute"))
    return "\n".join(f"{label:<{LABEL_WIDTH}}{value}" for label, value in pairs)


def plain_language_summary(report: BoundReport) -> str:
    """
    Short paragraph: how big the error was and how far each bound is above it.

    Method
    ------
    - State the true error.
    - Express each bound as orders of magnitude above (or below) it.
    - Mention the flags in words.
    """
    kind = "absolute" if report.absolute else "relative"
    true = float(report.true_rel_err)
    parts = [
        f"Summing {report.n:,} values one at a time in {report.precision} precision gave a "
        f"{kind} error of {true:.3g}."
    ]
    for name, value in (("deterministic", report.det_bound), ("Azuma", report.azuma_bound),
                        ("martingale", report.martingale_bound)):
        b = float(value)
        if true > 0 and b > 0:
            gap = math.log10(b) - math.log10(true)
            where = "above" if gap >= 0 else "below"
            parts.append(f"The {name} bound ({b:.3g}) is {abs(gap):.1f} orders of magnitude {where} it.")
        else:
            parts.append(f"The {name} bound is {b:.3g}.")
    if "subnormal" in report.flags:
        parts.append("Some partial sums were subnormal, where the usual rounding guarantee is weaker.")
    if "zero_sum" in report.flags:
        parts.append("The exact sum is zero, so absolute rather than relative quantities are shown.")
    return " ".join(parts)


def sweep_summary(df: pd.DataFrame) -> str:
    """
    One paragraph about a sweep table: size, grid and how often each bound held.
    """
    if df is None or len(df) == 0:
        return "No sweep points were computed."
    ok = df[~df["true_rel_err"].isna()]
    text = (
        f"{len(df)} point(s) from n = {int(df['n'].min()):,} to n = {int(df['n'].max()):,} "
        f"({', '.join(sorted(set(df['precision'])))}, {', '.join(sorted(set(df['distribution'])))})."
    )
    for col, (label, _) in SERIES.items():
        if col == "true_rel_err" or len(ok) == 0:
            continue
        held = int((ok[col] >= ok["true_rel_err"]).sum())
        text += f" The {label} held at {held} of {len(ok)} point(s)."
    failed = len(df) - len(ok)
    if failed:
        text += f" {failed} point(s) overflowed or failed."
    return text


# ------------------------
# Plots
# ------------------------
def plot_sweep(df: pd.DataFrame, title: Optional[str] = None) -> Figure:
    """
    Log-log figure of the bounds and the true relative error against n.

    Raises
    ------
    EmptyInputError
        ``df`` has no rows.
    InvalidInputError
        ``df`` lacks the n column or every series column.
    """
    if df is None or len(df) == 0:
        raise EmptyInputError("Nothing to plot: the sweep table has no rows.")
    present = [c for c in SERIES if c in df.columns]
    if "n" not in df.columns or not present:
        raise InvalidInputError("Sweep table needs an 'n' column and at least one bound column.")

    means = df.groupby("n", sort=True)[present].mean()
    # log axes cannot show zeros
    means = means.where(means > 0)

    fig = Figure(figsize=(7, 4.5))
    ax = fig.add_subplot(1, 1, 1)
    for col in present:
        label, style = SERIES[col]
        ax.plot(means.index.to_numpy(), means[col].to_numpy(), linestyle=style, linewidth=1.8, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("relative error")
    if title is None and {"precision", "distribution"} <= set(df.columns):
        title = f"{', '.join(sorted(set(df['precision'])))} precision, {', '.join(sorted(set(df['distribution'])))} data"
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", linestyle="--", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    return fig


def plot_sweep_svg(df: pd.DataFrame, out_path: Union[str, Path], title: Optional[str] = None) -> Path:
    """
    ``plot_sweep`` written to ``out_path`` as SVG (parents created).

    Returns
    -------
    Path
    """
    out_path = Path(out_path)
    fig = plot_sweep(df, title)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "sumbound", "svg.fonttype": "path"}):
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    return out_path
