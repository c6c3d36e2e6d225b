"""
sumbound_core.config
--------------------
Configuration objects (dataclasses) and tiny helpers.

Why this file exists
--------------------
We keep *all* experiment inputs in one place so the rest of the code can
receive a single ``ExperimentConfig`` object instead of many separate
parameters. This also makes sweeps reproducible: the config (plus the build
version) fully determines the CSV a sweep writes.

Design choices
--------------
- Use one small, explicit dataclass (easy to read and test).
- Use the standard defaults (seed 123, failure probability 1e-16).
- Validate everything in one place (``ExperimentConfig.validate``) and raise
  ``ConfigError`` with a message that says how to fix the input.
- Create output folders early to avoid "No such file or directory" errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Tuple

from .bounds import DEFAULT_FAILURE_PROB, check_variant
from .errors import ConfigError
from .precision import FloatFormat, get_format

DISTRIBUTIONS = ("normal", "uniform")


@dataclass
class ExperimentConfig:
    """
    All inputs needed for one sweep (or one Monte-Carlo estimate).

    Data
    ----
    precision : {"half", "single", "double"}
        Target format the summands live in and the sum is computed in.
    distribution : {"normal", "uniform"}
        normal(0, 1) or uniform[0, 1), drawn in binary64 and rounded once.

    Grid
    ----
    n_start, n_end, n_step : int
        Vector lengths n_start, n_start + n_step, ..., n_end. The grid starts
        at the step size or later, and the step must divide the span.

    Bounds
    ------
    failure_prob : float
        delta in (0, 1) for the probabilistic bounds. Default 1e-16.
    det_variant : {"theorem", "graphs"}
        "graphs" multiplies the deterministic bound by sqrt(n).
    exact : bool
        Accumulate in exact rationals instead of binary64 (slow, for checks).

    Reproducibility
    ---------------
    seed : int
        Base seed. Each (n, trial) point derives its own stream from it.
    trials_per_point : int

    Other
    -----
    chunk_size : int
        Elements generated and summed per streaming step.
    n_trace_max : int
        Longest vector whose per-step trace is kept in memory.
    workers : int
        Processes used by sweeps; 1 runs in-process.
    outputs_folder : Path
    """

    # --- data ---
    precision: str = "single"
    distribution: str = "normal"

    # --- grid ---
    n_start: int = 10_000
    n_end: int = 1_000_000
    n_step: int = 10_000

    # --- bounds ---
    failure_prob: float = DEFAULT_FAILURE_PROB
    det_variant: str = "theorem"
    exact: bool = False

    # --- reproducibility ---
    seed: int = 123
    trials_per_point: int = 1

    # --- other ---
    chunk_size: int = 1 << 16
    n_trace_max: int = 100_000
    workers: int = 1
    outputs_folder: Path = field(default_factory=lambda: Path("outputs"))

    @property
    def format(self) -> FloatFormat:
        return get_format(self.precision)

    @property
    def n_grid(self) -> range:
        """The n values of the sweep, in increasing order."""
        return range(self.n_start, self.n_end + 1, self.n_step)

    @property
    def sweep_csv_path(self) -> Path:
        """Default sweep CSV inside ``outputs_folder``, named by precision and distribution."""
        return Path(self.outputs_folder) / f"{self.precision}_{self.distribution}.csv"

    def validate(self) -> "ExperimentConfig":
        """
        Check every field; return ``self`` so calls can be chained.

        Raises
        ------
        ConfigError
            With a message naming the offending field.
        """
        get_format(self.precision)
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        check_variant(self.det_variant)

        if min(self.n_start, self.n_end, self.n_step) < 1:
            raise ConfigError("n_start, n_end and n_step must be positive integers.")
        if self.n_start > self.n_end:
            raise ConfigError(f"Empty grid: n_start = {self.n_start} is larger than n_end = {self.n_end}.")
        if self.n_start < self.n_step:
            raise ConfigError(f"The grid must start at the step size or later (n_start >= n_step = {self.n_step}).")
        if (self.n_end - self.n_start) % self.n_step:
            raise ConfigError(f"n_step = {self.n_step} must divide n_end - n_start = {self.n_end - self.n_start}.")

        if not 0.0 < float(self.failure_prob) < 1.0:
            raise ConfigError(f"failure_prob must lie in (0, 1), got {self.failure_prob}.")
        if self.seed < 0:
            raise ConfigError("seed must be an unsigned integer.")
        for name in ("trials_per_point", "chunk_size", "n_trace_max", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1.")
        return self


def ensure_folders(cfg: ExperimentConfig) -> None:
    """
    Create the output folder if it does not exist.

    This function has **no return**; it modifies the filesystem only.
    """
    Path(cfg.outputs_folder).mkdir(parents=True, exist_ok=True)


def parse_n_range(text: str) -> Tuple[int, int, int]:
    """
    Parse the grid grammar ``start:end:step`` (or a single ``n``).

    >>> parse_n_range("10000:1000000:10000")
    (10000, 1000000, 10000)
    >>> parse_n_range("100")
    (100, 100, 100)
    """
    parts = [p.strip() for p in str(text).split(":")]
    try:
        nums = [int(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"--n expects start:end:step or a single integer, got {text!r}") from exc
    if len(nums) == 1:
        return nums[0], nums[0], nums[0]
    if len(nums) != 3:
        raise ConfigError(f"--n expects start:end:step or a single integer, got {text!r}")
    return nums[0], nums[1], nums[2]


# Standard grids, plus one point at n = 10^7.
PRESETS: Dict[str, dict] = {
    "single-normal": dict(precision="single", distribution="normal", n_start=10_000, n_end=1_000_000, n_step=10_000),
    "half-normal": dict(precision="half", distribution="normal", n_start=100, n_end=10_000, n_step=100),
    "single-uniform": dict(precision="single", distribution="uniform", n_start=10_000, n_end=1_000_000, n_step=10_000),
    "half-uniform": dict(precision="half", distribution="uniform", n_start=100, n_end=10_000, n_step=100),
    "single-normal-extended": dict(
        precision="single", distribution="normal", n_start=10_000_000, n_end=10_000_000, n_step=10_000_000
    ),
}


def preset_config(name: str, **overrides) -> ExperimentConfig:
    """
    A validated ExperimentConfig for one of the named grids in ``PRESETS``.

    Any keyword overrides the preset (e.g. ``trials_per_point=5``).
    """
    if name not in PRESETS:
        raise ConfigError(f"Unknown preset {name!r}. Choose one of: {', '.join(PRESETS)}.")
    return build_config(**{**PRESETS[name], **overrides})


def build_config(
    precision: str = "single",
    distribution: str = "normal",
    n_start: int = 10_000,
    n_end: int = 1_000_000,
    n_step: int = 10_000,
    failure_prob: float = DEFAULT_FAILURE_PROB,
    seed: int = 123,
    trials_per_point: int = 1,
    det_variant: str = "theorem",
    create_folders: bool = False,
    **extra,
) -> ExperimentConfig:
    """
    Convenience constructor with safe defaults.

    - Coerces numeric types (CLI values arrive as strings or floats).
    - Validates the result.
    - Optionally creates the output folder.

    Returns
    -------
    ExperimentConfig
        Ready-to-use configuration object.

    Raises
    ------
    ConfigError
        Any invalid field.
    """
    try:
        cfg = ExperimentConfig(
            precision=str(precision).lower(),
            distribution=str(distribution).lower(),
            n_start=int(n_start),
            n_end=int(n_end),
            n_step=int(n_step),
            failure_prob=float(failure_prob),
            seed=int(seed),
            trials_per_point=int(trials_per_point),
            det_variant=str(det_variant).lower(),
            **extra,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid configuration value: {exc}") from exc
    cfg.validate()
    if create_folders:
        ensure_folders(cfg)
    return cfg


def with_grid(cfg: ExperimentConfig, n: int) -> ExperimentConfig:
    """Copy of ``cfg`` restricted to the single point ``n``."""
    return replace(cfg, n_start=n, n_end=n, n_step=n)
