"""
tests/test_config.py

Purpose
-------
Sanity checks for build_config defaults, grid validation and presets.
Nothing here runs a summation.
"""

from pathlib import Path

import pytest

from sumbound_core.config import PRESETS, build_config, ensure_folders, parse_n_range, preset_config, with_grid
from sumbound_core.errors import ConfigError
from sumbound_core.precision import SINGLE


def test_build_config_defaults():
    cfg = build_config()
    assert cfg.format is SINGLE
    assert cfg.seed == 123
    assert cfg.failure_prob == 1e-16
    assert cfg.trials_per_point == 1
    assert cfg.det_variant == "theorem"
    assert cfg.exact is False
    assert len(cfg.n_grid) == 100


def test_build_config_coerces_cli_strings():
    cfg = build_config(precision="HALF", distribution="Uniform", n_start="100", n_end="10000", n_step="100")
    assert cfg.precision == "half"
    assert cfg.distribution == "uniform"
    assert cfg.n_grid[0] == 100 and cfg.n_grid[-1] == 10_000


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_start=200, n_end=100, n_step=100),     # empty grid
        dict(n_start=50, n_end=1050, n_step=100),     # starts below the step
        dict(n_start=100, n_end=1050, n_step=100),    # step does not divide the span
        dict(failure_prob=0.0),
        dict(failure_prob=1.0),
        dict(precision="quad"),
        dict(distribution="cauchy"),
        dict(det_variant="loose"),
        dict(trials_per_point=0),
        dict(seed=-1),
    ],
)
def test_build_config_rejects(kwargs):
    with pytest.raises(ConfigError):
        build_config(**kwargs)


def test_parse_n_range():
    assert parse_n_range("10000:1000000:10000") == (10_000, 1_000_000, 10_000)
    assert parse_n_range(" 7 ") == (7, 7, 7)
    for bad in ("1:2", "a:b:c", "1:2:3:4", ""):
        with pytest.raises(ConfigError):
            parse_n_range(bad)


def test_presets_have_standard_sizes():
    assert len(preset_config("single-normal").n_grid) == 100
    assert len(preset_config("half-normal").n_grid) == 100
    assert list(preset_config("single-normal-extended").n_grid) == [10_000_000]
    assert preset_config("half-uniform", trials_per_point=3).trials_per_point == 3
    assert set(PRESETS) >= {"single-normal", "half-normal", "single-uniform", "half-uniform"}
    with pytest.raises(ConfigError):
        preset_config("nope")


def test_with_grid_and_folders(tmp_path: Path):
    cfg = build_config(outputs_folder=tmp_path / "out" / "nested")
    assert list(with_grid(cfg, 42).n_grid) == [42]
    ensure_folders(cfg)
    assert (tmp_path / "out" / "nested").is_dir()


def test_sweep_csv_path_lives_in_outputs_folder(tmp_path: Path):
    cfg = build_config("half", "uniform", 100, 100, 100, outputs_folder=tmp_path / "runs")
    assert cfg.sweep_csv_path == tmp_path / "runs" / "half_uniform.csv"
