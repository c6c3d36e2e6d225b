"""
sumbound_core.io
----------------
Reading vector files and reading/writing sweep CSV tables.

Vector files
------------
One decimal number per line, UTF-8, ``#`` starts a comment (whole-line or
trailing). Each number is parsed *exactly* (``0.1`` is one tenth) and then
rounded once into the target format; the count of values that changed is
reported so the CLI can disclose it.

Sweep CSV
---------
- First line: ``# sumbound <version>``.
- Then a header row with the columns of ``experiments.COLUMNS`` and one row
  per (n, trial) point.
- Floats are written with ``repr`` (shortest round-trip decimal), so reading
  a file back gives bit-identical values.
- ``flags`` is a ';'-joined list.

Errors you might see and how to fix
-----------------------------------
- InvalidInputError: a line is not a finite number, or a CSV lacks columns
  -> check the file; sweep CSVs must come from ``sumbound sweep``.
- EmptyInputError: the vector file has no numbers.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np
import pandas as pd

from .errors import EmptyInputError, FormatOverflowError, InvalidInputError
from .experiments import COLUMNS, SweepRow
from .precision import FloatFormat, round_rational, to_fraction
from .version import __version__

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

_INT_COLUMNS = ("n", "trial", "seed", "time_c_path_ns", "time_m_path_ns")
_STR_COLUMNS = ("precision", "distribution", "det_variant", "flags")
_FLOAT_COLUMNS = tuple(c for c in COLUMNS if c not in _INT_COLUMNS + _STR_COLUMNS)


def csv_header_comment() -> str:
    return f"# sumbound {__version__}"


# ------------------------
# Vector files
# ------------------------
@dataclass(frozen=True)
class VectorFile:
    """
    Summands read from a file, already rounded into ``format``.

    ``rounded`` counts the entries whose decimal value was not exactly
    representable and therefore changed on ingestion.
    """

    values: np.ndarray
    format: FloatFormat
    rounded: int
    path: str

    @property
    def n(self) -> int:
        return int(self.values.size)


def read_vector_file(path: PathLike, fmt: FloatFormat) -> VectorFile:
    """
    Read a vector file and round every entry once into ``fmt``.

    Parameters
    ----------
    path : str | Path
    fmt : FloatFormat

    Returns
    -------
    VectorFile

    Raises
    ------
    InvalidInputError
        Unreadable file, or an entry that is not a finite decimal number.
    EmptyInputError
        No numbers in the file.
    FormatOverflowError
        An entry is too large for ``fmt``; ``err.step`` is its position.
    """
    path = Path(path)
    try:
        df = pd.read_csv(
            path, header=None, names=["value"], comment="#", dtype=str,
            keep_default_na=False, na_filter=False, skip_blank_lines=True, encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"{path} contains no numbers") from None
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise InvalidInputError(f"Cannot read {path}: {exc}") from exc

    # "nan", "NA" etc. stay text so to_fraction rejects them
    texts = [s.strip() for s in df["value"].tolist() if s.strip()]
    if not texts:
        raise EmptyInputError(f"{path} contains no numbers")

    out = np.empty(len(texts), dtype=fmt.dtype)
    rounded = 0
    for i, text in enumerate(texts):
        q = to_fraction(text)
        try:
            r = round_rational(q, fmt)
        except FormatOverflowError as exc:
            raise FormatOverflowError(f"Entry {i + 1} ({text}) overflows {fmt.name} precision", step=i + 1) from exc
        if r != q:
            rounded += 1
        out[i] = float(r)

    if rounded:
        warnings.warn(f"{rounded} of {len(texts)} value(s) were rounded into {fmt.name} precision on input.")
    log.debug("read %d values from %s (%d rounded)", len(texts), path, rounded)
    return VectorFile(values=out, format=fmt, rounded=rounded, path=str(path))


# ------------------------
# Sweep CSV
# ------------------------
def _frame_for_csv(rows: Union[pd.DataFrame, Iterable[SweepRow]], timings: bool) -> pd.DataFrame:
    if isinstance(rows, pd.DataFrame):
        df = rows.copy()
    else:
        df = pd.DataFrame([r.to_record() for r in rows], columns=list(COLUMNS))
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise InvalidInputError(f"Sweep table lacks columns: {', '.join(missing)}")
    df = df[list(COLUMNS)]
    if not timings:
        df["time_c_path_ns"] = 0
        df["time_m_path_ns"] = 0
    for col in _FLOAT_COLUMNS:
        df[col] = [repr(float(v)) for v in df[col]]
    df["flags"] = df["flags"].fillna("")
    return df


def write_sweep_csv(rows: Union[pd.DataFrame, Iterable[SweepRow]], out_path: PathLike, timings: bool = True) -> Path:
    """
    Write sweep rows (or a frame from ``rows_to_frame``) to CSV.

    With ``timings=False`` both time columns are written as 0, making the
    file a pure function of the configuration and the build version.

    Returns
    -------
    Path
        Where the file was written (parent folders are created).
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    df = _frame_for_csv(rows, timings)
    with out_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(csv_header_comment() + "\n")
        df.to_csv(fh, index=False, lineterminator="\n")
    log.info("wrote %d row(s) to %s", len(df), out_path)
    return out_path


def read_sweep_csv(path: PathLike) -> pd.DataFrame:
    """
    Read a sweep CSV back into a DataFrame with typed columns.

    Raises
    ------
    InvalidInputError
        Missing/unreadable file or missing columns.
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise InvalidInputError(f"{path} is empty; expected a header row") from None
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise InvalidInputError(f"Cannot read {path}: {exc}") from exc

    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise InvalidInputError(f"{path} is not a sweep CSV (missing: {', '.join(missing)})")
    try:
        for col in _INT_COLUMNS:
            df[col] = df[col].astype("int64")
        for col in _FLOAT_COLUMNS:
            df[col] = [float(v) for v in df[col]]
    except ValueError as exc:
        raise InvalidInputError(f"{path} has a malformed value: {exc}") from exc
    return df[list(COLUMNS)]


def read_sweep_rows(path: PathLike) -> List[SweepRow]:
    """``read_sweep_csv`` as a list of SweepRow (no attached reports)."""
    return [SweepRow.from_record(rec) for rec in read_sweep_csv(path).to_dict("records")]
