"""
sumbound_core.precision
-----------------------
Target floating-point formats and correctly rounded addition.

Audience
--------
Anyone who needs to know *exactly* what a half or single precision addition
does, without owning hardware that supports half precision.

The standard model
------------------
Every addition in a target format obeys

    fl(a + b) = (a + b)(1 + delta),   |delta| <= u,

where ``u = 2**(-t)`` is the unit roundoff and ``t`` the significand precision
(implicit bit included). The guarantee holds for round-to-nearest-even as
long as the result is a normal number; subnormal results may lose more, which
is why the summation trace flags them instead of hiding them.

Formats
-------
=======  ===  ========  ========  ===========
name     t    e_min     e_max     u
=======  ===  ========  ========  ===========
half     11   -14       15        2**-11
single   24   -126      127       2**-24
double   53   -1022     1023      2**-53
=======  ===  ========  ========  ===========

How additions are carried out
-----------------------------
- half: the two operands are added in binary64, where the sum of two half
  values is always exact, and the exact sum is rounded once to half
  (ties-to-even). No double rounding can occur.
- single: native binary32 addition (IEEE round-to-nearest-even).
- double: native binary64 addition.

``round_rational`` is the exact reference for all three: it rounds an
arbitrary rational into a format using integer arithmetic only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import ConfigError, FormatOverflowError, InvalidInputError

# Anything we accept as a "real number" on input.
Real = Union[int, float, Fraction, str, np.floating]


@dataclass(frozen=True)
class FloatFormat:
    """
    An IEEE-754 style binary format.

    Parameters
    ----------
    name : {"half", "single", "double"}
    precision_bits : int
        Significand precision ``t`` including the implicit bit.
    exponent_min, exponent_max : int
        Exponent range of normal numbers, ``2**exponent_min`` is the smallest
        normal magnitude.
    dtype : numpy scalar type
        The numpy type that stores values of this format.
    """

    name: str
    precision_bits: int
    exponent_min: int
    exponent_max: int
    dtype: type = field(compare=False, repr=False)

    @property
    def unit_roundoff(self) -> Fraction:
        """Exact unit roundoff ``u = 2**(-t)``."""
        return Fraction(1, 2 ** self.precision_bits)

    @property
    def machine_epsilon(self) -> Fraction:
        """Distance from 1 to the next larger representable number (``2u``)."""
        return 2 * self.unit_roundoff

    @property
    def smallest_normal(self) -> Fraction:
        return Fraction(2) ** self.exponent_min

    @property
    def smallest_subnormal(self) -> Fraction:
        return Fraction(2) ** (self.exponent_min - self.precision_bits + 1)

    @property
    def largest_finite(self) -> Fraction:
        t = self.precision_bits
        return (2 - Fraction(2) ** (1 - t)) * Fraction(2) ** self.exponent_max

    def __str__(self) -> str:
        return self.name


HALF = FloatFormat("half", 11, -14, 15, np.float16)
SINGLE = FloatFormat("single", 24, -126, 127, np.float32)
DOUBLE = FloatFormat("double", 53, -1022, 1023, np.float64)

FORMATS = {f.name: f for f in (HALF, SINGLE, DOUBLE)}


def get_format(name: Union[str, FloatFormat]) -> FloatFormat:
    """
    Look up a format by name ("half", "single", "double").

    Raises
    ------
    ConfigError
        Unknown name.
    """
    if isinstance(name, FloatFormat):
        return name
    key = str(name).strip().lower()
    if key not in FORMATS:
        raise ConfigError(f"Unknown precision '{name}'. Choose one of: {', '.join(FORMATS)}.")
    return FORMATS[key]


def unit_roundoff(fmt: FloatFormat) -> Fraction:
    """
    Return the unit roundoff of ``fmt`` exactly.

    >>> unit_roundoff(HALF) == Fraction(1, 2048)
    True
    """
    return fmt.unit_roundoff


# ------------------------
# Exact rounding
# ------------------------
def _floor_log2(a: Fraction) -> int:
    """Largest integer e with 2**e <= a, for a > 0."""
    num, den = a.numerator, a.denominator
    e = num.bit_length() - den.bit_length()
    # Guess is either exact or one too large.
    if e >= 0:
        if num < den << e:
            e -= 1
    elif num << -e < den:
        e -= 1
    return e


def round_rational(q: Real, fmt: FloatFormat) -> Fraction:
    """
    Round a rational number to the nearest value of ``fmt`` (ties to even).

    Works entirely in integer arithmetic, so the result is the correctly
    rounded value even for inputs that no hardware type can hold. Subnormal
    results are produced with the format's fixed quantum.

    Parameters
    ----------
    q : int | float | Fraction | str
        The exact real to round. Strings are parsed as exact decimals
        (``"0.1"`` means one tenth, not the double nearest to it).
    fmt : FloatFormat

    Returns
    -------
    Fraction
        The rounded value, exactly.

    Raises
    ------
    FormatOverflowError
        The rounded magnitude exceeds the largest finite value.
    InvalidInputError
        ``q`` is NaN or infinite.
    """
    q = to_fraction(q)
    if q == 0:
        return Fraction(0)

    sign = -1 if q < 0 else 1
    a = abs(q)
    e = max(_floor_log2(a), fmt.exponent_min)
    quantum_exp = e - (fmt.precision_bits - 1)
    quantum = Fraction(2) ** quantum_exp

    # Fraction.__round__ rounds half to even.
    m = round(a / quantum)
    result = m * quantum
    if result > fmt.largest_finite:
        raise FormatOverflowError(f"{float(q):.6g} overflows {fmt.name} precision")
    return sign * result


def to_fraction(value: Real) -> Fraction:
    """
    Convert a number (or decimal string) to an exact Fraction.

    Raises
    ------
    InvalidInputError
        NaN, infinity, or an unparsable string.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"Not a finite number: {value!r}") from exc
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    v = float(value)
    if not math.isfinite(v):
        raise InvalidInputError(f"Non-finite value {v!r} is not allowed")
    return Fraction(v)


def is_representable(value: Real, fmt: FloatFormat) -> bool:
    """True if ``value`` is exactly a finite value of ``fmt``."""
    try:
        q = to_fraction(value)
        return round_rational(q, fmt) == q
    except (FormatOverflowError, InvalidInputError):
        return False


def is_subnormal(value: Real, fmt: FloatFormat) -> bool:
    """True if ``0 < |value| < 2**exponent_min``."""
    q = abs(to_fraction(value))
    return 0 < q < fmt.smallest_normal


# ------------------------
# Values in a target format
# ------------------------
@dataclass(frozen=True)
class TargetValue:
    """
    A finite real number that is exactly representable in ``format``.

    Construction validates both properties; use ``TargetValue.from_real`` to
    round an arbitrary number into the format first.
    """

    value: float
    format: FloatFormat

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise InvalidInputError(f"{self.format.name} value must be finite, got {v!r}")
        if not is_representable(v, self.format):
            raise InvalidInputError(f"{v!r} is not exactly representable in {self.format.name} precision")
        object.__setattr__(self, "value", v)

    @classmethod
    def from_real(cls, value: Real, fmt: FloatFormat) -> "TargetValue":
        """Round ``value`` once into ``fmt`` (ties to even) and wrap it."""
        return cls(float(round_rational(value, fmt)), fmt)

    def as_fraction(self) -> Fraction:
        return Fraction(self.value)

    @property
    def is_subnormal(self) -> bool:
        return is_subnormal(self.value, self.format)

    def __float__(self) -> float:
        return self.value


def round_add(a: TargetValue, b: TargetValue) -> TargetValue:
    """
    Correctly rounded addition ``fl(a + b)`` in the shared format of a and b.

    Returns
    -------
    TargetValue
        Round-to-nearest-even rounding of the exact sum.

    Raises
    ------
    InvalidInputError
        The operands belong to different formats.
    FormatOverflowError
        The rounded sum is infinite in the target format.

    Examples
    --------
    >>> round_add(TargetValue(2048.0, HALF), TargetValue(1.0, HALF)).value
    2048.0
    """
    if a.format != b.format:
        raise InvalidInputError(f"Cannot add {a.format.name} and {b.format.name} values")
    fmt = a.format
    s = round_add_float(a.value, b.value, fmt)
    if not math.isfinite(s):
        raise FormatOverflowError(f"{a.value!r} + {b.value!r} overflows {fmt.name} precision")
    return TargetValue(s, fmt)


def round_add_float(a: float, b: float, fmt: FloatFormat) -> float:
    """
    ``round_add`` on plain floats that already hold values of ``fmt``.

    Returns inf on overflow instead of raising; callers check.
    """
    if fmt.dtype is np.float64:
        return a + b
    with np.errstate(over="ignore"):
        if fmt.dtype is np.float32:
            return float(np.float32(a) + np.float32(b))
        # The binary64 sum of two half values is exact; round once.
        return float(fmt.dtype(a + b))


# ------------------------
# Array helpers
# ------------------------
def to_target_array(values: Iterable[Real] | np.ndarray, fmt: FloatFormat) -> np.ndarray:
    """
    Round a sequence of reals once into ``fmt`` and return a numpy array.

    Float inputs are rounded from binary64 by numpy (correctly rounded);
    strings and Fractions go through ``round_rational``.

    Raises
    ------
    InvalidInputError
        Any value is NaN/infinite.
    FormatOverflowError
        Any value overflows the format.
    """
    if isinstance(values, np.ndarray) and values.dtype.kind == "f":
        arr = values
    else:
        vals = list(values)
        if any(isinstance(v, (str, Fraction)) for v in vals):
            arr = np.array([float(round_rational(v, fmt)) for v in vals], dtype=np.float64)
        else:
            arr = np.asarray([float(v) for v in vals], dtype=np.float64)

    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("Input contains NaN or infinite values")
    with np.errstate(over="ignore"):
        out = arr.astype(fmt.dtype)
    if not np.all(np.isfinite(out)):
        step = int(np.argmax(~np.isfinite(out))) + 1
        raise FormatOverflowError(f"Input value {step} overflows {fmt.name} precision", step=step)
    return out


def subnormal_mask(arr: np.ndarray, fmt: FloatFormat) -> np.ndarray:
    """Boolean mask of nonzero entries below the smallest normal magnitude."""
    tiny = float(fmt.smallest_normal)
    a = np.abs(arr.astype(np.float64))
    return (a != 0.0) & (a < tiny)
