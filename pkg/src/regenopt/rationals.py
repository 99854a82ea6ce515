"""Exact rational helpers.

All model quantities (lengths, costs, deviations, distances, objectives) are
``fractions.Fraction`` values so that every comparison in the solvers is
exact.  Files store rationals as JSON integers when integral and as
``"p/q"`` strings otherwise.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

from .errors import ParseError


def as_rational(value, where: str = "value") -> Fraction:
    """Coerce a JSON scalar (int, string ``"p/q"``/decimal, float) to Fraction.

    Floats go through their shortest decimal repr so that e.g. ``0.8``
    means 4/5, not the binary float it parses to.
    """
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a number, got a boolean")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ParseError(f"{where}: non-finite number")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}: not a rational: {value!r}") from exc
    raise ParseError(f"{where}: expected a number, got {type(value).__name__}")


def rational_to_json(value: Fraction):
    """Inverse of :func:`as_rational` for the canonical file form."""
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def common_scale(values: Iterable[Fraction]) -> int:
    """Least common multiple of the denominators, i.e. the integer scaling
    factor under which every value becomes an exact integer."""
    scale = 1
    for v in values:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    return scale


def scaled_int(value: Fraction, scale: int) -> int:
    num = value.numerator * scale
    if num % value.denominator != 0:
        raise ValueError(f"scale {scale} does not clear denominator of {value}")
    return num // value.denominator
