"""Number rendering for the reporting boundary (CSV cells, tables)."""

from __future__ import annotations

from fractions import Fraction

__all__ = ["decimal_str", "round2"]


def decimal_str(value: Fraction | int | float, sig: int = 12) -> str:
    """Render a number as a decimal string with `sig` significant digits.

    Integers render without a decimal point.  All internal arithmetic is
    exact; this is only for files and display.
    """
    if isinstance(value, Fraction) and value.denominator == 1:
        return str(value.numerator)
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.{sig}g}"


def round2(value: Fraction | float) -> float:
    """Two-decimal display rounding used in result tables."""
    return round(float(value), 2)
