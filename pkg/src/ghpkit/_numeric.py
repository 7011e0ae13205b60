"""Numeric backends: exact rationals (``Fraction``) or 64-bit floats."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable

TAU = 1e-9

RATIONAL = "rational"
FLOAT = "float"
BACKENDS = (RATIONAL, FLOAT)


def to_number(x, backend: str):
    """Coerce ``x`` into the representation used by ``backend``."""
    if backend == RATIONAL:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, Rational):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, float):
            # floats are binary rationals; keep the exact value
            return Fraction(x)
        return Fraction(x)
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)


def infer_backend(values: Iterable) -> str:
    """Rational unless some entry is a float."""
    for v in values:
        if isinstance(v, float):
            return FLOAT
    return RATIONAL


def backend_of(x) -> str:
    return FLOAT if isinstance(x, float) else RATIONAL


def le(a, b, backend: str, slack: float = TAU) -> bool:
    """``a <= b``; floats get an absolute slack."""
    if backend == FLOAT:
        return a <= b + slack
    return a <= b


def eq(a, b, backend: str, slack: float = TAU) -> bool:
    if backend == FLOAT:
        return abs(a - b) <= slack
    return a == b


def zero(backend: str):
    return Fraction(0) if backend == RATIONAL else 0.0


def as_float(x) -> float:
    return float(x)


def fmt(x) -> str:
    """Stable text form: ``p/q`` for rationals, 12 significant digits for floats."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.12g}"
