"""Exact numbers used throughout the package.

Finite values are ``fractions.Fraction``. The symbolic value minus infinity is
``NEG_INF`` (a float), which absorbs under addition with any Fraction and
compares below every finite value.
"""
import math
from decimal import Decimal, InvalidOperation, localcontext
from fractions import Fraction

NEG_INF = float("-inf")
NEG_INF_TOKEN = "neg_inf"

def is_finite(value):
    return value != NEG_INF

def to_fraction(value):
    """
    Parse an exact rational from an int, a Fraction, or a decimal / "num/den" string.

    Parameters
    ----------
    value : int | str | Fraction
        Input number. Floats are rejected because they are not exact.

    Returns
    -------
    Fraction
    """
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                return Fraction(text)
            return Fraction(Decimal(text))
        except (ValueError, ZeroDivisionError, InvalidOperation):
            raise ValueError(f"not an exact number: {value!r}")
    raise ValueError(f"not an exact number: {value!r}")

def to_ext_value(value):
    """Parse a value that may also be the token ``neg_inf``."""
    if isinstance(value, str) and value.strip() == NEG_INF_TOKEN:
        return NEG_INF
    if isinstance(value, float) and value == NEG_INF:
        return NEG_INF
    return to_fraction(value)

def is_terminating(value):
    den = Fraction(value).denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1

def format_number(value):
    """
    Format an exact number losslessly.

    Terminating rationals become decimal strings ("1.5", "-2"), others "num/den",
    minus infinity becomes "neg_inf".
    """
    if value == NEG_INF:
        return NEG_INF_TOKEN
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    if is_terminating(value):
        with localcontext() as ctx:
            ctx.prec = 200
            return format(Decimal(value.numerator) / Decimal(value.denominator), "f")
    return f"{value.numerator}/{value.denominator}"

def format_vector(vector):
    return {key: format_number(val) for key, val in vector.items()}

def on_lattice(prices, epsilon, origin=None):
    """True if every price lies on origin + epsilon * Z."""
    epsilon = Fraction(epsilon)
    for key, price in prices.items():
        base = origin[key] if origin else 0
        if ((price - base) / epsilon).denominator != 1:
            return False
    return True

def rational_sqrt(value, max_denominator=10 ** 6):
    """Rational approximation of a square root, used for step sizes."""
    return Fraction(math.sqrt(Fraction(value))).limit_denominator(max_denominator)
