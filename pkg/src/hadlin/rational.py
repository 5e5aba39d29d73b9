"""Exact rational arithmetic helpers.

All numeric results in this package are exact rationals.  gmpy2.mpq is used
as the working type (it is several times faster than fractions.Fraction and
interoperates with it); fractions.Fraction is accepted everywhere on input.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is a hard dependency, but keep a fallback
    Rat = Fraction

ZERO = Rat(0)
ONE = Rat(1)


def rat(value, denom=None):
    """Coerce ints, Fractions, mpqs or 'p/q' strings to the working rational type."""
    if denom is not None:
        return Rat(value, denom)
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            p, q = s.split("/", 1)
            return Rat(int(p), int(q))
        return Rat(int(s))
    return Rat(value)


def format_rat(x) -> str:
    """Render as 'p/q' (or 'p' for integers), matching the file formats."""
    x = Rat(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def to_fraction(x) -> Fraction:
    x = Rat(x)
    return Fraction(int(x.numerator), int(x.denominator))


def ceil_decimals(x, places: int) -> str:
    """Round a rational up (towards +inf) to the given number of decimals."""
    x = Rat(x)
    scale = 10 ** places
    num = x.numerator * scale
    den = x.denominator
    q = -((-num) // den)  # ceiling division
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // scale}.{q % scale:0{places}d}"
