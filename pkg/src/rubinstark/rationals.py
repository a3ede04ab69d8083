"""Scalar layer: exact rational numbers.

Uses gmpy2.mpq when available (markedly faster convolution products on
group rings of order ~24), plain fractions.Fraction otherwise.  Everything
above this module spells ``Q(a)`` / ``Q(a, b)`` and never touches the
concrete type.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as Q  # type: ignore[import-not-found]

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    Q = Fraction
    _HAVE_GMPY2 = False

ZERO = Q(0)
ONE = Q(1)

RationalLike = (int, Fraction, type(Q(0)))


def is_rational(x) -> bool:
    return isinstance(x, RationalLike)


def as_int(q):
    """q as a Python int; raises ValueError if q is not integral."""
    if isinstance(q, int):
        return q
    if q.denominator != 1:
        raise ValueError(f"not an integer: {q}")
    return int(q.numerator)


def qstr(q) -> str:
    """Canonical 'p' or 'p/q' form used in files and reports."""
    q = Q(q)
    n, d = q.numerator, q.denominator
    return str(n) if d == 1 else f"{n}/{d}"


def qparse(s: str):
    s = s.strip()
    if "/" in s:
        n, d = s.split("/", 1)
        return Q(int(n), int(d))
    return Q(int(s))
