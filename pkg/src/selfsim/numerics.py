"""Exact rationals and outward-rounded enclosures.

Rationals are plain :class:`fractions.Fraction` objects (always reduced,
positive denominator).  Enclosures are closed intervals with ``gmpy2.mpfr``
endpoints; every operation rounds the lower endpoint down and the upper
endpoint up, so the exact image of the operands is always contained in the
result.
"""

from __future__ import annotations

import os
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

import gmpy2
from gmpy2 import mpfr, mpz

DEFAULT_PRECISION = int(os.environ.get("SELFSIM_PRECISION", "64"))


def default_precision() -> int:
    """Current default significand size in bits (``SELFSIM_PRECISION`` overrides)."""
    return int(os.environ.get("SELFSIM_PRECISION", DEFAULT_PRECISION))


@lru_cache(maxsize=None)
def _contexts(prec: int):
    common = dict(
        precision=prec,
        emax=gmpy2.get_emax_max(),
        emin=gmpy2.get_emin_min(),
        subnormalize=False,
        trap_underflow=False,
        trap_overflow=False,
        trap_inexact=False,
        trap_invalid=False,
        trap_divzero=False,
    )
    down = gmpy2.context(round=gmpy2.RoundDown, **common)
    up = gmpy2.context(round=gmpy2.RoundUp, **common)
    return down, up


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------

def as_rational(x) -> Fraction:
    """Convert ``x`` to an exact :class:`Fraction`.

    Accepts ints, Fractions, floats (exact binary value), ``mpfr``/``mpq``
    and strings such as ``"1/3"``, ``"-2"`` or ``"0.45"``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        try:
            return Fraction(s)
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in rational {x!r}") from None
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, type(mpfr(0))):
        if not gmpy2.is_finite(x):
            raise ValueError(f"non-finite value {x!r}")
        p, q = x.as_integer_ratio()
        return Fraction(int(p), int(q))
    if isinstance(x, type(gmpy2.mpq(0))):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, type(mpz(0))):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def format_rational(q: Fraction) -> str:
    """Serialize as ``"p/q"`` (or ``"p"`` for integers)."""
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s: str) -> Fraction:
    return as_rational(str(s))


# ---------------------------------------------------------------------------
# Enclosures
# ---------------------------------------------------------------------------

def _round_rational(q: Fraction, ctx) -> mpfr:
    return ctx.div(mpz(q.numerator), mpz(q.denominator))


def _exact_mpfr(x) -> Fraction | None:
    if gmpy2.is_finite(x):
        p, q = x.as_integer_ratio()
        return Fraction(int(p), int(q))
    return None


class Enclosure:
    """A closed interval ``[lo, hi]`` with outward-rounded ``mpfr`` endpoints.

    Enclosures are immutable.  Arithmetic with ints and Fractions promotes
    the exact operand only at the moment of the operation.
    """

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo, hi=None, prec: int | None = None):
        prec = default_precision() if prec is None else int(prec)
        if hi is None:
            hi = lo
        down, up = _contexts(prec)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "lo", _to_mpfr(lo, down))
        object.__setattr__(self, "hi", _to_mpfr(hi, up))
        if self.lo > self.hi or gmpy2.is_nan(self.lo) or gmpy2.is_nan(self.hi):
            raise ValueError(f"invalid enclosure [{lo}, {hi}]")

    def __setattr__(self, name, value):
        raise AttributeError("Enclosure is immutable")

    @classmethod
    def _raw(cls, lo: mpfr, hi: mpfr, prec: int) -> "Enclosure":
        obj = object.__new__(cls)
        object.__setattr__(obj, "lo", lo)
        object.__setattr__(obj, "hi", hi)
        object.__setattr__(obj, "prec", prec)
        return obj

    # -- conversions -------------------------------------------------------
    def with_precision(self, prec: int) -> "Enclosure":
        """Re-round the endpoints outward to ``prec`` bits."""
        down, up = _contexts(prec)
        return Enclosure._raw(down.add(self.lo, 0), up.add(self.hi, 0), prec)

    @property
    def width(self) -> mpfr:
        _, up = _contexts(self.prec)
        return up.sub(self.hi, self.lo)

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    def lo_rational(self) -> Fraction | None:
        return _exact_mpfr(self.lo)

    def hi_rational(self) -> Fraction | None:
        return _exact_mpfr(self.hi)

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        if isinstance(x, Enclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        q = as_rational(x)
        lo, hi = self.lo_rational(), self.hi_rational()
        return (lo is None or lo <= q) and (hi is None or q <= hi)

    def contains(self, x) -> bool:
        return x in self

    def disjoint_from(self, lo, hi) -> bool:
        """True if this enclosure misses the exact closed interval ``[lo, hi]``."""
        lo, hi = as_rational(lo), as_rational(hi)
        mylo, myhi = self.lo_rational(), self.hi_rational()
        if myhi is not None and myhi < lo:
            return True
        if mylo is not None and mylo > hi:
            return True
        return False

    def certainly_positive(self) -> bool:
        return self.lo > 0

    def certainly_negative(self) -> bool:
        return self.hi < 0

    def __repr__(self):
        return f"Enclosure({self.lo}, {self.hi})"

    def __eq__(self, other):
        if not isinstance(other, Enclosure):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        return enc_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return enc_add(self, enc_neg(_promote(other, self.prec)))

    def __rsub__(self, other):
        return enc_add(_promote(other, self.prec), enc_neg(self))

    def __neg__(self):
        return enc_neg(self)

    def __mul__(self, other):
        return enc_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return enc_div(self, other)

    def __rtruediv__(self, other):
        return enc_div(_promote(other, self.prec), self)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return enc_neg(self)
        _, up = _contexts(self.prec)
        return Enclosure._raw(mpfr(0), max(up.sub(0, self.lo), self.hi), self.prec)

    def log(self):
        return enc_log(self)

    def to_json(self) -> dict:
        return {"lo": _decimal_str(self.lo, ROUND_FLOOR), "hi": _decimal_str(self.hi, ROUND_CEILING)}

    @classmethod
    def from_json(cls, d: dict, prec: int | None = None) -> "Enclosure":
        return cls(Fraction(Decimal(d["lo"])), Fraction(Decimal(d["hi"])), prec)


def _to_mpfr(x, ctx) -> mpfr:
    if isinstance(x, type(mpfr(0))):
        return ctx.add(x, 0)
    if isinstance(x, float):
        return ctx.add(mpfr(x), 0)
    return _round_rational(as_rational(x), ctx)


def _decimal_str(x: mpfr, rounding) -> str:
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    q = _exact_mpfr(x)
    with localcontext() as ctx:
        ctx.prec = 30
        ctx.rounding = rounding
        d = Decimal(q.numerator) / Decimal(q.denominator)
    return str(d)


def _promote(x, prec: int) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    return Enclosure(x, x, prec)


def _prec2(x: Enclosure, y: Enclosure) -> int:
    return max(x.prec, y.prec)


def enc(x, prec: int | None = None) -> Enclosure:
    """Promote an exact value (or pass through an Enclosure)."""
    if isinstance(x, Enclosure):
        return x
    return Enclosure(x, x, prec)


def enc_add(x, y) -> Enclosure:
    if not isinstance(x, Enclosure):
        x, y = y, x
    y = _promote(y, x.prec)
    prec = _prec2(x, y)
    down, up = _contexts(prec)
    return Enclosure._raw(down.add(x.lo, y.lo), up.add(x.hi, y.hi), prec)


def enc_neg(x: Enclosure) -> Enclosure:
    # negation through the context so the result keeps x's precision
    down, up = _contexts(x.prec)
    return Enclosure._raw(down.sub(0, x.hi), up.sub(0, x.lo), x.prec)


def _mul_round(ctx, a, b):
    if a == 0 or b == 0:
        return mpfr(0)
    return ctx.mul(a, b)


def enc_mul(x, y) -> Enclosure:
    if not isinstance(x, Enclosure):
        x, y = y, x
    y = _promote(y, x.prec)
    prec = _prec2(x, y)
    down, up = _contexts(prec)
    pairs = ((x.lo, y.lo), (x.lo, y.hi), (x.hi, y.lo), (x.hi, y.hi))
    lo = min(_mul_round(down, a, b) for a, b in pairs)
    hi = max(_mul_round(up, a, b) for a, b in pairs)
    return Enclosure._raw(lo, hi, prec)


def enc_div(x, y) -> Enclosure:
    prec = max(getattr(x, "prec", 0), getattr(y, "prec", 0)) or default_precision()
    x, y = _promote(x, prec), _promote(y, prec)
    if y.lo <= 0 <= y.hi:
        raise ZeroDivisionError("divisor enclosure contains zero")
    down, up = _contexts(prec)
    inv = Enclosure._raw(down.div(1, y.hi), up.div(1, y.lo), prec)
    return enc_mul(x, inv)


def enc_log(x) -> Enclosure:
    """Natural logarithm; the lower endpoint must be positive."""
    x = _promote(x, getattr(x, "prec", default_precision()))
    if not x.lo > 0:
        raise ValueError("log of an enclosure with nonpositive lower endpoint")
    down, up = _contexts(x.prec)
    return Enclosure._raw(down.log(x.lo), up.log(x.hi), x.prec)


def enc_exp(x) -> Enclosure:
    x = _promote(x, getattr(x, "prec", default_precision()))
    down, up = _contexts(x.prec)
    return Enclosure._raw(down.exp(x.lo), up.exp(x.hi), x.prec)


def enc_sqrt(x) -> Enclosure:
    x = _promote(x, getattr(x, "prec", default_precision()))
    if x.lo < 0:
        raise ValueError("sqrt of an enclosure with negative lower endpoint")
    down, up = _contexts(x.prec)
    return Enclosure._raw(down.sqrt(x.lo), up.sqrt(x.hi), x.prec)


def enc_pow(base, exponent) -> Enclosure:
    """``base ** exponent`` for a positive base enclosure and real exponent."""
    return enc_exp(enc_mul(enc_log(base), exponent))


def enc_affine(a, b, x) -> Enclosure:
    """Enclosure of ``{a*t + b}`` over all ``a``, ``b``, ``t`` in the operands."""
    prec = max(getattr(v, "prec", 0) for v in (a, b, x)) or default_precision()
    return enc_add(enc_mul(_promote(a, prec), _promote(x, prec)), _promote(b, prec))


def enc_floor(x: Enclosure) -> int | None:
    """Common floor of all points of ``x``, or None when ``x`` straddles an integer."""
    lo, hi = gmpy2.floor(x.lo), gmpy2.floor(x.hi)
    if lo == hi and gmpy2.is_finite(lo):
        return int(lo)
    return None


def ulp(x: mpfr, prec: int) -> mpfr:
    """Spacing of ``prec``-bit floats at the magnitude of ``x``."""
    if x == 0:
        return mpfr(0)
    _, e = gmpy2.frexp(mpfr(x))
    return gmpy2.mul_2exp(mpfr(1), int(e) - prec)


Number = Fraction | Enclosure


def is_exact(x) -> bool:
    return not isinstance(x, Enclosure)


def to_float(x) -> float:
    if isinstance(x, Enclosure):
        return x.mid
    return float(x)


def serialize_number(x) -> str | dict:
    if isinstance(x, Enclosure):
        return x.to_json()
    return format_rational(x)


def parse_number(x, prec: int | None = None):
    if isinstance(x, dict):
        return Enclosure.from_json(x, prec)
    return parse_rational(x)
