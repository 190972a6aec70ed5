"""Outward-rounded interval arithmetic on MPFR floats.

Each endpoint is computed with MPFR in the appropriate rounding direction
(``RoundDown`` for lower ends, ``RoundUp`` for upper ends), so the true value
of every expression is enclosed.  Only monotone functions are provided, which
keeps endpoint evaluation exact in direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr, mpz

DEFAULT_PRECISION = 256


@lru_cache(maxsize=None)
def _ctx(prec: int, up: bool):
    return gmpy2.context(precision=prec, round=gmpy2.RoundUp if up else gmpy2.RoundDown)


def _zero(prec: int):
    return mpfr(0, prec)


def _round(x, prec: int, up: bool):
    """Directed rounding of an exact int or mpfr into ``prec`` bits."""
    return _ctx(prec, up).add(x if not isinstance(x, int) else mpz(x), _zero(prec))


def decimal_string(x, digits: int = 20, up: bool = False) -> str:
    """Directed decimal rendering: never above ``x`` when ``up`` is False."""
    q = Fraction(*x.as_integer_ratio())
    if q == 0:
        return "0"
    neg = q < 0
    a = -q if neg else q
    e10 = len(str(a.numerator)) - len(str(a.denominator))
    if Fraction(10) ** e10 > a:
        e10 -= 1
    scaled = a / Fraction(10) ** (e10 - digits + 1)
    # rounding a magnitude up raises a positive value but lowers a negative one
    mag_up = up != neg
    n = -((-scaled.numerator) // scaled.denominator) if mag_up else scaled.numerator // scaled.denominator
    s = str(n)
    if len(s) > digits:
        e10 += 1
        s = s[:digits]
    mant = s[0] + ("." + s[1:] if len(s) > 1 else "")
    return f"{'-' if neg else ''}{mant}e{e10:+d}"


@dataclass(frozen=True)
class IntervalReal:
    lo: object
    hi: object
    prec: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    # constructors --------------------------------------------------------

    @classmethod
    def from_int(cls, n: int, prec: int = DEFAULT_PRECISION) -> "IntervalReal":
        n = int(n)
        return cls(_round(n, prec, False), _round(n, prec, True), prec)

    @classmethod
    def from_fraction(cls, q, prec: int = DEFAULT_PRECISION) -> "IntervalReal":
        q = Fraction(q)
        num = cls.from_int(q.numerator, prec)
        return num / cls.from_int(q.denominator, prec)

    @classmethod
    def from_float(cls, x: float, prec: int = DEFAULT_PRECISION) -> "IntervalReal":
        """The exact binary value of ``x`` (doubles are exact in >= 53 bits)."""
        return cls.from_fraction(Fraction(x), prec)

    @classmethod
    def sqrt_of(cls, n, prec: int = DEFAULT_PRECISION) -> "IntervalReal":
        return cls.from_fraction(n, prec).sqrt()

    @classmethod
    def ln_int(cls, n: int, prec: int = DEFAULT_PRECISION) -> "IntervalReal":
        """``ln n`` for a positive big integer as ``ln(m) + s ln 2`` with
        ``n = m 2^s + r``, ``0 <= r < 2^s``, so ``m`` fits in ``prec`` bits."""
        n = int(n)
        if n < 1:
            raise ValueError(f"ln of non-positive integer {n}")
        shift = max(0, n.bit_length() - prec)
        m = n >> shift
        ln_lo = _ctx(prec, False).log(_round(m, prec, False))
        top = m + 1 if shift else m
        ln_hi = _ctx(prec, True).log(_round(top, prec, True))
        if shift:
            ln2 = cls(_ctx(prec, False).const_log2(), _ctx(prec, True).const_log2(), prec)
            return cls(ln_lo, ln_hi, prec) + ln2 * cls.from_int(shift, prec)
        return cls(ln_lo, ln_hi, prec)

    # arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "IntervalReal":
        if isinstance(other, IntervalReal):
            return other
        if isinstance(other, int):
            return IntervalReal.from_int(other, self.prec)
        if isinstance(other, (Fraction, float)):
            return IntervalReal.from_fraction(Fraction(other), self.prec)
        return NotImplemented

    def _p(self, other: "IntervalReal") -> int:
        return max(self.prec, other.prec)

    def __add__(self, other):
        other = self._coerce(other)
        p = self._p(other)
        return IntervalReal(_ctx(p, False).add(self.lo, other.lo), _ctx(p, True).add(self.hi, other.hi), p)

    __radd__ = __add__

    def __neg__(self):
        return IntervalReal(-self.hi, -self.lo, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        p = self._p(other)
        return IntervalReal(_ctx(p, False).sub(self.lo, other.hi), _ctx(p, True).sub(self.hi, other.lo), p)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        p = self._p(other)
        d, u = _ctx(p, False), _ctx(p, True)
        pairs = [(self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi)]
        return IntervalReal(min(d.mul(a, b) for a, b in pairs), max(u.mul(a, b) for a, b in pairs), p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        p = self._p(other)
        d, u = _ctx(p, False), _ctx(p, True)
        pairs = [(self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi)]
        return IntervalReal(min(d.div(a, b) for a, b in pairs), max(u.div(a, b) for a, b in pairs), p)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def _monotone(self, name: str) -> "IntervalReal":
        p = self.prec
        return IntervalReal(getattr(_ctx(p, False), name)(self.lo), getattr(_ctx(p, True), name)(self.hi), p)

    def sqrt(self) -> "IntervalReal":
        if self.hi < 0:
            raise ValueError("sqrt of a negative interval")
        lo = self.lo if self.lo > 0 else _zero(self.prec)
        return IntervalReal(lo, self.hi, self.prec)._monotone("sqrt")

    def ln(self) -> "IntervalReal":
        if self.lo <= 0:
            raise ValueError("ln of an interval reaching zero")
        return self._monotone("log")

    def exp(self) -> "IntervalReal":
        return self._monotone("exp")

    def expm1(self) -> "IntervalReal":
        return self._monotone("expm1")

    def log1p(self) -> "IntervalReal":
        if self.lo <= -1:
            raise ValueError("log1p of an interval reaching -1")
        return self._monotone("log1p")

    def __pow__(self, k: int) -> "IntervalReal":
        """Integer power by repeated squaring; exponents may be big."""
        k = int(k)
        if k < 0:
            return 1 / (self**-k)
        if self.lo < 0 < self.hi and k % 2 == 0:
            m = max(-self.lo, self.hi)
            top = IntervalReal(_zero(self.prec), m, self.prec) ** k
            return IntervalReal(_zero(self.prec), top.hi, self.prec)
        result = IntervalReal.from_int(1, self.prec)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if base.lo >= 0 or base.hi <= 0 else base * base
            k >>= 1
        return result

    def with_precision(self, prec: int) -> "IntervalReal":
        return IntervalReal(_round(self.lo, prec, False), _round(self.hi, prec, True), prec)

    # queries -------------------------------------------------------------

    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    def width(self):
        return _ctx(self.prec, True).sub(self.hi, self.lo)

    def contains(self, x) -> bool:
        q = Fraction(x) if not isinstance(x, Fraction) else x
        return Fraction(*self.lo.as_integer_ratio()) <= q <= Fraction(*self.hi.as_integer_ratio())

    def strictly_below(self, other) -> bool:
        other = self._coerce(other)
        return self.hi < other.lo

    def strictly_above(self, other) -> bool:
        other = self._coerce(other)
        return self.lo > other.hi

    def is_positive(self) -> bool:
        return self.lo > 0

    def to_list(self, digits: int = 25) -> list[str]:
        return [decimal_string(self.lo, digits, up=False), decimal_string(self.hi, digits, up=True)]

    def __str__(self) -> str:
        lo, hi = self.to_list(12)
        return f"[{lo}, {hi}]"
