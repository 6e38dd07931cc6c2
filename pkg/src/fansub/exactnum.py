"""Scalar layer: exact rationals, intervals over rationals, conversions.

Rationals are :class:`fractions.Fraction`, which is always stored in lowest
terms with a positive denominator.  Everything above this module is written
against plain arithmetic operators so the same code runs on ``Fraction``,
``float`` and :class:`Interval` values.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Union

Rational = Fraction
Scalar = Union[Fraction, float, int]


def rational_from_float(x: float) -> Fraction:
    """Return the dyadic rational exactly equal to the binary64 value ``x``."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{x!r} is not representable as a rational")
    return Fraction(x)


def to_rational(x) -> Fraction:
    """Exact conversion of int / Fraction / float / decimal-or-ratio string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return rational_from_float(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, _RationalABC):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or a decimal such as ``"-58.1"`` or ``"1e-3"``.

    Decimals are read exactly as d * 10**-k, never through binary64.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty rational string")
    try:
        value = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse rational {text!r}") from exc
    return value


def format_rational(q: Fraction) -> str:
    """Canonical text: ``"p/q"``, or ``"p"`` when the denominator is 1."""
    q = to_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_canonical(q: Fraction) -> bool:
    return q.denominator > 0 and math.gcd(abs(q.numerator), q.denominator) == 1


class Interval:
    """Closed interval [lo, hi] with exact rational endpoints.

    No rounding is involved, so every operation is a true enclosure.
    Division by an interval that contains zero raises ``ZeroDivisionError``.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = to_rational(lo)
        hi = lo if hi is None else to_rational(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    @staticmethod
    def _coerce(other) -> "Interval":
        if isinstance(other, Interval):
            return other
        return Interval(other)

    def __repr__(self):
        return f"Interval({format_rational(self.lo)}, {format_rational(self.hi)})"

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __contains__(self, x):
        x = to_rational(x)
        return self.lo <= x <= self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mag(self) -> Fraction:
        """max |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> Fraction:
        """min |x| over the interval."""
        if self.lo <= 0 <= self.hi:
            return Fraction(0)
        return min(abs(self.lo), abs(self.hi))

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if o.contains_zero():
            raise ZeroDivisionError(f"interval divisor {o!r} contains zero")
        return self * Interval(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        if k == 0:
            return Interval(1)
        if k % 2 == 1:
            return Interval(self.lo**k, self.hi**k)
        lo = self.mig**k
        return Interval(lo, self.mag**k)

    def __abs__(self):
        return Interval(self.mig, self.mag)


def interval_hull(values: Iterable, radius=0) -> Interval:
    """Smallest interval containing ``values``, widened by ``radius`` each side."""
    vals = [to_rational(v) for v in values]
    if not vals:
        raise ValueError("interval_hull needs at least one value")
    r = to_rational(radius)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return Interval(min(vals) - r, max(vals) + r)


def ball(center, radius) -> Interval:
    return interval_hull([center], radius)


class Dual:
    """Forward-mode derivative: value plus gradient over a fixed set of seeds.

    Components may be any scalar kind closed under + - * / (Fraction,
    float, Interval).  With Interval components the gradient encloses the
    true gradient over the box, which is how Lipschitz bounds are obtained.
    """

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = tuple(grad)

    @classmethod
    def seed(cls, val, k: int, n: int, zero=0, one=1):
        return cls(val, tuple(one if j == k else zero for j in range(n)))

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"

    def _lift(self, other):
        if isinstance(other, Dual):
            return other
        return Dual(other, (0,) * len(self.grad))

    def __neg__(self):
        return Dual(-self.val, (-g for g in self.grad))

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._lift(other)
        return Dual(self.val + o.val, (a + b for a, b in zip(self.grad, o.grad)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Dual(self.val - o.val, (a - b for a, b in zip(self.grad, o.grad)))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Dual):
            return Dual(self.val * other, (g * other for g in self.grad))
        return Dual(
            self.val * other.val,
            (a * other.val + self.val * b for a, b in zip(self.grad, other.grad)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Dual):
            return Dual(self.val / other, (g / other for g in self.grad))
        q = self.val / other.val
        return Dual(q, ((a - q * b) / other.val for a, b in zip(self.grad, other.grad)))

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Dual(1, (0,) * len(self.grad))
        for _ in range(k):
            out = out * self
        return out
