"""Coefficient arithmetic: exact rationals and a fixed real quadratic extension.

Every algebraic object in the package works over one `QuadField`, the field
Q(sqrt(d)) for a square-free integer d.  d = 1 means the field collapsed to
plain Q (the radicand requested at construction was a perfect square), in
which case every element keeps b = 0 and arithmetic stays on the fast
rational path.
"""
from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .errors import FieldTooSmall

Rational = Fraction

_SMALL_PRIME_LIMIT = 100_000


def parse_rational(text) -> Fraction:
    """Parse "p/q" / "p" strings (or ints) into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip())
    raise TypeError(f"cannot parse rational from {text!r}")


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def square_free_split(n: int) -> tuple[int, int]:
    """Write |n| = m^2 * s with s square-free; return (m, sign(n) * s).

    Trial division up to a fixed bound, then a perfect-square check on the
    cofactor.  Inputs here come from small conic coefficients, so the bound
    is never the limiting factor at desk scale.
    """
    if n == 0:
        return 0, 0
    sign = 1 if n > 0 else -1
    n = abs(n)
    m, s = 1, 1
    p = 2
    while p <= _SMALL_PRIME_LIMIT and p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            m *= p ** (e // 2)
            if e % 2:
                s *= p
        p += 1 if p == 2 else 2
    if n > 1:
        root = isqrt(n)
        if root * root == n:
            m *= root
        else:
            s *= n
    return m, sign * s


class QuadField:
    """The field Q(sqrt(d)), d a square-free integer (d = 1 collapses to Q)."""

    __slots__ = ("d", "_zero", "_one")
    _cache: dict[int, "QuadField"] = {}

    def __new__(cls, d: int):
        if d == 0:
            d = 1
        cached = cls._cache.get(d)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.d = d
        self._zero = None
        self._one = None
        cls._cache[d] = self
        return self

    @classmethod
    def rationals(cls) -> "QuadField":
        return cls(1)

    @classmethod
    def for_radicand(cls, radicand: Fraction) -> "QuadField":
        """Field containing sqrt(radicand); collapses to Q when it is a square."""
        radicand = Fraction(radicand)
        if radicand == 0:
            return cls(1)
        _, s = square_free_split(radicand.numerator * radicand.denominator)
        return cls(s)

    @property
    def is_rational(self) -> bool:
        return self.d == 1

    @property
    def zero(self) -> "QuadNumber":
        if self._zero is None:
            self._zero = QuadNumber(self, Fraction(0), Fraction(0))
        return self._zero

    @property
    def one(self) -> "QuadNumber":
        if self._one is None:
            self._one = QuadNumber(self, Fraction(1), Fraction(0))
        return self._one

    def __call__(self, a, b=0) -> "QuadNumber":
        return QuadNumber(self, Fraction(a), Fraction(b))

    def coerce(self, value) -> "QuadNumber":
        if isinstance(value, QuadNumber):
            if value.field is not self:
                if value.b == 0:
                    return QuadNumber(self, value.a, Fraction(0))
                raise ValueError(f"cannot coerce element of {value.field} into {self}")
            return value
        if isinstance(value, (int, Fraction)):
            return QuadNumber(self, Fraction(value), Fraction(0))
        raise TypeError(f"cannot coerce {value!r} into {self}")

    def sqrt(self, value: Fraction) -> "QuadNumber":
        """Square root of a rational inside this field, positive branch.

        "Positive" means: a positive rational, or a positive rational multiple
        of the canonical generator sqrt(d).  Raises FieldTooSmall otherwise.
        """
        value = Fraction(value)
        if value == 0:
            return self.zero
        num, den = value.numerator, value.denominator
        m, s = square_free_split(num * den)
        if s == 1:
            return QuadNumber(self, Fraction(m, den), Fraction(0))
        if s == self.d:
            return QuadNumber(self, Fraction(0), Fraction(m, den))
        raise FieldTooSmall(
            f"sqrt({value}) needs Q(sqrt({s})) but field is Q(sqrt({self.d}))"
        )

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.d == self.d

    def __hash__(self):
        return hash(("QuadField", self.d))

    def __repr__(self):
        return "Q" if self.d == 1 else f"Q(sqrt({self.d}))"


class QuadNumber:
    """An element a + b*sqrt(d) of a QuadField, both components exact rationals."""

    __slots__ = ("field", "a", "b")

    def __init__(self, field: QuadField, a: Fraction, b: Fraction = Fraction(0)):
        if b and field.d == 1:
            a = a + b
            b = Fraction(0)
        self.field = field
        self.a = a
        self.b = b

    def _coerced(self, other) -> "QuadNumber | None":
        if isinstance(other, QuadNumber):
            if other.field is not self.field and other.field != self.field:
                raise ValueError("mixed quadratic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadNumber(self.field, Fraction(other))
        return None

    @property
    def is_zero(self) -> bool:
        return not self.a and not self.b

    @property
    def is_rational(self) -> bool:
        return not self.b

    def rational_value(self) -> Fraction:
        if self.b:
            raise ValueError(f"{self} has a nonzero surd part")
        return self.a

    def conjugate(self) -> "QuadNumber":
        if not self.b:
            return self
        return QuadNumber(self.field, self.a, -self.b)

    def __add__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return QuadNumber(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return QuadNumber(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return QuadNumber(self.field, o.a - self.a, o.b - self.b)

    def __neg__(self):
        return QuadNumber(self.field, -self.a, -self.b)

    def __mul__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        if not self.b and not o.b:
            return QuadNumber(self.field, self.a * o.a)
        d = self.field.d
        return QuadNumber(
            self.field,
            self.a * o.a + self.b * o.b * d,
            self.a * o.b + self.b * o.a,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadNumber":
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero field element")
        if not self.b:
            return QuadNumber(self.field, 1 / self.a)
        norm = self.a * self.a - self.field.d * self.b * self.b
        return QuadNumber(self.field, self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.b and self.a == other
        if isinstance(other, QuadNumber):
            return self.field == other.field and self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b, self.field.d))

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        if not self.b:
            return str(self.a)
        if not self.a:
            return f"{self.b}*sqrt({self.field.d})"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*sqrt({self.field.d})"

    def to_float(self) -> float:
        if self.field.d < 0 and self.b:
            raise ValueError("no real embedding for negative discriminant")
        return float(self.a) + float(self.b) * (self.field.d ** 0.5 if self.b else 0.0)
