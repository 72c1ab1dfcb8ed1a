"""Exact arithmetic over the quadratic field Q(sqrt2).

Every distance comparison in this package is done on squared quantities.
For the point families we work with (rational coordinates, optionally
carrying a sqrt(2)/2 factor), squared distances always land in
Q(sqrt2) = {a + b*sqrt(2) : a, b rational}, where signs are decidable
with integer arithmetic alone.  No floats anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Q = Fraction

ZERO = Q(0)


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and 'num/den' strings to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Root2:
    """The number a + b*sqrt(2), with a and b exact rationals."""

    a: Fraction
    b: Fraction = ZERO

    @staticmethod
    def of(a, b=0) -> "Root2":
        return Root2(as_fraction(a), as_fraction(b))

    def __add__(self, other) -> "Root2":
        other = _coerce(other)
        return Root2(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other) -> "Root2":
        other = _coerce(other)
        return Root2(self.a - other.a, self.b - other.b)

    def __rsub__(self, other) -> "Root2":
        return _coerce(other) - self

    def __mul__(self, other) -> "Root2":
        other = _coerce(other)
        return Root2(
            self.a * other.a + 2 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "Root2":
        return Root2(-self.a, -self.b)

    def square(self) -> "Root2":
        return self * self

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(2)."""
        a, b = self.a, self.b
        if a == 0 and b == 0:
            return 0
        if a >= 0 and b >= 0:
            return 1
        if a <= 0 and b <= 0:
            return -1
        # Opposite signs: compare a^2 with 2 b^2 on the correct side.
        if a > 0:  # b < 0: positive iff a^2 > 2 b^2
            return 1 if a * a > 2 * b * b else (-1 if a * a < 2 * b * b else 0)
        # a < 0, b > 0: positive iff 2 b^2 > a^2
        return 1 if 2 * b * b > a * a else (-1 if 2 * b * b < a * a else 0)

    def cmp(self, other) -> int:
        return (self - _coerce(other)).sign()

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        if self.b == 0:
            return f"Root2({self.a})"
        return f"Root2({self.a} + {self.b}*sqrt2)"


def _coerce(x) -> Root2:
    if isinstance(x, Root2):
        return x
    if isinstance(x, (int, Fraction)):
        return Root2(as_fraction(x))
    raise TypeError(f"cannot mix Root2 with {type(x).__name__}")


R2_ZERO = Root2(ZERO)
