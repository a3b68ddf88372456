"""Exact arithmetic in the real quadratic field Q(sqrt 17)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

__all__ = ["QSqrt17", "rational_sqrt", "D", "ZERO", "ONE"]


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Nonnegative square root of ``x`` if it is a rational square."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class QSqrt17:
    """The number ``a + b*sqrt(17)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b", "_hash")

    def __init__(self, a=0, b=0):
        self.a = a if type(a) is Fraction else Fraction(a)
        self.b = b if type(b) is Fraction else Fraction(b)
        self._hash = None

    @classmethod
    def coerce(cls, x) -> QSqrt17:
        if isinstance(x, QSqrt17):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to QSqrt17")

    def __repr__(self) -> str:
        return f"QSqrt17({self.a}, {self.b})"

    def __str__(self) -> str:
        return self.serialize()

    def serialize(self) -> str:
        """Render in the scalar expression grammar."""
        if not self.b:
            return _rat(self.a)
        if not self.a:
            return f"{_rat(self.b)}*sqrt17" if self.b != 1 else "sqrt17"
        bpart = f"{_rat(abs(self.b))}*sqrt17" if abs(self.b) != 1 else "sqrt17"
        sign = "+" if self.b > 0 else "-"
        return f"({_rat(self.a)}{sign}{bpart})"

    def __eq__(self, other) -> bool:
        if isinstance(other, QSqrt17):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.a, self.b))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return not self.b

    def __add__(self, other) -> QSqrt17:
        if isinstance(other, QSqrt17):
            return QSqrt17(self.a + other.a, self.b + other.b)
        if isinstance(other, (int, Fraction)):
            return QSqrt17(self.a + other, self.b)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> QSqrt17:
        return QSqrt17(-self.a, -self.b)

    def __sub__(self, other) -> QSqrt17:
        if isinstance(other, QSqrt17):
            return QSqrt17(self.a - other.a, self.b - other.b)
        if isinstance(other, (int, Fraction)):
            return QSqrt17(self.a - other, self.b)
        return NotImplemented

    def __rsub__(self, other) -> QSqrt17:
        return (-self) + other

    def __mul__(self, other) -> QSqrt17:
        if isinstance(other, QSqrt17):
            a, b, c, d = self.a, self.b, other.a, other.b
            if not b and not d:
                return QSqrt17(a * c, 0)
            return QSqrt17(a * c + 17 * b * d, a * d + b * c)
        if isinstance(other, (int, Fraction)):
            return QSqrt17(self.a * other, self.b * other)
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> QSqrt17:
        return QSqrt17(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - 17 * self.b * self.b

    def inverse(self) -> QSqrt17:
        n = self.norm()
        if not n:
            raise ZeroDivisionError("division by zero in Q(sqrt17)")
        return QSqrt17(self.a / n, -self.b / n)

    def __truediv__(self, other) -> QSqrt17:
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero in Q(sqrt17)")
            return QSqrt17(self.a / other, self.b / other)
        if isinstance(other, QSqrt17):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other) -> QSqrt17:
        return QSqrt17.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> QSqrt17:
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sign(self) -> int:
        """Exact sign under the embedding with sqrt(17) > 0."""
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa == sb or not sb:
            return sa
        if not sa:
            return sb
        # opposite signs: compare a^2 with 17 b^2
        diff = a * a - 17 * b * b
        return sa if diff > 0 else sb

    def __lt__(self, other) -> bool:
        return (self - QSqrt17.coerce(other)).sign() < 0

    def __le__(self, other) -> bool:
        return (self - QSqrt17.coerce(other)).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - QSqrt17.coerce(other)).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - QSqrt17.coerce(other)).sign() >= 0

    def __abs__(self) -> QSqrt17:
        return -self if self.sign() < 0 else self

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * 17 ** 0.5

    def sqrt(self) -> QSqrt17 | None:
        """Positive square root inside Q(sqrt17), or None.

        Solves a^2 + 17 b^2 = A, 2ab = B over the rationals.
        """
        A, B = self.a, self.b
        if self.sign() < 0:
            return None
        if not self:
            return ZERO
        n = rational_sqrt(A * A - 17 * B * B)
        if n is None:
            return None
        for s in (n, -n):
            a = rational_sqrt((A + s) / 2)
            if a is None:
                continue
            if a:
                b = B / (2 * a)
            else:
                if B:
                    continue
                b = rational_sqrt(A / 17)
                if b is None:
                    continue
            if a * a + 17 * b * b == A and 2 * a * b == B:
                r = QSqrt17(a, b)
                return r if r.sign() > 0 else -r
        return None

    def primitive(self) -> tuple[Fraction, int, int]:
        """Split as ``c * (p + q sqrt17)`` with coprime integers p, q and c > 0."""
        if not self:
            raise ValueError("zero has no primitive part")
        den = _lcm(self.a.denominator, self.b.denominator)
        p = int(self.a * den)
        q = int(self.b * den)
        g = gcd(p, q)
        return Fraction(g, den), p // g, q // g


def _lcm(x: int, y: int) -> int:
    return x * y // gcd(x, y)


def _rat(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


ZERO = QSqrt17(0, 0)
ONE = QSqrt17(1, 0)
SQRT17 = QSqrt17(0, 1)
#: The AH+1 index (7 + sqrt 17)/2.
D = QSqrt17(Fraction(7, 2), Fraction(1, 2))
