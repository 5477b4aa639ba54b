from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Dict, Union

Rational = Union[int, Fraction]


def _perfect_root(q: int) -> int:
    r = isqrt(q)
    return r if r * r == q else 0


@dataclass(frozen=True)
class QSqrtValue:
    """a + b*sqrt(q) with rational a, b; collapses to b = 0 when q is a perfect square."""

    a: Fraction
    b: Fraction
    q: int

    def __post_init__(self):
        a, b = Fraction(self.a), Fraction(self.b)
        root = _perfect_root(self.q)
        if root and b:
            a, b = a + b * root, Fraction(0)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def rational(cls, value: Rational, q: int) -> "QSqrtValue":
        return cls(Fraction(value), Fraction(0), q)

    @classmethod
    def sqrt_q(cls, q: int) -> "QSqrtValue":
        return cls(Fraction(0), Fraction(1), q)

    def _coerce(self, other) -> "QSqrtValue":
        if isinstance(other, QSqrtValue):
            if other.q != self.q:
                raise ValueError(f"mixing Q(sqrt {self.q}) with Q(sqrt {other.q})")
            return other
        return QSqrtValue.rational(other, self.q)

    def __add__(self, other) -> "QSqrtValue":
        o = self._coerce(other)
        return QSqrtValue(self.a + o.a, self.b + o.b, self.q)

    __radd__ = __add__

    def __neg__(self) -> "QSqrtValue":
        return QSqrtValue(-self.a, -self.b, self.q)

    def __sub__(self, other) -> "QSqrtValue":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "QSqrtValue":
        return self._coerce(other) - self

    def __mul__(self, other) -> "QSqrtValue":
        o = self._coerce(other)
        return QSqrtValue(
            self.a * o.a + self.b * o.b * self.q,
            self.a * o.b + self.b * o.a,
            self.q,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QSqrtValue":
        norm = self.a * self.a - self.q * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt q)")
        return QSqrtValue(self.a / norm, -self.b / norm, self.q)

    def __truediv__(self, other) -> "QSqrtValue":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "QSqrtValue":
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int) -> "QSqrtValue":
        if e < 0:
            return self.inverse() ** (-e)
        result, base = QSqrtValue.rational(1, self.q), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def sign(self) -> int:
        """Exact sign, comparing a^2 with b^2 q when a and b disagree."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        lhs, rhs = self.a * self.a, self.b * self.b * self.q
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * self.q ** 0.5

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QSqrtValue):
            return (self.a, self.b, self.q) == (other.a, other.b, other.q)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.q))

    def to_json(self) -> Dict[str, str]:
        return {"a": f"{self.a.numerator}/{self.a.denominator}", "b": f"{self.b.numerator}/{self.b.denominator}"}

    def __repr__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.q})"


def sqrt_power(q: int, j: int) -> QSqrtValue:
    """q^(j/2) for any integer j."""
    half, odd = divmod(j, 2)
    value = QSqrtValue.rational(Fraction(q) ** half, q)
    if odd:
        value = value * QSqrtValue.sqrt_q(q)
    return value
