from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .field import FieldContext, FieldElement
from ..utils.errors import PolynomialError

INFINITE_VALUATION = 10 ** 9


def _trim(coeffs: Sequence[int]) -> Tuple[int, ...]:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class PolyOverFq:
    """Polynomial in t over F_q; coefficients are element codes, lowest degree first."""

    ctx: FieldContext
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    # constructors

    @classmethod
    def from_ints(cls, ctx: FieldContext, values: Sequence[int]) -> "PolyOverFq":
        """Prime-field integers, lowest degree first."""
        return cls(ctx, tuple(ctx.from_int(v) for v in values))

    @classmethod
    def from_elements(cls, ctx: FieldContext, values: Sequence[FieldElement]) -> "PolyOverFq":
        return cls(ctx, tuple(ctx.element(v).code for v in values))

    @classmethod
    def zero(cls, ctx: FieldContext) -> "PolyOverFq":
        return cls(ctx, ())

    @classmethod
    def one(cls, ctx: FieldContext) -> "PolyOverFq":
        return cls(ctx, (1,))

    @classmethod
    def t(cls, ctx: FieldContext) -> "PolyOverFq":
        return cls(ctx, (0, 1))

    @classmethod
    def monomial(cls, ctx: FieldContext, degree: int, code: int = 1) -> "PolyOverFq":
        return cls(ctx, (0,) * degree + (code,))

    @classmethod
    def from_code(cls, ctx: FieldContext, index: int, degree: int) -> "PolyOverFq":
        """The monic polynomial of the given degree whose lower coefficients are the base-q digits of index."""
        digits = []
        for _ in range(degree):
            index, r = divmod(index, ctx.q)
            digits.append(r)
        return cls(ctx, tuple(digits) + (1,))

    # basic properties

    @property
    def coefficients(self) -> List[FieldElement]:
        return [FieldElement(self.ctx, c) for c in self.coeffs]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    @property
    def lc(self) -> int:
        if not self.coeffs:
            raise PolynomialError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def _check(self, other: "PolyOverFq") -> None:
        if other.ctx != self.ctx:
            raise PolynomialError("mixed field contexts")

    def _coerce(self, other) -> "PolyOverFq":
        if isinstance(other, PolyOverFq):
            self._check(other)
            return other
        if isinstance(other, FieldElement):
            return PolyOverFq(self.ctx, (self.ctx.element(other).code,))
        if isinstance(other, int):
            return PolyOverFq(self.ctx, (self.ctx.from_int(other),))
        raise PolynomialError(f"cannot combine polynomial with {type(other).__name__}")

    # ring arithmetic

    def __add__(self, other) -> "PolyOverFq":
        other = self._coerce(other)
        ctx = self.ctx
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return PolyOverFq(ctx, tuple(
            ctx.add(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0) for i in range(n)
        ))

    __radd__ = __add__

    def __neg__(self) -> "PolyOverFq":
        return PolyOverFq(self.ctx, tuple(self.ctx.neg(c) for c in self.coeffs))

    def __sub__(self, other) -> "PolyOverFq":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PolyOverFq":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PolyOverFq":
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return PolyOverFq(self.ctx, ())
        ctx = self.ctx
        add, mul = ctx._lists[0], ctx._lists[1]
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            row = mul[a]
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] = add[out[i + j]][row[b]]
        return PolyOverFq(ctx, tuple(out))

    __rmul__ = __mul__

    def scale(self, code: int) -> "PolyOverFq":
        return PolyOverFq(self.ctx, tuple(self.ctx.mul(code, c) for c in self.coeffs))

    def __pow__(self, e: int) -> "PolyOverFq":
        if e < 0:
            raise PolynomialError("negative power of a polynomial")
        result, base = PolyOverFq.one(self.ctx), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __divmod__(self, other: "PolyOverFq") -> Tuple["PolyOverFq", "PolyOverFq"]:
        other = self._coerce(other)
        if other.is_zero():
            raise PolynomialError("division by the zero polynomial")
        ctx = self.ctx
        add, mul, neg = ctx._lists[0], ctx._lists[1], ctx._lists[2]
        rem = list(self.coeffs)
        dlen = len(other.coeffs)
        inv_lc = ctx.inv(other.lc)
        quot = [0] * max(len(rem) - dlen + 1, 0)
        for top in range(len(rem) - 1, dlen - 2, -1):
            c = rem[top]
            if c == 0:
                continue
            f = mul[c][inv_lc]
            quot[top - dlen + 1] = f
            nf = neg[f]
            shift = top - dlen + 1
            for i, dc in enumerate(other.coeffs):
                if dc:
                    rem[shift + i] = add[rem[shift + i]][mul[nf][dc]]
        return PolyOverFq(ctx, tuple(quot)), PolyOverFq(ctx, tuple(rem[: dlen - 1]))

    def __floordiv__(self, other) -> "PolyOverFq":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "PolyOverFq":
        return divmod(self, other)[1]

    def divides(self, other: "PolyOverFq") -> bool:
        return (other % self).is_zero()

    def monic(self) -> "PolyOverFq":
        if self.is_zero():
            return self
        return self.scale(self.ctx.inv(self.lc))

    def gcd(self, other: "PolyOverFq") -> "PolyOverFq":
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def derivative(self) -> "PolyOverFq":
        ctx = self.ctx
        return PolyOverFq(ctx, tuple(
            ctx.mul(ctx.from_int(i), c) for i, c in enumerate(self.coeffs)
        )[1:])

    def eval(self, x) -> FieldElement:
        ctx = self.ctx
        xc = ctx.element(x).code
        acc = 0
        for c in reversed(self.coeffs):
            acc = ctx.add(ctx.mul(acc, xc), c)
        return FieldElement(ctx, acc)

    def compose(self, other: "PolyOverFq") -> "PolyOverFq":
        other = self._coerce(other)
        acc = PolyOverFq.zero(self.ctx)
        for c in reversed(self.coeffs):
            acc = acc * other + PolyOverFq(self.ctx, (c,))
        return acc

    def pow_mod(self, e: int, modulus: "PolyOverFq") -> "PolyOverFq":
        result, base = PolyOverFq.one(self.ctx) % modulus, self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def reverse(self, degree: int) -> "PolyOverFq":
        """t^degree * f(1/t) for degree >= deg f."""
        if degree < self.degree:
            raise PolynomialError("reversal degree below polynomial degree")
        padded = self.coeffs + (0,) * (degree + 1 - len(self.coeffs))
        return PolyOverFq(self.ctx, tuple(reversed(padded)))

    def valuation(self, pi: "PolyOverFq") -> int:
        """Multiplicity of the irreducible pi in self."""
        if self.is_zero():
            return INFINITE_VALUATION
        v, f = 0, self
        while True:
            quot, rem = divmod(f, pi)
            if not rem.is_zero():
                return v
            v, f = v + 1, quot

    def int_code(self) -> int:
        """Ordering key: lower coefficients as base-q digits."""
        value = 0
        for c in reversed(self.coeffs[:-1] if self.is_monic() else self.coeffs):
            value = value * self.ctx.q + c
        return value

    def to_json(self) -> List[List[int]]:
        return [list(self.ctx.coords(c)) for c in self.coeffs]

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            coeff = str(c) if self.ctx.k == 1 else str(list(self.ctx.coords(c)))
            if i == 0:
                terms.append(coeff)
            else:
                mono = "t" if i == 1 else f"t^{i}"
                terms.append(mono if c == 1 else f"{coeff}*{mono}")
        return " + ".join(reversed(terms))


class PlaceKind(Enum):
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class Place:
    kind: PlaceKind
    degree: int
    generator: Optional[PolyOverFq] = None

    @classmethod
    def finite(cls, generator: PolyOverFq) -> "Place":
        return cls(PlaceKind.FINITE, generator.degree, generator)

    @classmethod
    def infinity(cls) -> "Place":
        return cls(PlaceKind.INFINITE, 1, None)

    @property
    def is_infinite(self) -> bool:
        return self.kind is PlaceKind.INFINITE

    def residue_size(self, q: int) -> int:
        return q ** self.degree

    def label(self) -> str:
        return "inf" if self.is_infinite else repr(self.generator)

    def sort_key(self) -> Tuple[int, int, int]:
        if self.is_infinite:
            return (1, 0, -1)
        return (self.degree, 1, self.generator.int_code())
