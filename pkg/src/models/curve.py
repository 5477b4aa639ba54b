from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from .field import FieldContext
from .poly import Place, PolyOverFq

# Weights of a1, a2, a3, a4, a6 under (x, y) -> (x/u^2, y/u^3)
WEIGHTS = (1, 2, 3, 4, 6)


class ReductionType(Enum):
    GOOD = "good"
    SPLIT = "split-multiplicative"
    NONSPLIT = "nonsplit-multiplicative"
    ADDITIVE = "additive"

    @property
    def is_bad(self) -> bool:
        return self is not ReductionType.GOOD

    @property
    def conductor_exponent(self) -> int:
        """Tame exponent: 0 good, 1 multiplicative, 2 additive."""
        if self is ReductionType.GOOD:
            return 0
        return 2 if self is ReductionType.ADDITIVE else 1


BAD_TRACE = {
    ReductionType.SPLIT: 1,
    ReductionType.NONSPLIT: -1,
    ReductionType.ADDITIVE: 0,
}


@dataclass(frozen=True)
class ReductionData:
    place: Place
    type: ReductionType
    a_v: int
    q_v: int
    theta_v: Optional[float] = None
    point_count: Optional[int] = None


@dataclass(frozen=True)
class CurveModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with a_i in F_q[t]."""

    ctx: FieldContext
    a1: PolyOverFq
    a2: PolyOverFq
    a3: PolyOverFq
    a4: PolyOverFq
    a6: PolyOverFq
    name: Optional[str] = None

    @property
    def coefficients(self) -> Tuple[PolyOverFq, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def q(self) -> int:
        return self.ctx.q

    @cached_property
    def b2(self) -> PolyOverFq:
        return self.a1 * self.a1 + self.a2 * 4

    @cached_property
    def b4(self) -> PolyOverFq:
        return self.a4 * 2 + self.a1 * self.a3

    @cached_property
    def b6(self) -> PolyOverFq:
        return self.a3 * self.a3 + self.a6 * 4

    @cached_property
    def b8(self) -> PolyOverFq:
        a1, a2, a3, a4, a6 = self.coefficients
        return a1 * a1 * a6 + a2 * a6 * 4 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @cached_property
    def c4(self) -> PolyOverFq:
        return self.b2 * self.b2 - self.b4 * 24

    @cached_property
    def c6(self) -> PolyOverFq:
        b2, b4, b6 = self.b2, self.b4, self.b6
        return -(b2 * b2 * b2) + b2 * b4 * 36 - b6 * 216

    @cached_property
    def discriminant(self) -> PolyOverFq:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -(b2 * b2 * b8) - b4 * b4 * b4 * 8 - b6 * b6 * 27 + b2 * b4 * b6 * 9

    @cached_property
    def j_invariant(self) -> Tuple[PolyOverFq, PolyOverFq]:
        """(numerator, denominator) of c4^3 / discriminant in lowest terms."""
        num = self.c4 * self.c4 * self.c4
        den = self.discriminant
        g = num.gcd(den) if not num.is_zero() else den.monic()
        return num // g, den // g

    @property
    def chart_exponent(self) -> int:
        """Smallest e >= 0 with deg a_i <= i*e for every coefficient."""
        e = 0
        for a, w in zip(self.coefficients, WEIGHTS):
            if not a.is_zero():
                e = max(e, -(-a.degree // w))
        return e

    @cached_property
    def infinity_chart(self) -> "CurveModel":
        """The model in u = 1/t after (x, y) -> (x/u^{2e}, y/u^{3e}); its place u = 0 is infinity."""
        e = self.chart_exponent
        coeffs = [
            a.reverse(w * e) if not a.is_zero() else a
            for a, w in zip(self.coefficients, WEIGHTS)
        ]
        label = f"{self.name} at infinity" if self.name else None
        return CurveModel(self.ctx, *coeffs, name=label)

    def to_json(self) -> Dict:
        return {
            "p": self.ctx.p,
            "k": self.ctx.k,
            "modulus": list(self.ctx.modulus),
            "name": self.name,
            "a": [a.to_json() for a in self.coefficients],
        }


@dataclass(frozen=True)
class ConductorData:
    degree: int
    analytic_degree: int
    multiplicative_degree: int
    additive_degree: int
    infinity_exponent: int
    multiplicative_locus: PolyOverFq

    def to_json(self) -> Dict:
        return {
            "conductor_degree": self.degree,
            "L_degree": self.analytic_degree,
            "multiplicative_degree": self.multiplicative_degree,
            "additive_degree": self.additive_degree,
            "infinity_exponent": self.infinity_exponent,
            "multiplicative_locus": self.multiplicative_locus.to_json(),
        }


@dataclass
class ReductionTable:
    curve: CurveModel
    rows: List[ReductionData]

    def bad(self) -> List[ReductionData]:
        return [r for r in self.rows if r.type.is_bad]

    def of_degree(self, d: int) -> List[ReductionData]:
        return [r for r in self.rows if r.place.degree == d]
