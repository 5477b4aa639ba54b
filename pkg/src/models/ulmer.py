from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional

from .race import DensityReport


class ClosedForm(Enum):
    STATED = "stated"      # (1-qT)^eps_d * prod over e | d, e not dividing 6
    COMPLETE = "complete"  # adds the factors of the divisors 2 and 3 with their actual roots


@dataclass(frozen=True)
class UlmerSpec:
    """E_d: y^2 + xy = x^3 - t^d over F_q(t), q = p^k, with d | p^n + 1 and n minimal."""

    p: int
    k: int
    d: int
    n: int

    @property
    def q(self) -> int:
        return self.p ** self.k

    def to_json(self) -> Dict:
        return {"p": self.p, "k": self.k, "d": self.d, "n": self.n, "q": self.q}


class RegimeStatus(Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    UNDECIDED = "undecided"
    NOT_APPLICABLE = "not applicable"


@dataclass
class RegimeResult:
    regime: str
    status: RegimeStatus
    hypotheses: List[str] = field(default_factory=list)
    conclusion: Optional[str] = None
    asymptotic: bool = False
    detail: Optional[str] = None

    def to_json(self) -> Dict:
        data = {
            "regime": self.regime,
            "status": self.status.value,
            "hypotheses": list(self.hypotheses),
            "asymptotic": self.asymptotic,
        }
        if self.conclusion:
            data["conclusion"] = self.conclusion
        if self.detail:
            data["detail"] = self.detail
        return data


@dataclass
class TheoremReport:
    spec: UlmerSpec
    rank: int
    density: DensityReport
    results: List[RegimeResult] = field(default_factory=list)

    def applicable(self) -> List[RegimeResult]:
        return [r for r in self.results if r.status is not RegimeStatus.NOT_APPLICABLE]

    def by_regime(self, name: str) -> RegimeResult:
        for r in self.results:
            if r.regime == name:
                return r
        raise KeyError(name)

    def to_json(self) -> Dict:
        return {
            "spec": self.spec.to_json(),
            "rank": self.rank,
            "density": self.density.to_json(),
            "results": [r.to_json() for r in self.results],
        }


@dataclass
class LimitPointResult:
    target: Fraction
    spec: Optional[UlmerSpec]
    density: Optional[DensityReport]
    distance: float
    examined: int
    family: Optional[str] = None

    def to_json(self) -> Dict:
        return {
            "target": f"{self.target.numerator}/{self.target.denominator}",
            "spec": self.spec.to_json() if self.spec else None,
            "density": self.density.to_json() if self.density else None,
            "distance": self.distance,
            "examined": self.examined,
            "family": self.family,
        }


@dataclass
class ScanRow:
    p: int
    k: int
    d: int
    n: Optional[int] = None
    rank: Optional[int] = None
    degree: Optional[int] = None
    period: Optional[int] = None
    delta_low: Optional[Fraction] = None
    delta_high: Optional[Fraction] = None
    error: Optional[str] = None

    def as_row(self) -> Dict:
        def frac(x: Optional[Fraction]) -> Optional[str]:
            return None if x is None else f"{x.numerator}/{x.denominator}"

        return {
            "p": self.p, "k": self.k, "d": self.d, "n": self.n,
            "rank": self.rank, "L_degree": self.degree, "period": self.period,
            "delta_low": frac(self.delta_low), "delta_high": frac(self.delta_high),
            "error": self.error,
        }

