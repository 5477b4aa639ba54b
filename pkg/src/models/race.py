from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple


class RaceMethod(Enum):
    DIRECT = "direct"
    EXPLICIT = "explicit"


class DensityMethod(Enum):
    EXACT_PERIODIC = "exact-periodic"
    TIME_AVERAGE = "time-average"
    LIMIT_LAW_MC = "limit-law-mc"
    LIMIT_LAW_CF = "limit-law-cf"


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class RaceSeries:
    """T_E(X) for X = 1..horizon."""

    method: RaceMethod
    values: List[float]
    sources: List[str] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.values)

    def value(self, x: int) -> float:
        return self.values[x - 1]

    def to_json(self) -> Dict:
        return {"method": self.method.value, "horizon": self.horizon, "values": list(self.values)}


@dataclass
class DensityReport:
    method: DensityMethod
    value: Optional[Fraction] = None
    interval: Optional[Tuple[Fraction, Fraction]] = None
    estimate: Optional[float] = None
    standard_error: Optional[float] = None
    period: Optional[int] = None
    boundary_classes: List[int] = field(default_factory=list)
    samples: Optional[int] = None
    seed: Optional[int] = None
    truncation: Optional[float] = None
    label: Optional[str] = None

    @property
    def is_exact(self) -> bool:
        return self.value is not None

    @property
    def low(self) -> float:
        if self.value is not None:
            return float(self.value)
        if self.interval is not None:
            return float(self.interval[0])
        return float(self.estimate)

    @property
    def high(self) -> float:
        if self.value is not None:
            return float(self.value)
        if self.interval is not None:
            return float(self.interval[1])
        return float(self.estimate)

    def point(self) -> float:
        """Single number for tables: the exact value, the interval midpoint, or the estimate."""
        return (self.low + self.high) / 2

    def to_json(self) -> Dict:
        data: Dict = {"method": self.method.value}
        if self.value is not None:
            data["value"] = _frac(self.value)
        if self.interval is not None:
            data["interval"] = [_frac(self.interval[0]), _frac(self.interval[1])]
        if self.estimate is not None:
            data["estimate"] = self.estimate
        if self.standard_error is not None:
            data["standard_error"] = self.standard_error
        if self.period is not None:
            data["period"] = self.period
            data["boundary_classes"] = list(self.boundary_classes)
        for key in ("samples", "seed", "truncation", "label"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data


@dataclass(frozen=True)
class MeanVariance:
    mean: float
    variance_uncorrected: float
    variance_corrected: float

    @property
    def resonance(self) -> float:
        """Diagonal correction carried by an inverse zero at -q."""
        return self.variance_uncorrected - self.variance_corrected

    def to_json(self) -> Dict:
        return {
            "mean": self.mean,
            "variance_uncorrected": self.variance_uncorrected,
            "variance_paper": self.variance_uncorrected,
            "variance_corrected": self.variance_corrected,
        }
