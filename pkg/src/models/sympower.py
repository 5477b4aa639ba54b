from dataclasses import dataclass, field
from typing import Dict, List, Optional


@dataclass
class FourierProfile:
    """Coefficients V_m = <V, U_m> for m = 0..m_cut.

    decay_exponent is the caller's certificate eta with |V_m| <= C m^(-3-eta); it is not checked.
    """

    coefficients: List[float]
    decay_exponent: Optional[float] = None
    centering_tol: float = 1e-9

    @property
    def m_cut(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_centered(self) -> bool:
        return abs(self.coefficients[0]) <= self.centering_tol if self.coefficients else True

    def coefficient(self, m: int) -> float:
        return self.coefficients[m] if 0 <= m < len(self.coefficients) else 0.0

    def support(self) -> List[int]:
        return [m for m, v in enumerate(self.coefficients) if m > 0 and v != 0.0]

    def to_json(self) -> Dict:
        return {
            "coefficients": [float(f"{v:.15g}") for v in self.coefficients],
            "decay_exponent": self.decay_exponent,
        }


@dataclass(frozen=True)
class SymPowerSum:
    """S'_{m,N} = -sum_j gamma_{m,j}^N and the normalized sum of e^{i N theta_{m,j}}."""

    m: int
    n: int
    s_prime: int
    normalized: float
    source: str = "counted"


@dataclass
class SymPowerRow:
    m: int
    n: int
    s_prime: int
    normalized: float
    residual: Optional[float] = None
    source: str = "counted"
    error: Optional[str] = None

    def as_row(self) -> Dict:
        return {
            "m": self.m, "N": self.n, "S_prime": self.s_prime,
            "normalized": self.normalized, "residual": self.residual,
            "source": self.source, "error": self.error,
        }


@dataclass
class MmEstimate:
    """Cesaro average of sum_j cos(N theta_{m,j}) over N <= n_max, an estimate of M_m(1)."""

    m: int
    n_max: int
    estimate: float
    half_estimate: float
    averages: List[float] = field(default_factory=list)

    @property
    def spread(self) -> float:
        """Distance between the full average and the average over the upper half of N."""
        return abs(self.estimate - self.half_estimate)

    @property
    def rounded(self) -> int:
        return max(0, round(self.estimate))

    def to_json(self) -> Dict:
        return {
            "m": self.m, "n_max": self.n_max, "estimate": self.estimate,
            "half_estimate": self.half_estimate, "spread": self.spread, "rounded": self.rounded,
        }
