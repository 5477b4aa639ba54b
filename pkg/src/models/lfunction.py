import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple


def newton_coefficients(power_sums: Sequence[int], count: int) -> List[int]:
    """Coefficients c_0..c_count of prod(1 - g T) from p_1..p_count (i c_i = -sum p_j c_{i-j})."""
    c = [1]
    for i in range(1, count + 1):
        total = -sum(power_sums[j - 1] * c[i - j] for j in range(1, i + 1))
        if total % i:
            raise ValueError(f"Newton step {i} is not integral")
        c.append(total // i)
    return c


def power_sums_from_coefficients(coeffs: Sequence[int], count: int) -> List[int]:
    """p_1..p_count of the inverse roots of sum c_i T^i (c_0 = 1)."""
    n_coeffs = len(coeffs)
    p: List[int] = []
    for n in range(1, count + 1):
        c_n = coeffs[n] if n < n_coeffs else 0
        total = -n * c_n - sum(p[j - 1] * (coeffs[n - j] if n - j < n_coeffs else 0) for j in range(1, n))
        p.append(total)
    return p


@dataclass(frozen=True)
class CyclotomicBlock:
    """The factor (1 - sign*(qT)^order)^multiplicity."""

    order: int
    multiplicity: int
    sign: int = 1

    @property
    def degree(self) -> int:
        return self.order * self.multiplicity


@dataclass(frozen=True)
class LPolynomial:
    """L(E/K, T) in 1 + T Z[T]; coefficients lowest degree first.

    Closed forms may carry only their blocks when expanding would be too large.
    """

    q: int
    degree: int
    coeffs: Optional[Tuple[int, ...]] = None
    blocks: Tuple[CyclotomicBlock, ...] = ()
    source: str = "euler-product"

    def __post_init__(self):
        if self.coeffs is not None:
            if not self.coeffs or self.coeffs[0] != 1:
                raise ValueError("L-polynomial must have constant term 1")
            if len(self.coeffs) - 1 != self.degree:
                raise ValueError("coefficient count does not match degree")

    @property
    def is_expanded(self) -> bool:
        return self.coeffs is not None

    def power_sums(self, count: int) -> List[int]:
        if self.coeffs is None:
            raise ValueError("power sums need expanded coefficients")
        return power_sums_from_coefficients(self.coeffs, count)

    def to_json(self) -> Dict:
        data: Dict = {"q": self.q, "degree": self.degree, "source": self.source}
        if self.coeffs is not None:
            data["coeffs"] = list(self.coeffs)
        if self.blocks:
            data["blocks"] = [
                {"order": b.order, "multiplicity": b.multiplicity, "sign": b.sign} for b in self.blocks
            ]
        return data


@dataclass
class Spectrum:
    """Inverse zeros q e^{i theta} of an L-polynomial, grouped by angle."""

    q: int
    degree: int
    epsilon: int
    rank: int
    m_minus_q: int
    angles: List[Tuple[float, int]]
    forced_zeros: List[int] = field(default_factory=list)
    purity_residual: float = 0.0
    exact_turns: Optional[List[Tuple[Fraction, int]]] = None

    @property
    def is_exact(self) -> bool:
        return self.exact_turns is not None

    def nontrivial_angles(self) -> List[Tuple[float, int]]:
        """Distinct angles strictly between 0 and pi."""
        return [(t, m) for t, m in self.angles if 0.0 < t < math.pi and not math.isclose(t, math.pi)]

    @property
    def nontrivial_angle_count(self) -> int:
        return len(self.nontrivial_angles())

    def nonzero_angles(self) -> List[Tuple[float, int]]:
        """Distinct angles in (0, 2 pi), pi included."""
        return [(t, m) for t, m in self.angles if t > 0.0]

    def to_json(self) -> Dict:
        data = {
            "q": self.q,
            "degree": self.degree,
            "epsilon": self.epsilon,
            "rank": self.rank,
            "m_minus_q": self.m_minus_q,
            "angles": [[float(f"{t:.15g}"), m] for t, m in self.angles],
            "forced_zeros": list(self.forced_zeros),
            "purity_residual": self.purity_residual,
        }
        if self.exact_turns is not None:
            data["exact_turns"] = [[f"{t.numerator}/{t.denominator}", m] for t, m in self.exact_turns]
        return data


@dataclass
class LIDiagnostic:
    verdict: str
    flagged_angles: List[Tuple[float, Fraction]] = field(default_factory=list)
    reasons: List[str] = field(default_factory=list)

    @property
    def violated(self) -> bool:
        return self.verdict.startswith("LI violated")

    def to_json(self) -> Dict:
        return {
            "verdict": self.verdict,
            "flagged_angles": [
                [float(f"{t:.15g}"), f"{r.numerator}/{r.denominator}"] for t, r in self.flagged_angles
            ],
            "reasons": list(self.reasons),
        }


@dataclass(frozen=True)
class Aggregate:
    """A(d): sum of a_v over good places of degree d."""

    degree: int
    value: int
    source: str  # "counted" or "recovered"
