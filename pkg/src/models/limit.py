from dataclasses import dataclass, field
from typing import Dict, List


@dataclass
class SpectralRV:
    """Limiting variable X_E = X_1 + X_2.

    X_1 takes v_even and v_odd with probability 1/2 each; X_2 is the sum of
    amplitude_j * cos(Theta_j) with independent uniform Theta_j.
    """

    v_even: float
    v_odd: float
    amplitudes: List[float]
    angles: List[float]
    q: int
    degree: int
    rank: int
    m_minus_q: int

    @property
    def k(self) -> int:
        return len(self.amplitudes)

    @property
    def mean(self) -> float:
        return (self.v_even + self.v_odd) / 2

    @property
    def variance(self) -> float:
        spread = (self.v_even - self.v_odd) / 2
        return spread * spread + sum(a * a for a in self.amplitudes) / 2

    @property
    def normalizer(self) -> float:
        """Scale taking X_E to Y_E = sqrt((q-1)/q) X_E / sqrt(N)."""
        return ((self.q - 1) / self.q) ** 0.5 / self.degree ** 0.5

    def to_json(self) -> Dict:
        return {
            "v_even": self.v_even,
            "v_odd": self.v_odd,
            "amplitudes": [float(f"{a:.15g}") for a in self.amplitudes],
            "angles": [float(f"{t:.15g}") for t in self.angles],
            "q": self.q,
            "degree": self.degree,
            "rank": self.rank,
            "m_minus_q": self.m_minus_q,
        }


@dataclass
class GaussianDistance:
    sup_distance: float
    bound: float
    constant: float
    samples: int
    seed: int

    @property
    def within_bound(self) -> bool:
        return self.sup_distance <= self.bound

    def to_json(self) -> Dict:
        return {
            "sup_distance": self.sup_distance,
            "bound": self.bound,
            "constant": self.constant,
            "samples": self.samples,
            "seed": self.seed,
        }


@dataclass
class BerryEsseenReport:
    """Numeric check of the two characteristic-function hypotheses for the circle part Y_2."""

    epsilon: float
    m_parameter: float
    parameters_valid: bool
    decay_holds: bool
    decay_worst_ratio: float
    quadratic_holds: bool
    quadratic_worst_ratio: float
    conclusion_scale: float
    notes: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.parameters_valid and self.decay_holds and self.quadratic_holds

    def to_json(self) -> Dict:
        return {
            "epsilon": self.epsilon,
            "M": self.m_parameter,
            "parameters_valid": self.parameters_valid,
            "decay_holds": self.decay_holds,
            "decay_worst_ratio": self.decay_worst_ratio,
            "quadratic_holds": self.quadratic_holds,
            "quadratic_worst_ratio": self.quadratic_worst_ratio,
            "conclusion_scale": self.conclusion_scale,
            "holds": self.holds,
            "notes": list(self.notes),
        }
