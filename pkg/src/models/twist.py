from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .lfunction import LIDiagnostic, LPolynomial, Spectrum
from .poly import PolyOverFq
from .race import DensityReport


@dataclass
class TwistSample:
    f: PolyOverFq
    lpoly: Optional[LPolynomial] = None
    spectrum: Optional[Spectrum] = None
    delta: Optional[DensityReport] = None
    li: Optional[LIDiagnostic] = None
    conductor_degree: Optional[int] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.spectrum is not None

    def as_row(self) -> Dict:
        spec = self.spectrum
        return {
            "f": repr(self.f),
            "L_degree": self.lpoly.degree if self.lpoly else None,
            "conductor_degree": self.conductor_degree,
            "rank": spec.rank if spec else None,
            "epsilon": spec.epsilon if spec else None,
            "m_minus_q": spec.m_minus_q if spec else None,
            "purity_residual": spec.purity_residual if spec else None,
            "delta": self.delta.point() if self.delta else None,
            "delta_se": self.delta.standard_error if self.delta else None,
            "li_verdict": self.li.verdict if self.li else None,
            "error": self.error,
        }


@dataclass
class SurveySummary:
    """Illustrative summary of a twist sample; the histogram is not a theorem check."""

    d: int
    q: int
    count: int
    failures: int
    l_degrees: List[int] = field(default_factory=list)
    rank_counts: Dict[int, int] = field(default_factory=dict)
    rank_at_most_one: float = 0.0
    histogram_edges: List[float] = field(default_factory=list)
    histogram_counts: List[int] = field(default_factory=list)
    max_deviation: Optional[float] = None
    deviation_constant: Optional[float] = None
    mean_sign_agreement: Optional[float] = None

    @property
    def degree_constant(self) -> bool:
        return len(set(self.l_degrees)) <= 1

    def to_json(self) -> Dict:
        return {
            "d": self.d,
            "q": self.q,
            "count": self.count,
            "failures": self.failures,
            "L_degrees": sorted(set(self.l_degrees)),
            "degree_constant": self.degree_constant,
            "rank_counts": {str(k): v for k, v in sorted(self.rank_counts.items())},
            "rank_at_most_one": self.rank_at_most_one,
            "histogram": {"edges": list(self.histogram_edges), "counts": list(self.histogram_counts)},
            "max_deviation": self.max_deviation,
            "deviation_constant": self.deviation_constant,
            "mean_sign_agreement": self.mean_sign_agreement,
            "note": "illustrative",
        }


@dataclass
class TwistSurvey:
    samples: List[TwistSample]
    summary: SurveySummary
    seed: int

    def to_json(self) -> Dict:
        return {
            "seed": self.seed,
            "summary": self.summary.to_json(),
            "twists": [s.as_row() for s in self.samples],
        }
