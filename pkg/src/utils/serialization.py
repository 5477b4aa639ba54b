import json
import math
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Sequence, TextIO, Tuple, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..models.lfunction import CyclotomicBlock, LPolynomial, Spectrum
from ..models.qsqrt import QSqrtValue
from ..models.race import DensityMethod, DensityReport
from .errors import ConfigError

Coefficient = Union[int, List[int]]


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: Union[str, int]) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational number: {text!r}") from e


def qsqrt_from_json(data: Dict[str, str], q: int) -> QSqrtValue:
    return QSqrtValue(parse_fraction(data["a"]), parse_fraction(data["b"]), q)


def angle(x: float) -> float:
    """An angle rounded to 15 significant digits."""
    return float(f"{x:.15g}")


# --- documents ---

class CurveDocument(BaseModel):
    """A curve file: either the five Weierstrass coefficients or a named family."""

    model_config = ConfigDict(extra="forbid")

    p: Optional[int] = None
    k: int = 1
    q: Optional[int] = None
    modulus: Optional[List[int]] = None
    name: Optional[str] = None
    a: Optional[List[List[Coefficient]]] = None
    family: Optional[Literal["ulmer", "legendre"]] = None
    d: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "CurveDocument":
        if self.p is None and self.q is None:
            raise ValueError("a curve needs p (and k) or q")
        if self.family is None and (self.a is None or len(self.a) != 5):
            raise ValueError("a curve needs five coefficient arrays a1, a2, a3, a4, a6, or a family")
        if self.family == "ulmer" and self.d is None:
            raise ValueError("the Ulmer family needs d")
        return self


class BlockDocument(BaseModel):
    order: int = Field(ge=1)
    multiplicity: int = Field(ge=1)
    sign: Literal[1, -1] = 1


class LPolyDocument(BaseModel):
    model_config = ConfigDict(extra="ignore")

    q: int = Field(ge=2)
    degree: int = Field(ge=0)
    coeffs: Optional[List[int]] = None
    blocks: List[BlockDocument] = Field(default_factory=list)
    source: str = "euler-product"


class SpectrumDocument(BaseModel):
    model_config = ConfigDict(extra="ignore")

    q: int = Field(ge=2)
    degree: int = Field(ge=0)
    epsilon: Literal[1, -1]
    rank: int = Field(ge=0)
    m_minus_q: int = Field(ge=0)
    angles: List[Tuple[float, int]]
    forced_zeros: List[int] = Field(default_factory=list)
    purity_residual: float = 0.0
    exact_turns: Optional[List[Tuple[str, int]]] = None


class DensityDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: Literal["exact-periodic", "time-average", "limit-law-mc", "limit-law-cf"]
    value: Optional[str] = None
    interval: Optional[Tuple[str, str]] = None
    estimate: Optional[float] = None
    standard_error: Optional[float] = None
    period: Optional[int] = None
    boundary_classes: List[int] = Field(default_factory=list)
    samples: Optional[int] = None
    seed: Optional[int] = None
    truncation: Optional[float] = None
    label: Optional[str] = None


class SurveyDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int
    summary: Dict[str, Any]
    twists: List[Dict[str, Any]]


SCHEMAS = {
    "curve": CurveDocument,
    "lpoly": LPolyDocument,
    "spectrum": SpectrumDocument,
    "density": DensityDocument,
    "survey": SurveyDocument,
}


def schema(name: str) -> Dict:
    if name not in SCHEMAS:
        raise ConfigError(f"unknown schema {name!r}; choose from {sorted(SCHEMAS)}")
    return SCHEMAS[name].model_json_schema()


# --- readers ---

def read_json(path: str) -> Dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}", path=path) from e


def lpoly_from_json(data: Dict) -> LPolynomial:
    doc = LPolyDocument.model_validate(data)
    return LPolynomial(
        q=doc.q, degree=doc.degree,
        coeffs=tuple(doc.coeffs) if doc.coeffs is not None else None,
        blocks=tuple(CyclotomicBlock(b.order, b.multiplicity, b.sign) for b in doc.blocks),
        source=doc.source,
    )


def spectrum_from_json(data: Dict) -> Spectrum:
    doc = SpectrumDocument.model_validate(data)
    turns = None
    if doc.exact_turns is not None:
        turns = [(parse_fraction(t), m) for t, m in doc.exact_turns]
    return Spectrum(
        q=doc.q, degree=doc.degree, epsilon=doc.epsilon, rank=doc.rank, m_minus_q=doc.m_minus_q,
        angles=[(float(t), int(m)) for t, m in doc.angles], forced_zeros=list(doc.forced_zeros),
        purity_residual=doc.purity_residual, exact_turns=turns,
    )


def density_from_json(data: Dict) -> DensityReport:
    doc = DensityDocument.model_validate(data)
    return DensityReport(
        method=DensityMethod(doc.method),
        value=parse_fraction(doc.value) if doc.value is not None else None,
        interval=(parse_fraction(doc.interval[0]), parse_fraction(doc.interval[1])) if doc.interval else None,
        estimate=doc.estimate, standard_error=doc.standard_error, period=doc.period,
        boundary_classes=list(doc.boundary_classes), samples=doc.samples, seed=doc.seed,
        truncation=doc.truncation, label=doc.label,
    )


# --- writers ---

def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def dump_json(document: Dict, stream: TextIO) -> None:
    json.dump(_clean(document), stream, indent=2, ensure_ascii=False)
    stream.write("\n")


def write_csv(rows: Sequence[Dict], columns: List[str], stream: TextIO) -> None:
    """Rows as CSV with a fixed header; missing keys become empty cells."""
    frame = pd.DataFrame([_clean(r) for r in rows], columns=columns)
    frame.to_csv(stream, index=False, lineterminator="\n")
