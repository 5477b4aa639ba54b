import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from sympy import divisors, mobius

from .lpoly_engine import PlaceLedger
from ..models.lfunction import Spectrum
from ..models.qsqrt import QSqrtValue, sqrt_power
from ..models.race import DensityMethod, DensityReport, MeanVariance, RaceMethod, RaceSeries
from ..utils.errors import InvalidInputError

logger = logging.getLogger(__name__)


def c_pm(x: int, q: int) -> QSqrtValue:
    """q/(q-1) for even X, sqrt(q)/(q-1) for odd X."""
    if x < 1:
        raise InvalidInputError(f"X must be >= 1, got {x}")
    if x % 2 == 0:
        return QSqrtValue.rational(Fraction(q, q - 1), q)
    return QSqrtValue(Fraction(0), Fraction(1, q - 1), q)


def _c_pm_float(x: np.ndarray, q: int) -> np.ndarray:
    return np.where(x % 2 == 0, q / (q - 1), math.sqrt(q) / (q - 1))


# --- direct side ---

def t_direct(ledger: PlaceLedger, x: int, exact: bool = False) -> Union[float, QSqrtValue]:
    """-(X / q^{X/2}) * sum_{deg v <= X, good} a_v / q^{deg v / 2}."""
    if x < 1:
        raise InvalidInputError(f"X must be >= 1, got {x}")
    q = ledger.curve.q
    total = QSqrtValue.rational(0, q)
    for d in range(1, x + 1):
        a = ledger.aggregate(d).value
        if a:
            total = total + sqrt_power(q, -(x + d)) * a
    value = total * (-x)
    return value if exact else float(value)


def t_direct_series(ledger: PlaceLedger, max_x: int) -> RaceSeries:
    """T_direct for X = 1..max_x, tagging each X by whether recovered aggregates entered it."""
    q = ledger.curve.q
    values: List[float] = []
    sources: List[str] = []
    partial = QSqrtValue.rational(0, q)
    recovered = False
    for x in range(1, max_x + 1):
        agg = ledger.aggregate(x)
        recovered = recovered or agg.source == "recovered"
        # partial holds sum_{d <= X} A(d) q^{-d/2}
        partial = partial + sqrt_power(q, -x) * agg.value
        values.append(float(partial * sqrt_power(q, -x) * (-x)))
        sources.append("recovered" if recovered else "counted")
    return RaceSeries(RaceMethod.DIRECT, values, sources)


# --- explicit side ---

def ramanujan_sum(n: int, j: int) -> int:
    """c_n(j) = sum over primitive n-th roots w of w^j."""
    g = math.gcd(n, j)
    return sum(int(mobius(n // d)) * d for d in divisors(g))


def orbit_multiplicities(spec: Spectrum) -> Dict[int, int]:
    """For an exact spectrum: order n of each Galois orbit of nonzero angles and its multiplicity."""
    if spec.exact_turns is None:
        raise InvalidInputError("spectrum angles are not known to be rational multiples of pi")
    orbits: Dict[int, int] = {}
    for turn, m in spec.exact_turns:
        if turn == 0:
            continue
        n = turn.denominator
        if orbits.setdefault(n, m) != m:
            raise InvalidInputError(f"angles of order {n} carry unequal multiplicities")
    return orbits


def _orbit_term(q: int, n: int, x: int) -> QSqrtValue:
    """sum over primitive n-th roots w of w^X / (1 - q^{-1/2} / w)."""
    total = QSqrtValue.rational(0, q)
    for r in range(n):
        c = ramanujan_sum(n, x - r)
        if c:
            total = total + sqrt_power(q, -r) * c
    return total / (1 - sqrt_power(q, -n))


def _q_term(spec: Spectrum, x: int) -> QSqrtValue:
    q = spec.q
    return spec.rank / (1 - sqrt_power(q, -1)) - c_pm(x, q)


def t_explicit_exact(spec: Spectrum, x: int) -> QSqrtValue:
    total = _q_term(spec, x)
    for n, m in orbit_multiplicities(spec).items():
        total = total + _orbit_term(spec.q, n, x) * m
    return total


def t_explicit_values(spec: Spectrum, xs: Sequence[int]) -> np.ndarray:
    """Q_E(X) + R_E(X) in floating point for many X."""
    x = np.asarray(xs, dtype=np.int64)
    s = spec.q ** -0.5
    values = spec.rank / (1 - s) - _c_pm_float(x, spec.q)
    for theta, m in spec.nonzero_angles():
        weight = m / (1 - s * np.exp(-1j * theta))
        values = values + np.real(weight * np.exp(1j * theta * x))
    return values


def t_explicit(spec: Spectrum, x: int, exact: bool = False) -> Union[float, QSqrtValue]:
    if x < 1:
        raise InvalidInputError(f"X must be >= 1, got {x}")
    if exact:
        return t_explicit_exact(spec, x)
    return float(t_explicit_values(spec, [x])[0])


def explicit_series(spec: Spectrum, max_x: int) -> RaceSeries:
    values = t_explicit_values(spec, np.arange(1, max_x + 1))
    return RaceSeries(RaceMethod.EXPLICIT, [float(v) for v in values])


def mean_variance(spec: Spectrum) -> MeanVariance:
    """Moments of the limiting distribution; the corrected variance removes the -q resonance."""
    q = spec.q
    root = math.sqrt(q)
    s = 1 / root
    mean = (spec.rank - 0.5) / (1 - s)
    variance = 0.25 * (root / (root + 1)) ** 2
    for theta, m in spec.nonzero_angles():
        variance += m * m / abs(1 - s * complex(math.cos(theta), -math.sin(theta))) ** 2
    corrected = variance - spec.m_minus_q * q / (root + 1) ** 2
    return MeanVariance(mean=mean, variance_uncorrected=variance, variance_corrected=corrected)


def time_average_moments(spec: Spectrum, horizon: int) -> MeanVariance:
    """Empirical mean and variance of T_explicit over X = 1..horizon."""
    values = t_explicit_values(spec, np.arange(1, horizon + 1))
    var = float(np.var(values))
    return MeanVariance(mean=float(np.mean(values)), variance_uncorrected=var, variance_corrected=var)


# --- densities ---

def periodic_density(values: Sequence[QSqrtValue], period: int) -> DensityReport:
    """Density from exact values on the classes X = 1..period, reported by X mod period."""
    pos = neg = 0
    boundary: List[int] = []
    for x, value in enumerate(values, start=1):
        sign = value.sign()
        if sign > 0:
            pos += 1
        elif sign < 0:
            neg += 1
        else:
            boundary.append(x % period)
    boundary.sort()
    if boundary:
        lo, hi = Fraction(pos, period), 1 - Fraction(neg, period)
        logger.info("periodic part vanishes on %d of %d classes; density reported as an interval",
                    len(boundary), period)
        return DensityReport(DensityMethod.EXACT_PERIODIC, interval=(lo, hi),
                             period=period, boundary_classes=boundary)
    return DensityReport(DensityMethod.EXACT_PERIODIC, value=Fraction(pos, period), period=period)


def exact_period(spec: Spectrum) -> int:
    period = 2
    for n in orbit_multiplicities(spec):
        period = period * n // math.gcd(period, n)
    return period


def density_exact_periodic(spec: Spectrum) -> DensityReport:
    period = exact_period(spec)
    values = [t_explicit_exact(spec, x) for x in range(1, period + 1)]
    return periodic_density(values, period)


def density_time_average(series: RaceSeries, horizon: Optional[int] = None) -> DensityReport:
    horizon = horizon or series.horizon
    if horizon > series.horizon:
        raise InvalidInputError(f"series has {series.horizon} terms, {horizon} requested")
    values = np.asarray(series.values[:horizon])
    positive = int(np.count_nonzero(values > 0))
    return DensityReport(DensityMethod.TIME_AVERAGE, estimate=positive / horizon, samples=horizon)


def density(source: Union[RaceSeries, Spectrum], mode: Union[str, DensityMethod] = DensityMethod.EXACT_PERIODIC,
            horizon: Optional[int] = None) -> DensityReport:
    mode = DensityMethod(mode)
    if mode is DensityMethod.EXACT_PERIODIC:
        if not isinstance(source, Spectrum):
            raise InvalidInputError("exact-periodic density needs a spectrum")
        return density_exact_periodic(source)
    if mode is DensityMethod.TIME_AVERAGE:
        if isinstance(source, Spectrum):
            if horizon is None:
                raise InvalidInputError("time-average density needs a horizon M")
            source = explicit_series(source, horizon)
        return density_time_average(source, horizon)
    raise InvalidInputError(f"density mode {mode.value} belongs to the limit-law engine")
