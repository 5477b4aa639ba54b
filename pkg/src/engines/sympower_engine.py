import logging
import math
import warnings
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import eval_chebyu
from sympy import divisors

from .lpoly_engine import PlaceLedger, trace_power
from .race_engine import c_pm
from ..models.curve import CurveModel
from ..models.sympower import FourierProfile, MmEstimate, SymPowerRow, SymPowerSum
from ..utils.errors import FfraceError, InvalidInputError, QuadratureError

logger = logging.getLogger(__name__)

TestFunction = Union[Callable[[np.ndarray], np.ndarray], FourierProfile]


def chebyshev_u(m: int, theta):
    """U_m(theta) = sin((m+1) theta) / sin(theta), continuous at 0 and pi."""
    if m < 0:
        raise InvalidInputError(f"m must be >= 0, got {m}")
    value = eval_chebyu(m, np.cos(theta))
    return float(value) if np.ndim(value) == 0 else value


def double_angle_expand(m: int) -> List[int]:
    """Coefficients of U_m(2 theta) over U_{2m}, U_{2m-2}, ..., U_2, U_0: alternating signs."""
    if m < 0:
        raise InvalidInputError(f"m must be >= 0, got {m}")
    return [(-1) ** j for j in range(m + 1)]


def fourier_coeff(V: Callable[[float], float], m: int, tol: float = 1e-10) -> float:
    """<V, U_m> = (2/pi) int_0^pi V(theta) U_m(theta) sin^2(theta) dtheta."""
    if m < 0:
        raise InvalidInputError(f"m must be >= 0, got {m}")

    def integrand(theta: float) -> float:
        return float(V(theta)) * math.sin((m + 1) * theta) * math.sin(theta)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, err = quad(integrand, 0.0, math.pi, epsabs=tol, epsrel=tol, limit=200)
        except IntegrationWarning as e:
            raise QuadratureError(f"quadrature for <V, U_{m}> did not converge: {e}", m=m) from e
    return 2 / math.pi * value


def fourier_profile(V: Callable[[float], float], m_cut: int,
                    decay_exponent: Optional[float] = None) -> FourierProfile:
    return FourierProfile([fourier_coeff(V, m) for m in range(m_cut + 1)], decay_exponent)


def evaluate(V: TestFunction, theta):
    if isinstance(V, FourierProfile):
        theta = np.asarray(theta, dtype=float)
        total = np.zeros_like(theta)
        for m, coeff in enumerate(V.coefficients):
            if coeff:
                total = total + coeff * eval_chebyu(m, np.cos(theta))
        return total
    return V(theta)


# --- symmetric-power sums from place data ---

def _complete_homogeneous(s: int, p: int, m: int) -> int:
    """h_m(A, B) for A + B = s, AB = p, via h_m = s h_{m-1} - p h_{m-2}."""
    prev, cur = 1, s
    if m == 0:
        return 1
    for _ in range(m - 1):
        prev, cur = cur, s * cur - p * prev
    return cur


def _local_sym(a_v: int, q_v: int, m: int, k: int) -> int:
    """sum_j (alpha^{m-j} beta^j)^k at a good place."""
    return _complete_homogeneous(trace_power(a_v, q_v, k), q_v ** k, m)


def _ledger(curve: CurveModel, ledger: Optional[PlaceLedger]) -> PlaceLedger:
    if ledger is None:
        return PlaceLedger(curve)
    if ledger.curve is not curve:
        raise InvalidInputError("ledger belongs to a different curve")
    return ledger


def sym_power_sums(curve: CurveModel, m: int, n: int, ledger: Optional[PlaceLedger] = None) -> SymPowerSum:
    """S'_{m,N} = sum_{d | N} d (sum over places of degree d of the k = N/d local power sums)."""
    if m < 1 or n < 1:
        raise InvalidInputError(f"m and N must be >= 1, got m={m}, N={n}")
    ledger = _ledger(curve, ledger)
    q = curve.q
    scale = q ** ((m + 1) * n)
    if m == 1 and not ledger.is_countable(n) and ledger.lpoly is not None and ledger.lpoly.coeffs is not None:
        s_prime = -ledger.lpoly.power_sums(n)[-1]
        return SymPowerSum(m, n, s_prime, -s_prime / math.sqrt(scale), "recovered")
    total = 0
    for d in divisors(n):
        k = n // d
        good = sum(_local_sym(r.a_v, r.q_v, m, k) for r in ledger.reductions(d) if not r.type.is_bad)
        total += d * (good + ledger.bad_power_sum(d, m * k))
    return SymPowerSum(m, n, total, -total / math.sqrt(scale))


def chebyshev_place_sum(ledger: PlaceLedger, m: int, n: int) -> float:
    """sum over good places of degree N of U_m(theta_v), from exact local data."""
    if m == 1 and not ledger.is_countable(n):
        return ledger.aggregate(n).value / ledger.curve.q ** (n / 2)
    return sum(_local_sym(r.a_v, r.q_v, m, 1) / r.q_v ** (m / 2)
               for r in ledger.reductions(n) if not r.type.is_bad)


def explicit_formula_residual(curve: CurveModel, m: int, n: int, ledger: Optional[PlaceLedger] = None) -> float:
    """(N/q^{N/2}) sum U_m(theta_v) minus [(-1)^{m+1} E(N) - sum_j e^{i N theta_{m,j}}], E(N) = 1 for even N."""
    ledger = _ledger(curve, ledger)
    lhs = n / curve.q ** (n / 2) * chebyshev_place_sum(ledger, m, n)
    return lhs - bracket(curve, m, n, ledger)


def bracket(curve: CurveModel, m: int, n: int, ledger: Optional[PlaceLedger] = None) -> float:
    even = 1 if n % 2 == 0 else 0
    return (-1) ** (m + 1) * even - sym_power_sums(curve, m, n, ledger).normalized


def sympower_table(curve: CurveModel, m: int, max_n: int, ledger: Optional[PlaceLedger] = None) -> List[SymPowerRow]:
    """Rows (m, N, S', residual) for N = 1..max_n; failures past the work bound end up in the row."""
    ledger = _ledger(curve, ledger)
    rows: List[SymPowerRow] = []
    for n in range(1, max_n + 1):
        try:
            s = sym_power_sums(curve, m, n, ledger)
            residual = explicit_formula_residual(curve, m, n, ledger)
            rows.append(SymPowerRow(m, n, s.s_prime, s.normalized, residual, s.source))
        except FfraceError as e:
            logger.warning("sym^%d at N=%d skipped: %s", m, n, e.message)
            rows.append(SymPowerRow(m, n, 0, math.nan, error=e.message))
    return rows


def residual_decay_slope(residuals: Dict[int, float]) -> float:
    """Least-squares slope of log|residual| against N."""
    ns = np.array(sorted(residuals), dtype=float)
    logs = np.log(np.abs([residuals[int(n)] for n in ns]) + 1e-300)
    slope, _ = np.polyfit(ns, logs, 1)
    return float(slope)


def fitted_error_constant(residuals: Dict[int, float], m: int, q: int) -> float:
    """Smallest C with |residual(N)| <= C m^2 q^{-N/6} on the given N."""
    return max(abs(r) / (m * m * q ** (-n / 6)) for n, r in residuals.items())


def place_sum_constant(ledger: PlaceLedger, ms: Sequence[int], ns: Sequence[int]) -> float:
    """Smallest C_E with |sum_{deg v = N} U_m(theta_v)| <= C_E m q^{N/2} / N over the grid."""
    q = ledger.curve.q
    return max(abs(chebyshev_place_sum(ledger, m, n)) * n / (m * q ** (n / 2)) for m in ms for n in ns)


# --- general test functions ---

def t_v_direct(ledger: PlaceLedger, V: TestFunction, x: int) -> float:
    """T_V(X) = (X / q^{X/2}) sum over good places of degree <= X of V(theta_v)."""
    if x < 1:
        raise InvalidInputError(f"X must be >= 1, got {x}")
    total = 0.0
    for d in range(1, x + 1):
        thetas = np.array([r.theta_v for r in ledger.reductions(d) if not r.type.is_bad])
        if len(thetas):
            total += float(np.sum(evaluate(V, thetas)))
    return x / ledger.curve.q ** (x / 2) * total


def q_v(profile: FourierProfile, x: int, q: int, mm_values: Dict[int, float]) -> float:
    """Q_V(X) = sum_m ((-1)^{m+1} c_pm(X) - sqrt(q)/(sqrt(q)-1) M_m(1)) V_m."""
    if not profile.is_centered:
        raise InvalidInputError("Q_V needs <V, U_0> = 0", v0=profile.coefficients[0])
    c = float(c_pm(x, q))
    root = math.sqrt(q)
    total = 0.0
    for m in profile.support():
        if m not in mm_values:
            raise InvalidInputError(f"no M_{m}(1) value supplied", m=m)
        total += ((-1) ** (m + 1) * c - root / (root - 1) * mm_values[m]) * profile.coefficient(m)
    return total


def estimate_mm(curve: CurveModel, m: int, n_max: int, ledger: Optional[PlaceLedger] = None) -> MmEstimate:
    """Cesaro mean of sum_j cos(N theta_{m,j}) over N <= n_max."""
    ledger = _ledger(curve, ledger)
    values = [sym_power_sums(curve, m, n, ledger).normalized for n in range(1, n_max + 1)]
    averages = list(np.cumsum(values) / np.arange(1, n_max + 1))
    upper = values[n_max // 2:]
    estimate = averages[-1]
    half = float(np.mean(upper))
    if abs(estimate - half) > 0.25:
        logger.info("M_%d(1) estimate has not settled: %.3f over all N, %.3f over the upper half",
                    m, estimate, half)
    return MmEstimate(m=m, n_max=n_max, estimate=float(estimate), half_estimate=half,
                      averages=[float(a) for a in averages])
