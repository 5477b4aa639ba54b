import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Poly, cyclotomic_poly, symbols, totient
from sympy.polys.polytools import factor_list

from .curve_engine import _finite_bad_parts, conductor_degree, reduce_at
from .places import places_of_degree
from ..models.curve import CurveModel, ReductionData
from ..models.lfunction import (
    Aggregate, LIDiagnostic, LPolynomial, Spectrum, newton_coefficients, power_sums_from_coefficients,
)
from ..utils.config import Config
from ..utils.errors import (
    FunctionalEquationError, InvalidInputError, PurityError, StabilizationError, WorkBoundExceeded,
)

logger = logging.getLogger(__name__)

_z = symbols("z")


def trace_power(a: int, q_v: int, k: int) -> int:
    """alpha^k + beta^k where alpha + beta = a and alpha*beta = q_v."""
    if k == 0:
        return 2
    prev, cur = 2, a
    for _ in range(k - 1):
        prev, cur = cur, a * cur - q_v * prev
    return cur


class PlaceLedger:
    """Reductions of one curve cached by place degree, with the sums built from them.

    A(d) above the counting bound is recovered from an attached L-polynomial when possible.
    """

    def __init__(self, curve: CurveModel, max_residue_field: Optional[int] = None,
                 max_place_degree: Optional[int] = None):
        self.curve = curve
        self.max_residue_field = max_residue_field or Config.MAX_RESIDUE_FIELD
        self.max_place_degree = max_place_degree or Config.MAX_PLACE_DEGREE
        self.lpoly: Optional[LPolynomial] = None
        self._rows: Dict[int, List[ReductionData]] = {}
        self._recovered: Dict[int, int] = {}
        self._bad_parts = None

    @property
    def max_countable_degree(self) -> int:
        q = self.curve.q
        d = 0
        while d < self.max_place_degree and q ** (d + 1) <= self.max_residue_field:
            d += 1
        return d

    def is_countable(self, d: int) -> bool:
        return d <= self.max_countable_degree

    def reductions(self, d: int) -> List[ReductionData]:
        if d not in self._rows:
            if not self.is_countable(d):
                raise WorkBoundExceeded(
                    f"places of degree {d} over F_{self.curve.q} exceed the residue-field bound",
                    bound="max_residue_field", limit=self.max_residue_field, requested=self.curve.q ** d,
                )
            self._rows[d] = [reduce_at(self.curve, pl, self.max_residue_field)
                             for pl in places_of_degree(self.curve.ctx, d)]
            logger.debug("counted %d places of degree %d", len(self._rows[d]), d)
        return self._rows[d]

    def good_power_sum(self, d: int, k: int) -> int:
        """sum over good v of degree d of alpha_v^k + beta_v^k."""
        return sum(trace_power(r.a_v, r.q_v, k) for r in self.reductions(d) if not r.type.is_bad)

    def bad_power_sum(self, d: int, k: int) -> int:
        if self.is_countable(d):
            return sum(r.a_v ** k for r in self.reductions(d) if r.type.is_bad)
        return self._uncounted_bad_sum(d, k)

    def _uncounted_bad_sum(self, d: int, k: int) -> int:
        if self._bad_parts is None:
            self._bad_parts = _finite_bad_parts(self.curve)
        part = self._bad_parts.get(d)
        if part is None:
            return 0
        multiplicative, _ = part
        if not multiplicative.is_constant():
            raise WorkBoundExceeded(
                f"multiplicative places of degree {d} lie beyond the residue-field bound",
                bound="max_residue_field", limit=self.max_residue_field, requested=self.curve.q ** d,
            )
        # additive places contribute a_v = 0
        return 0

    def place_sum(self, n: int) -> int:
        """-p_n = sum_{d | n} d * (sum over places of degree d of their k = n/d power sums)."""
        total = 0
        for d in range(1, n + 1):
            if n % d:
                continue
            k = n // d
            total += d * (self.good_power_sum(d, k) + self.bad_power_sum(d, k))
        return total

    def attach(self, lpoly: LPolynomial) -> None:
        self.lpoly = lpoly
        self._recovered.clear()

    def aggregate(self, d: int) -> Aggregate:
        """A(d) = sum of a_v over good places of degree d."""
        if self.is_countable(d):
            return Aggregate(d, self.good_power_sum(d, 1), "counted")
        if d not in self._recovered:
            self._recovered[d] = self._recover(d)
        return Aggregate(d, self._recovered[d], "recovered")

    def _recover(self, n: int) -> int:
        D = self.max_countable_degree
        if self.lpoly is None or self.lpoly.coeffs is None:
            raise WorkBoundExceeded(
                f"A({n}) needs counting beyond the residue-field bound and no L-polynomial is attached",
                bound="max_residue_field", limit=self.max_residue_field, requested=self.curve.q ** n,
            )
        if n > 2 * D:
            raise WorkBoundExceeded(
                f"A({n}) needs places of degree {n // 2} which are not counted",
                bound="max_residue_field", limit=self.max_residue_field, requested=self.curve.q ** (n // 2),
            )
        p_n = self.lpoly.power_sums(n)[-1]
        rest = sum(d * (self.good_power_sum(d, n // d) + self.bad_power_sum(d, n // d))
                   for d in range(1, n) if n % d == 0)
        numerator = -p_n - rest - n * self.bad_power_sum(n, 1)
        if numerator % n:
            raise StabilizationError(f"recovered A({n}) is not integral", numerator=numerator)
        logger.debug("A(%d) recovered from the L-polynomial", n)
        return numerator // n


def zero_power_sums(curve: CurveModel, n: int, ledger: Optional[PlaceLedger] = None) -> int:
    """p_n = sum_j gamma_j^n from place data, exact."""
    ledger = ledger or PlaceLedger(curve)
    return -ledger.place_sum(n)


def _degree_for(curve: CurveModel, degree_hint: Optional[int]) -> int:
    if degree_hint is not None:
        if degree_hint < 0:
            raise InvalidInputError(f"degree hint must be >= 0, got {degree_hint}")
        return degree_hint
    return conductor_degree(curve).analytic_degree


def _symmetric_completion(known: Sequence[int], n: int, q: int, epsilon: int) -> Optional[List[int]]:
    """Fill c_0..c_n from c_0..c_D using c_{n-i} = eps q^{n-2i} c_i; None if the known part disagrees."""
    D = len(known) - 1
    coeffs: List[Optional[int]] = [None] * (n + 1)
    for i in range(min(D, n) + 1):
        coeffs[i] = known[i]
    for i in range(n // 2 + 1):
        j = n - i
        if coeffs[i] is None:
            return None
        mirrored = epsilon * q ** (n - 2 * i) * coeffs[i]
        if coeffs[j] is None:
            coeffs[j] = mirrored
        elif coeffs[j] != mirrored:
            return None
    return [int(c) for c in coeffs]


def _purity_residual(coeffs: Sequence[int], q: int) -> float:
    """max | |gamma|/q - 1 | over the non-real-axis part of the roots."""
    rest, _ = _strip(list(coeffs), q)
    rest, _ = _strip(rest, -q)
    return _numeric_angles(rest, q, Config.ANGLE_TOL)[1] / q


def lpolynomial(curve: CurveModel, degree_hint: Optional[int] = None,
                ledger: Optional[PlaceLedger] = None) -> LPolynomial:
    """L(E/K, T) from place power sums through Newton's identities.

    Degrees past the counting bound are completed through the functional equation.
    """
    n = _degree_for(curve, degree_hint)
    ledger = ledger or PlaceLedger(curve)
    q = curve.q
    D = ledger.max_countable_degree
    if n > 0 and D < -(-n // 2):
        raise WorkBoundExceeded(
            f"degree {n} needs places of degree {-(-n // 2)} but only {D} fit the residue-field bound",
            bound="max_residue_field", limit=ledger.max_residue_field, requested=q ** (-(-n // 2)),
        )
    power_sums = [-ledger.place_sum(j) for j in range(1, D + 1)]
    known = newton_coefficients(power_sums, D)

    if D >= n:
        coeffs = known[:n + 1]
        if any(known[n + 1:]):
            raise StabilizationError(
                f"place data does not stabilise at degree {n}: wrong degree or non-minimal model",
                degree=n, extra=known[n + 1:],
            )
        if D < n + 2:
            logger.info("stabilisation checked through p_%d only (residue-field bound)", D)
        lpoly = LPolynomial(q=q, degree=n, coeffs=tuple(coeffs), source="euler-product")
    else:
        lpoly = _complete(known, power_sums, n, q)

    functional_equation_sign(lpoly)
    ledger.attach(lpoly)
    logger.info("L-polynomial of %s: degree %d over F_%d", curve.name or "curve", n, q)
    return lpoly


def _complete(known: List[int], power_sums: List[int], n: int, q: int) -> LPolynomial:
    D = len(known) - 1
    candidates = []
    for epsilon in (1, -1):
        coeffs = _symmetric_completion(known, n, q, epsilon)
        if coeffs is None:
            continue
        if power_sums_from_coefficients(coeffs, D) != list(power_sums):
            continue
        candidates.append((epsilon, coeffs))
    if len(candidates) == 2:
        pure = [c for c in candidates if _purity_residual(c[1], q) <= 1e-6]
        if len(pure) == 1:
            candidates = pure
    if not candidates:
        raise StabilizationError(
            f"no self-dual polynomial of degree {n} matches the place data: wrong degree or non-minimal model",
            degree=n,
        )
    if len(candidates) > 1:
        raise StabilizationError(f"functional-equation sign undetermined at degree {n}", degree=n)
    epsilon, coeffs = candidates[0]
    logger.info("degree %d completed from counts through degree %d (sign %+d)", n, D, epsilon)
    return LPolynomial(q=q, degree=n, coeffs=tuple(coeffs), source="functional-equation")


def functional_equation_sign(lpoly: LPolynomial) -> int:
    """epsilon with L(T) = epsilon (qT)^N L(1/(q^2 T)), checked coefficient by coefficient."""
    c, n, q = lpoly.coeffs, lpoly.degree, lpoly.q
    for epsilon in (1, -1):
        if all(c[n - i] == epsilon * q ** (n - 2 * i) * c[i] for i in range(n // 2 + 1)):
            return epsilon
    raise FunctionalEquationError("not self-dual: invalid L-polynomial", degree=n)


def _divide_linear(coeffs: List[int], root_inverse: int) -> Optional[List[int]]:
    """Exact quotient by (1 - g T), or None when it does not divide."""
    if len(coeffs) <= 1:
        return None
    out = [coeffs[0]]
    for i in range(1, len(coeffs) - 1):
        out.append(coeffs[i] + root_inverse * out[-1])
    if coeffs[-1] + root_inverse * out[-1] != 0:
        return None
    return out


def _strip(coeffs: List[int], root_inverse: int) -> Tuple[List[int], int]:
    count = 0
    while True:
        quotient = _divide_linear(coeffs, root_inverse)
        if quotient is None:
            return coeffs, count
        coeffs, count = quotient, count + 1


def _cyclotomic_index(factor: Poly) -> int:
    n_deg = factor.degree()
    n = 1
    while True:
        if totient(n) == n_deg and Poly(cyclotomic_poly(n, _z), _z) == factor:
            return n
        n += 1
        if n > 4 * n_deg * n_deg + 8:
            raise ValueError("cyclotomic index not found")


def _exact_turns(rest: List[int], q: int) -> Optional[List[Tuple[Fraction, int]]]:
    """Angles as fractions of a turn when rest(z/q) is an integer product of cyclotomic polynomials."""
    normalized = []
    for i, c in enumerate(rest):
        if c % q ** i:
            return None
        normalized.append(c // q ** i)
    if len(normalized) == 1:
        return []
    poly = Poly(list(reversed(normalized)), _z)
    _, factors = factor_list(poly)
    turns: Dict[Fraction, int] = {}
    for f, mult in factors:
        f = Poly(f, _z)
        if f.LC() < 0:
            f = -f
        if not f.is_cyclotomic:
            return None
        n = _cyclotomic_index(f)
        for j in range(1, n):
            if math.gcd(j, n) == 1:
                t = Fraction(j, n)
                turns[t] = turns.get(t, 0) + mult
    return sorted(turns.items())


def _numeric_angles(rest: List[int], q: int, angle_tol: float) -> Tuple[List[Tuple[float, int]], float]:
    """Angles of the squarefree factors found by numpy.roots, then grouped within angle_tol."""
    if len(rest) == 1:
        return [], 0.0
    _, factors = Poly(list(reversed(rest)), _z).sqf_list()
    raw: List[Tuple[float, int]] = []
    residual = 0.0
    for f, mult in factors:
        coeffs = list(reversed(f.all_coeffs()))
        if len(coeffs) <= 1:
            continue
        normalized = np.array([float(c) / q ** i for i, c in enumerate(coeffs)], dtype=float)
        zs = np.roots(normalized[::-1])
        # gamma = q / z
        residual = max(residual, q * float(np.max(np.abs(1.0 / np.abs(zs) - 1.0))))
        raw.extend((float(theta), int(mult)) for theta in np.mod(-np.angle(zs), 2 * math.pi))
    grouped: List[Tuple[float, int]] = []
    for theta, m in sorted(raw):
        if grouped and theta - grouped[-1][0] < angle_tol:
            grouped[-1] = (grouped[-1][0], grouped[-1][1] + m)
        else:
            grouped.append((theta, m))
    return grouped, residual


def forced_zeros(degree: int, epsilon: int, q: int) -> List[int]:
    if degree % 2:
        return [-epsilon * q]
    return [q, -q] if epsilon == -1 else []


def spectrum(lpoly: LPolynomial, purity_tol: Optional[float] = None,
             angle_tol: Optional[float] = None) -> Spectrum:
    """Inverse zeros grouped by angle; rank and m(-q) by exact division."""
    purity_tol = Config.PURITY_TOL if purity_tol is None else purity_tol
    angle_tol = Config.ANGLE_TOL if angle_tol is None else angle_tol
    if lpoly.coeffs is None:
        raise StabilizationError("spectrum needs expanded coefficients")
    q, n = lpoly.q, lpoly.degree
    epsilon = functional_equation_sign(lpoly)
    rest, rank = _strip(list(lpoly.coeffs), q)
    rest, m_minus = _strip(rest, -q)

    exact = _exact_turns(rest, q)
    if exact is not None:
        angles = [(float(2 * math.pi * t), m) for t, m in exact]
        residual = 0.0
        exact = ([(Fraction(0), rank)] if rank else []) + exact
        if m_minus:
            exact = sorted(exact + [(Fraction(1, 2), m_minus)])
    else:
        angles, residual = _numeric_angles(rest, q, angle_tol)
        if residual > purity_tol * q:
            raise PurityError(
                f"purity residual {residual:.3e} exceeds tolerance {purity_tol * q:.3e}",
                residual=residual,
            )
    if rank:
        angles.insert(0, (0.0, rank))
    if m_minus:
        angles.append((math.pi, m_minus))
    angles.sort()
    if sum(m for _, m in angles) != n:
        raise PurityError("angle multiplicities do not add up to the degree", degree=n)
    return Spectrum(
        q=q, degree=n, epsilon=epsilon, rank=rank, m_minus_q=m_minus,
        angles=angles, forced_zeros=forced_zeros(n, epsilon, q),
        purity_residual=residual, exact_turns=exact,
    )


def spectrum_from_angles(q: int, angles: Sequence[Tuple[float, int]], epsilon: Optional[int] = None,
                         angle_tol: Optional[float] = None) -> Spectrum:
    """A spectrum given directly by its angles (synthetic or read from a file).

    Without an explicit sign, epsilon = (-1)^rank, the sign of a real self-dual spectrum.
    """
    angle_tol = Config.ANGLE_TOL if angle_tol is None else angle_tol
    rank = sum(m for t, m in angles if abs(t) < angle_tol or abs(t - 2 * math.pi) < angle_tol)
    m_minus = sum(m for t, m in angles if abs(t - math.pi) < angle_tol)
    rest = [(float(t) % (2 * math.pi), m) for t, m in angles
            if min(abs(t), abs(t - math.pi), abs(t - 2 * math.pi)) >= angle_tol]
    grouped = ([(0.0, rank)] if rank else []) + sorted(rest) + ([(math.pi, m_minus)] if m_minus else [])
    n = sum(m for _, m in grouped)
    if epsilon is None:
        epsilon = -1 if rank % 2 else 1
    return Spectrum(q=q, degree=n, epsilon=epsilon, rank=rank, m_minus_q=m_minus,
                    angles=grouped, forced_zeros=forced_zeros(n, epsilon, q))


def _best_rational(x: float, max_den: int) -> Fraction:
    return Fraction(x).limit_denominator(max_den)


def diagnose_rational_angles(spec: Spectrum, denominator_bound: int = 64, tol: float = 1e-9) -> LIDiagnostic:
    """Heuristic linear-independence check: flags angles near rational multiples of pi."""
    flagged: List[Tuple[float, Fraction]] = []
    reasons: List[str] = []
    for theta, _ in spec.nonzero_angles():
        if math.isclose(theta, math.pi, abs_tol=tol):
            continue
        ratio = theta / math.pi
        r = _best_rational(ratio, denominator_bound)
        if abs(ratio - r) < tol:
            flagged.append((theta, r))
    if flagged:
        reasons.append(f"{len(flagged)} angle(s) within {tol:g} of a rational multiple of pi")
    if spec.rank >= 2:
        reasons.append(f"rank {spec.rank} >= 2")
    forced_minus = 1 if -spec.q in spec.forced_zeros else 0
    if spec.m_minus_q > forced_minus:
        reasons.append(f"m(-q) = {spec.m_minus_q} exceeds the forced multiplicity {forced_minus}")
    verdict = "LI violated (heuristic)" if reasons else "LI plausible (not proven)"
    return LIDiagnostic(verdict=verdict, flagged_angles=flagged, reasons=reasons)
