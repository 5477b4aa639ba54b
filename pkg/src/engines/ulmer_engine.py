import asyncio
import logging
import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from sympy import divisors, isprime, n_order, primerange, totient

from .lpoly_engine import forced_zeros
from .race_engine import c_pm, periodic_density
from ..models.lfunction import CyclotomicBlock, LPolynomial, Spectrum
from ..models.qsqrt import QSqrtValue, sqrt_power
from ..models.race import DensityReport
from ..models.ulmer import (
    ClosedForm, LimitPointResult, RegimeResult, RegimeStatus, ScanRow, TheoremReport, UlmerSpec,
)
from ..utils.config import Config
from ..utils.errors import BoundViolation, FfraceError, UlmerSpecError

logger = logging.getLogger(__name__)

FormLike = Union[str, ClosedForm]


def validate(p: int, k: int, d: int) -> UlmerSpec:
    """Check the parameters and find the least n with d | p^n + 1."""
    if not isinstance(p, int) or p < 3 or not isprime(p):
        raise UlmerSpecError(f"p must be an odd prime, got {p}", p=p)
    if k < 1:
        raise UlmerSpecError(f"k must be >= 1, got {k}", k=k)
    if d < 1:
        raise UlmerSpecError(f"d must be >= 1, got {d}", d=d)
    if d > Config.ULMER_MAX_D:
        raise UlmerSpecError(f"d={d} exceeds the configured maximum {Config.ULMER_MAX_D}", d=d)
    if d <= 2:
        return UlmerSpec(p, k, d, 1)
    if d % p == 0:
        raise UlmerSpecError(f"no n with {d} | {p}^n + 1", p=p, d=d)
    order = n_order(p, d)
    power = 1
    for n in range(1, order + 1):
        power = power * p % d
        if power == d - 1:
            return UlmerSpec(p, k, d, n)
    raise UlmerSpecError(f"no n with {d} | {p}^n + 1", p=p, d=d)


def epsilon_d(spec: UlmerSpec) -> int:
    q, d = spec.q, spec.d
    two = 1 if d % 2 == 0 and (q - 1) % 4 == 0 else 0
    if d % 3:
        three = 0
    else:
        three = 2 if (q - 1) % 3 == 0 else 1
    return two + three


def _form(form: FormLike) -> ClosedForm:
    return ClosedForm(form)


def blocks(spec: UlmerSpec, form: FormLike = ClosedForm.STATED) -> Tuple[CyclotomicBlock, ...]:
    """Factors (1 - sign (qT)^o)^m of L(E_d, T), merged by (o, sign)."""
    q, d = spec.q, spec.d
    merged: Dict[Tuple[int, int], int] = {}

    def add(order: int, mult: int, sign: int = 1) -> None:
        if mult:
            merged[(order, sign)] = merged.get((order, sign), 0) + mult

    if _form(form) is ClosedForm.STATED:
        add(1, epsilon_d(spec))
    else:
        if d % 2 == 0:
            # (1 - chi(q) qT) with chi the character of Q(i)
            add(1, 1, 1 if q % 4 == 1 else -1)
        if d % 3 == 0:
            o3 = 1 if q % 3 == 1 else 2
            add(o3, 2 // o3)
    for e in divisors(d):
        if 6 % e == 0:
            continue
        o = int(n_order(q % e, e))
        phi = int(totient(e))
        if phi % o:
            raise UlmerSpecError(f"order {o} of q mod {e} does not divide phi(e) = {phi}")
        add(o, phi // o)
    return tuple(CyclotomicBlock(order=o, multiplicity=m, sign=s) for (o, s), m in sorted(merged.items()))


def l_degree(spec: UlmerSpec, form: FormLike = ClosedForm.STATED) -> int:
    return sum(b.degree for b in blocks(spec, form))


def _expand(q: int, bs: Iterable[CyclotomicBlock]) -> Tuple[int, ...]:
    coeffs = [1]
    for b in bs:
        for _ in range(b.multiplicity):
            shifted = [0] * (len(coeffs) + b.order)
            factor = -b.sign * q ** b.order
            for i, c in enumerate(coeffs):
                shifted[i] += c
                shifted[i + b.order] += factor * c
            coeffs = shifted
    return tuple(coeffs)


def closed_form_spectrum(spec: UlmerSpec, form: FormLike = ClosedForm.STATED) -> Spectrum:
    q = spec.q
    bs = blocks(spec, form)
    turns: Dict[Fraction, int] = {}
    epsilon = 1
    for b in bs:
        if b.sign == 1:
            for j in range(b.order):
                t = Fraction(j, b.order)
                turns[t] = turns.get(t, 0) + b.multiplicity
            if b.multiplicity % 2:
                epsilon = -epsilon
        else:
            # only order 1 occurs with sign -1
            turns[Fraction(1, 2)] = turns.get(Fraction(1, 2), 0) + b.multiplicity
    exact = sorted(turns.items())
    degree = sum(b.degree for b in bs)
    return Spectrum(
        q=q, degree=degree, epsilon=epsilon,
        rank=turns.get(Fraction(0), 0), m_minus_q=turns.get(Fraction(1, 2), 0),
        angles=[(float(2 * math.pi * t), m) for t, m in exact],
        forced_zeros=forced_zeros(degree, epsilon, q), exact_turns=exact,
    )


def closed_form_L(spec: UlmerSpec, form: FormLike = ClosedForm.STATED) -> Tuple[LPolynomial, Spectrum]:
    """The closed-form L-polynomial (expanded when its degree allows) and its exact spectrum."""
    bs = blocks(spec, form)
    degree = sum(b.degree for b in bs)
    coeffs = _expand(spec.q, bs) if degree <= Config.EXPAND_DEGREE else None
    if coeffs is None:
        logger.info("closed form of degree %d kept factored", degree)
    lpoly = LPolynomial(q=spec.q, degree=degree, coeffs=coeffs, blocks=bs, source=f"closed-form:{_form(form).value}")
    return lpoly, closed_form_spectrum(spec, form)


def rank(spec: UlmerSpec) -> int:
    """eps_d + sum over e | d, e not dividing 6, of phi(e)/o_e(q); equal for both closed forms."""
    return sum(b.multiplicity for b in blocks(spec) if b.sign == 1)


def _block_term(q: int, b: CyclotomicBlock, x: int) -> QSqrtValue:
    if b.sign == -1:
        # (1 + qT): a single zero at angle pi
        return ((-1) ** x) * b.multiplicity / (1 + sqrt_power(q, -1))
    return sqrt_power(q, -(x % b.order)) * (b.multiplicity * b.order) / (1 - sqrt_power(q, -b.order))


def t_per(spec: UlmerSpec, x: int, form: FormLike = ClosedForm.STATED) -> QSqrtValue:
    """Exact periodic part of T_d(X) in Q(sqrt q)."""
    q = spec.q
    total = -c_pm(x, q)
    for b in blocks(spec, form):
        total = total + _block_term(q, b, x)
    return total


def period(spec: UlmerSpec, form: FormLike = ClosedForm.STATED) -> int:
    value = 2
    for b in blocks(spec, form):
        value = value * b.order // math.gcd(value, b.order)
    return value


def delta_exact(spec: UlmerSpec, form: FormLike = ClosedForm.STATED) -> DensityReport:
    """delta(E_d) from the signs of T^per over one period; an interval when a class vanishes."""
    P = period(spec, form)
    bs = blocks(spec, form)
    q = spec.q
    values = []
    for x in range(1, P + 1):
        total = -c_pm(x, q)
        for b in bs:
            total = total + _block_term(q, b, x)
        values.append(total)
    report = periodic_density(values, P)
    if spec.d >= 7 and _form(form) is ClosedForm.STATED:
        low = report.value if report.value is not None else report.interval[0]
        if low < Fraction(1, 2 * spec.n):
            raise BoundViolation(f"density lower bound 1/(2n) fails for {spec}", low=str(low), n=spec.n)
    return report


# --- theorem regimes ---

def _interval(report: DensityReport) -> Tuple[Fraction, Fraction]:
    if report.value is not None:
        return report.value, report.value
    return report.interval


def _judge(report: DensityReport, lo: Fraction, hi: Fraction) -> RegimeStatus:
    a, b = _interval(report)
    if lo <= a and b <= hi:
        return RegimeStatus.HOLDS
    if b < lo or a > hi:
        return RegimeStatus.VIOLATED
    return RegimeStatus.UNDECIDED


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _result(name: str, applies: bool, hypotheses: List[str], report: DensityReport,
            lo: Fraction, hi: Fraction, asymptotic: bool = False,
            extra: Optional[Tuple[bool, str]] = None) -> RegimeResult:
    if not applies:
        return RegimeResult(name, RegimeStatus.NOT_APPLICABLE, hypotheses, asymptotic=asymptotic)
    conclusion = f"delta in [{_fmt(lo)}, {_fmt(hi)}]" if lo != hi else f"delta = {_fmt(lo)}"
    status = _judge(report, lo, hi)
    detail = None
    if extra is not None:
        ok, text = extra
        conclusion += f"; {text}"
        if not ok:
            status = RegimeStatus.VIOLATED
            detail = f"{text} fails"
    return RegimeResult(name, status, hypotheses, conclusion, asymptotic, detail)


def _is_prime_power_plus_one(p: int, d: int) -> Optional[int]:
    n, power = 1, p
    while power + 1 < d:
        power *= p
        n += 1
    return n if power + 1 == d else None


def _limit_family_exponent(p: int, d: int) -> Optional[int]:
    n, power = 1, p
    while (power + 1) // (p + 1) < d:
        power *= p
        n += 1
    if (power + 1) % (p + 1) == 0 and (power + 1) // (p + 1) == d:
        return n
    return None


def theorem_check(spec: UlmerSpec, form: FormLike = ClosedForm.STATED) -> TheoremReport:
    """Evaluate every bias regime against the exact density; never raises on a failed hypothesis."""
    p, k, d, n, q = spec.p, spec.k, spec.d, spec.n, spec.q
    report = delta_exact(spec, form)
    r = rank(spec)
    one = Fraction(1)
    results: List[RegimeResult] = []

    divisible = (d % 2 == 0 and q % 4 == 1) or d % 3 == 0
    results.append(_result(
        "extreme-bias-divisibility", q >= 3 and divisible,
        ["q >= 3", "2 | d and q = 1 mod 4, or 3 | d"], report, one, one,
    ))

    n_pow = _is_prime_power_plus_one(p, d)
    applies = n_pow is not None and n_pow % k == 0 and math.log(n_pow) <= math.sqrt(q) / 2
    results.append(_result(
        "extreme-bias-power", applies,
        ["d = p^n + 1", "k | n", "n <= exp(sqrt(q)/2)", "p large"], report, one, one, asymptotic=True,
    ))

    applies = p % 4 == 3 and d >= 5 and (p * p + 1) % d == 0 and k % 4 == 1 and k >= 5
    expected_rank = (d - 1) // 4 if d % 4 == 1 else (d - 2) // 4
    results.append(_result(
        "unbiased", applies,
        ["p = 3 mod 4", "d >= 5 divides p^2 + 1", "q = p^(4j+1) with j >= 1"], report,
        Fraction(1, 2), Fraction(1, 2),
        extra=(r == expected_rank, f"rank = {expected_rank}") if applies else None,
    ))

    applies = d >= 7 and isprime(d) and n_order(p, d) == d - 1 and k == (d - 1) // 2 + 1
    results.append(_result(
        "negative-bias-primitive-root", applies,
        ["d >= 7 prime", "p a primitive root mod d", "q = p^((d-1)/2 + 1)"], report,
        Fraction(1, d - 1), Fraction(4, d - 1),
    ))

    applies = (
        n_pow is not None and d % 2 == 0 and d // 2 >= 7 and isprime(d // 2)
        and p % 4 == 3 and n_pow >= 4 and n_pow % 2 == 0 and k == n_pow - 1
    )
    results.append(_result(
        "negative-bias-twice-prime", applies,
        ["d = p^n + 1 = 2l with l >= 7 prime", "p = 3 mod 4", "n >= 4 even", "q = p^(n-1)", "p large"],
        report, Fraction(1, 2 * n), Fraction(2, n), asymptotic=True,
    ))

    applies = (
        n_pow is not None and n_pow >= 2 and n_pow % 2 == 0 and p % 4 == 3
        and k > n_pow and (k - 1) % n_pow == 0
    )
    results.append(_result(
        "moderate-bias", applies,
        ["n >= 2 even", "p = 3 mod 4", "d = p^n + 1", "q = p^(jn+1)", "p large"],
        report, Fraction(1, 2 * n), one - Fraction(1, 2 * n), asymptotic=True,
    ))

    m = _limit_family_exponent(p, d)
    applies = (
        m is not None and p >= 17 and m >= 3 and isprime(m) and (p + 1) % m != 0
        and k >= 4 and k % 2 == 0 and math.gcd(k, m) == 1
    )
    results.append(_result(
        "limit-points", applies,
        ["p >= 17 prime", "n >= 3 prime with n not dividing p + 1", "d = (p^n + 1)/(p + 1)",
         "k >= 4 even, coprime to n"],
        report,
        Fraction(1, k) - Fraction(2, (m or 1) * k), Fraction(1, k) + Fraction(1, 2 * (m or 1)),
        extra=(r * m == d - 1, f"rank = (d-1)/{m}") if applies else None,
    ))

    if d >= 7:
        lo = Fraction(1, 2 * n)
        negative = any(t_per(spec, x, form).sign() < 0 for x in range(2, period(spec, form) + 2))
        hi = one - lo if negative else one
        results.append(_result("periodic-lower-bound", True, ["d >= 7"], report, lo, hi))
    else:
        results.append(_result("periodic-lower-bound", False, ["d >= 7"], report, one, one))

    return TheoremReport(spec=spec, rank=r, density=report, results=results)


# --- scans ---

class UlmerScanner:
    """Density tables over ranges of (p, k, d), one worker thread per spec."""

    def __init__(self, threads: Optional[int] = None, form: FormLike = ClosedForm.STATED):
        self.threads = threads or Config.THREADS
        self.form = _form(form)

    def _row(self, p: int, k: int, d: int) -> ScanRow:
        try:
            spec = validate(p, k, d)
            report = delta_exact(spec, self.form)
            lo, hi = _interval(report)
            return ScanRow(p, k, d, n=spec.n, rank=rank(spec), degree=l_degree(spec, self.form),
                           period=report.period, delta_low=lo, delta_high=hi)
        except FfraceError as e:
            logger.warning("Ulmer spec (%d, %d, %d) skipped: %s", p, k, d, e.message)
            return ScanRow(p, k, d, error=e.message)

    async def scan_async(self, triples: List[Tuple[int, int, int]],
                         progress_callback: Optional[Callable[[str, Dict], None]] = None) -> List[ScanRow]:
        semaphore = asyncio.Semaphore(self.threads)

        async def one(index: int, triple: Tuple[int, int, int]) -> ScanRow:
            async with semaphore:
                row = await asyncio.to_thread(self._row, *triple)
            if progress_callback:
                progress_callback("spec_done", {"index": index, "p": row.p, "k": row.k, "d": row.d})
            return row

        return list(await asyncio.gather(*(one(i, t) for i, t in enumerate(triples))))

    def scan(self, p_max: int, d_max: int, k_max: int,
             progress_callback: Optional[Callable[[str, Dict], None]] = None) -> List[ScanRow]:
        """Every valid (p, k, d) with 3 <= p <= p_max, d <= d_max, k <= k_max."""
        triples = []
        for p in primerange(3, p_max + 1):
            for d in range(1, d_max + 1):
                try:
                    validate(p, 1, d)
                except UlmerSpecError:
                    continue
                triples.extend((p, k, d) for k in range(1, k_max + 1))
        logger.info("scanning %d Ulmer specs", len(triples))
        return asyncio.run(self.scan_async(triples, progress_callback))


def _limit_candidates(m: int) -> Iterable[Tuple[str, int, int, int]]:
    ks = sorted({2 * m, 4 * m})
    for p in primerange(17, 51):
        for n in primerange(3, 14):
            if (p + 1) % n == 0:
                continue
            d = (p ** n + 1) // (p + 1)
            if d > Config.ULMER_MAX_D:
                continue
            for k in ks:
                if k >= 4 and k % 2 == 0 and math.gcd(k, n) == 1:
                    yield "limit-points", p, k, d
    if m == 1:
        for p in primerange(3, 51):
            if p % 4 != 3:
                continue
            for d in divisors(p * p + 1):
                if d >= 5:
                    yield "unbiased", p, 5, d


def limit_point_search(m: int) -> LimitPointResult:
    """The Ulmer parameters from the limit-point families whose exact density is closest to 1/(2m)."""
    if m < 1:
        raise UlmerSpecError(f"m must be >= 1, got {m}")
    target = Fraction(1, 2 * m)
    best: Optional[Tuple[float, str, UlmerSpec, DensityReport]] = None
    examined = 0
    for family, p, k, d in _limit_candidates(m):
        try:
            spec = validate(p, k, d)
            report = delta_exact(spec)
        except FfraceError as e:
            logger.debug("limit-point candidate (%d, %d, %d) skipped: %s", p, k, d, e.message)
            continue
        examined += 1
        lo, hi = _interval(report)
        distance = float(max(abs(lo - target), abs(hi - target)))
        if best is None or distance < best[0]:
            best = (distance, family, spec, report)
    if best is None:
        return LimitPointResult(target, None, None, math.inf, examined)
    distance, family, spec, report = best
    logger.info("closest density to %s: %s at %s", _fmt(target), report.to_json(), spec)
    return LimitPointResult(target, spec, report, distance, examined, family)
