import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm

from .lpoly_engine import spectrum_from_angles
from ..models.lfunction import Spectrum
from ..models.limit import BerryEsseenReport, GaussianDistance, SpectralRV
from ..models.race import DensityMethod, DensityReport
from ..utils.config import Config
from ..utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

LI_MODEL = "LI-model"
SYNTHETIC_SUITE = ((25, 100, 0), (25, 200, 1), (25, 400, 0), (49, 200, 2))
SERIES_LIMIT = 8.0
MILLER_LIMIT = 25.0
HANKEL_TERMS = 40
CF_NODES = 16
CF_BATCH = 256
CF_STOP = 1e-13


# --- Bessel J0 ---

def _j0_series(x: np.ndarray) -> np.ndarray:
    z = -(x * x) / 4
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 48):
        term = term * z / (k * k)
        total = total + term
    return total


def _j0_miller(x: np.ndarray) -> np.ndarray:
    """Backward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, normalized by J_0 + 2 sum J_{2k} = 1."""
    start = 2 * int((float(np.max(x)) + 40) // 2) + 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm_sum = np.zeros_like(x)
    for n in range(start, 0, -1):
        j_prev = (2 * n / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm_sum = norm_sum + 2 * j_cur
        big = np.abs(j_cur) > 1e200
        if big.any():
            scale = np.where(big, 1e-200, 1.0)
            j_cur, j_next, norm_sum = j_cur * scale, j_next * scale, norm_sum * scale
    return j_cur / (norm_sum + j_cur)


def _j0_hankel(x: np.ndarray) -> np.ndarray:
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, HANKEL_TERMS):
        term = term * (-(2 * k - 1) ** 2) / (8 * k * x)
        sign = -1 if (k // 2) % 2 else 1
        if k % 2:
            q = q + sign * term
        else:
            p = p + sign * term
    chi = x - math.pi / 4
    return np.sqrt(2 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0(x: ArrayLike) -> ArrayLike:
    """J0 to about 1e-12 absolute: power series, then Miller recurrence, then the Hankel expansion."""
    arr = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    small = arr <= SERIES_LIMIT
    middle = (arr > SERIES_LIMIT) & (arr <= MILLER_LIMIT)
    large = arr > MILLER_LIMIT
    if small.any():
        out[small] = _j0_series(arr[small])
    if middle.any():
        out[middle] = _j0_miller(arr[middle])
    if large.any():
        out[large] = _j0_hankel(arr[large])
    if np.ndim(x) == 0:
        return float(out)
    return out


# --- the limiting variable ---

def build_rv(spec: Spectrum) -> SpectralRV:
    """Two-point part from rank and m(-q), circle amplitudes m(theta) * 2/|1 - q^{-1/2} e^{-i theta}|."""
    q = spec.q
    root = math.sqrt(q)
    base = root / (root - 1) * spec.rank
    resonance = spec.m_minus_q * root / (root + 1)
    v_even = base - q / (q - 1) + resonance
    v_odd = base - root / (q - 1) - resonance
    s = 1 / root
    amplitudes: List[float] = []
    angles: List[float] = []
    for theta, m in spec.nontrivial_angles():
        w = 2 / abs(1 - s * complex(math.cos(theta), -math.sin(theta)))
        amplitudes.append(m * w)
        angles.append(theta)
    return SpectralRV(v_even=v_even, v_odd=v_odd, amplitudes=amplitudes, angles=angles,
                      q=q, degree=spec.degree, rank=spec.rank, m_minus_q=spec.m_minus_q)


def char_fn(rv: SpectralRV, xi: ArrayLike) -> Union[complex, np.ndarray]:
    """E[exp(i xi X_E)] = (e^{i v_even xi} + e^{i v_odd xi})/2 * prod_j J0(a_j xi)."""
    xs = np.atleast_1d(np.asarray(xi, dtype=float))
    two_point = 0.5 * (np.exp(1j * rv.v_even * xs) + np.exp(1j * rv.v_odd * xs))
    if rv.k:
        amps = np.asarray(rv.amplitudes)
        two_point = two_point * np.prod(bessel_j0(np.outer(xs, amps)), axis=1)
    if np.ndim(xi) == 0:
        return complex(two_point[0])
    return two_point


def _sample_block(rv: SpectralRV, size: int, seed: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed)
    parity = rng.integers(0, 2, size=size)
    values = np.where(parity == 0, rv.v_even, rv.v_odd)
    if rv.k:
        phases = rng.uniform(0.0, 2 * math.pi, size=(size, rv.k))
        values = values + np.cos(phases) @ np.asarray(rv.amplitudes)
    return values


def sample(rv: SpectralRV, samples: int, seed: Optional[int] = None,
           threads: Optional[int] = None, block: Optional[int] = None) -> np.ndarray:
    """Samples of X_E, drawn in blocks with seeds spawned from one root; independent of thread count."""
    seed = Config.SEED if seed is None else seed
    block = block or Config.MC_BLOCK
    sizes = [block] * (samples // block) + ([samples % block] if samples % block else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    with ThreadPoolExecutor(max_workers=threads or Config.THREADS) as pool:
        parts = list(pool.map(lambda args: _sample_block(rv, *args), zip(sizes, children)))
    return np.concatenate(parts) if parts else np.empty(0)


def delta_mc(rv: SpectralRV, samples: int = 100_000, seed: Optional[int] = None,
             threads: Optional[int] = None) -> DensityReport:
    if samples < 1000:
        raise InvalidInputError(f"Monte Carlo needs at least 1000 samples, got {samples}")
    seed = Config.SEED if seed is None else seed
    values = sample(rv, samples, seed, threads)
    estimate = float(np.count_nonzero(values > 0)) / samples
    se = math.sqrt(estimate * (1 - estimate) / samples)
    return DensityReport(DensityMethod.LIMIT_LAW_MC, estimate=estimate, standard_error=se,
                         samples=samples, seed=seed, label=LI_MODEL)


def delta_atomic(rv: SpectralRV) -> DensityReport:
    """Exact density of the two-point variable when there are no circle components."""
    if rv.k:
        raise InvalidInputError("the variable has circle components; use delta_mc or delta_cf")
    positive = (rv.v_even > 0) + (rv.v_odd > 0)
    return DensityReport(DensityMethod.LIMIT_LAW_MC, value=Fraction(positive, 2), label=LI_MODEL)


def delta_limit_law(rv: SpectralRV, samples: int = 100_000, seed: Optional[int] = None,
                    threads: Optional[int] = None) -> DensityReport:
    return delta_atomic(rv) if rv.k == 0 else delta_mc(rv, samples, seed, threads)


def delta_cf(rv: SpectralRV, cap: Optional[float] = None) -> DensityReport:
    """Gil-Pelaez: P[X > 0] = 1/2 + (1/pi) int_0^inf Im(phi(xi))/xi dxi, on Gauss-Legendre panels."""
    if rv.k == 0:
        raise InvalidInputError("no circle components: the distribution is atomic, use the two-point values")
    cap = cap or Config.CF_CAP
    width = max(abs(rv.v_even), abs(rv.v_odd)) + sum(rv.amplitudes)
    h = min(1.0, math.pi / (2 * width))
    nodes, weights = np.polynomial.legendre.leggauss(CF_NODES)
    offsets = (nodes + 1) * h / 2
    total = 0.0
    start = 0.0
    tail = None
    while start < cap:
        lefts = start + h * np.arange(CF_BATCH)
        lefts = lefts[lefts < cap]
        xi = (lefts[:, None] + offsets[None, :]).ravel()
        phi = char_fn(rv, xi)
        total += float(np.sum(np.tile(weights, len(lefts)) * np.imag(phi) / xi)) * h / 2
        start = float(lefts[-1] + h)
        last = float(np.max(np.abs(phi[-CF_NODES:])))
        if last < CF_STOP:
            tail = last
            break
    truncation = 1.0 / start if tail is None else tail
    if tail is None:
        logger.info("characteristic-function integral stopped at the cap %.0f", cap)
    estimate = 0.5 + total / math.pi
    return DensityReport(DensityMethod.LIMIT_LAW_CF, estimate=estimate, truncation=truncation, label=LI_MODEL)


# --- Gaussian limit ---

def normalized_samples(rv: SpectralRV, samples: int, seed: Optional[int] = None,
                       threads: Optional[int] = None) -> np.ndarray:
    return sample(rv, samples, seed, threads) * rv.normalizer


def gaussian_distance(rv: SpectralRV, samples: int = 100_000, seed: Optional[int] = None,
                      constant: Optional[float] = None, threads: Optional[int] = None) -> GaussianDistance:
    """Kolmogorov distance between the empirical law of Y_E and the standard Gaussian."""
    if rv.degree == 0:
        raise InvalidInputError("the normalization needs a positive L-function degree")
    seed = Config.SEED if seed is None else seed
    constant = Config.GAUSSIAN_C if constant is None else constant
    y = np.sort(normalized_samples(rv, samples, seed, threads))
    g = norm.cdf(y)
    upper = np.arange(1, samples + 1) / samples
    lower = np.arange(0, samples) / samples
    sup = float(max(np.max(upper - g), np.max(g - lower)))
    bound = constant * (rv.rank + 1) / math.sqrt(rv.degree)
    return GaussianDistance(sup_distance=sup, bound=bound, constant=constant, samples=samples, seed=seed)


def fit_gaussian_constant(suite: Sequence[Tuple[int, int, int]] = SYNTHETIC_SUITE, samples: int = 100_000,
                          seed: Optional[int] = None, margin: float = 1.25,
                          threads: Optional[int] = None) -> float:
    """Smallest C with sup_distance <= C (rank+1)/sqrt(N) on every synthetic (q, N, rank), times a margin.

    Pin the result through FFRACE_GAUSSIAN_C so later distance checks use it.
    """
    if margin < 1:
        raise InvalidInputError(f"margin must be >= 1, got {margin}")
    seed = Config.SEED if seed is None else seed
    worst = 0.0
    for q, degree, rank in suite:
        rv = build_rv(synthetic_spectrum(q, degree, rank, seed))
        dist = gaussian_distance(rv, samples, seed, constant=1.0, threads=threads)
        worst = max(worst, dist.sup_distance / dist.bound)
    fitted = worst * margin
    logger.info("gaussian constant fitted on %d synthetic spectra: %.4f", len(suite), fitted)
    return fitted


def berry_esseen_conditions(rv: SpectralRV, c: float = 1.0, constant: float = 10.0,
                            grid: int = 2000) -> BerryEsseenReport:
    """Checks, on a grid, the decay and quadratic-log hypotheses for Y_2 with epsilon = 1/N, M = c(log N + rank)."""
    n = rv.degree
    if n < 2:
        raise InvalidInputError("the diagnostic needs an L-function of degree >= 2")
    eps = 1.0 / n
    m_param = c * (math.log(n) + rv.rank)
    notes: List[str] = []
    valid = 1 <= m_param <= eps ** -0.5
    if not valid:
        notes.append(f"M = {m_param:.3f} outside [1, {eps ** -0.5:.3f}]")
    cut = eps ** -0.25
    scaled = np.asarray(rv.amplitudes) * rv.normalizer

    def psi(xi: np.ndarray) -> np.ndarray:
        if not len(scaled):
            return np.ones_like(xi)
        return np.prod(bessel_j0(np.outer(xi, scaled)), axis=1)

    far = np.geomspace(cut, 1.0 / eps, grid)
    decay_ratio = float(np.max(np.abs(psi(far)) * far ** 4 / constant))
    near = np.linspace(cut / grid, cut, grid)
    values = psi(near)
    if np.any(values <= 0):
        notes.append("characteristic function of Y_2 vanishes below epsilon^(-1/4)")
        quad_ratio = math.inf
    else:
        gap = np.abs(np.log(values) + near ** 2 / 2)
        quad_ratio = float(np.max(gap / (constant * eps * (m_param * near ** 2 + near ** 4))))
    return BerryEsseenReport(
        epsilon=eps, m_parameter=m_param, parameters_valid=valid,
        decay_holds=decay_ratio <= 1.0, decay_worst_ratio=decay_ratio,
        quadratic_holds=quad_ratio <= 1.0, quadratic_worst_ratio=quad_ratio,
        conclusion_scale=m_param * eps, notes=notes,
    )


# --- synthetic spectra ---

def synthetic_spectrum(q: int, degree: int, rank: int = 0, seed: Optional[int] = None) -> Spectrum:
    """iid uniform angles in (0, pi) with conjugates, rank zeros at q and the forced zero at -q if parity needs it."""
    if rank < 0 or rank > degree:
        raise InvalidInputError(f"rank must lie in [0, {degree}], got {rank}")
    seed = Config.SEED if seed is None else seed
    m_minus = (degree - rank) % 2
    pairs = (degree - rank - m_minus) // 2
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, math.pi, size=pairs)
    angles = [(0.0, rank)] if rank else []
    angles += [(float(t), 1) for t in thetas] + [(float(2 * math.pi - t), 1) for t in thetas]
    if m_minus:
        angles.append((math.pi, 1))
    return spectrum_from_angles(q, angles)
