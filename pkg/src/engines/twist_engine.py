import asyncio
import logging
import math
from collections import Counter
from typing import Callable, Dict, Iterator, List, Optional

import numpy as np

from .curve_engine import (
    base_change, conductor_degree, is_squarefree, multiplicative_locus, quadratic_twist, short_form,
)
from .limit_engine import build_rv, delta_limit_law
from .lpoly_engine import PlaceLedger, diagnose_rational_angles, lpolynomial, spectrum
from ..models.curve import CurveModel
from ..models.poly import PolyOverFq
from ..models.twist import SurveySummary, TwistSample, TwistSurvey
from ..utils.config import Config
from ..utils.errors import FfraceError, InvalidInputError, TwistError, WorkBoundExceeded

logger = logging.getLogger(__name__)

HISTOGRAM_BINS = 10


def _short(curve: CurveModel) -> CurveModel:
    if all(a.is_zero() for a in (curve.a1, curve.a2, curve.a3)):
        return curve
    return short_form(curve)


def enumerate_twisting_space(base: CurveModel, d: int, limit: Optional[int] = None,
                             seed: Optional[int] = None) -> Iterator[PolyOverFq]:
    """Monic squarefree f of degree d prime to the multiplicative locus, in code order.

    Above `limit` candidates, a seeded sample of that many codes is filtered instead.
    """
    if d < 1:
        raise InvalidInputError(f"twist degree must be >= 1, got {d}")
    base = _short(base)
    m = multiplicative_locus(base)
    if m.is_constant():
        raise TwistError("the base curve has no place of multiplicative reduction")
    ctx = base.ctx
    total = ctx.q ** d
    if limit is not None and total > limit:
        rng = np.random.default_rng(Config.SEED if seed is None else seed)
        codes = sorted(int(i) for i in rng.choice(total, size=limit, replace=False))
        logger.info("sampling %d of %d monic polynomials of degree %d", limit, total, d)
    else:
        codes = range(total)
    for index in codes:
        f = PolyOverFq.from_code(ctx, index, d)
        if is_squarefree(f) and f.gcd(m).is_constant():
            yield f


class TwistSurveyor:
    """Quadratic twists of one base curve, surveyed concurrently with one row per twist."""

    def __init__(self, base: CurveModel, threads: Optional[int] = None, samples: Optional[int] = None,
                 max_residue_field: Optional[int] = None, extension: int = 1):
        if base.q ** extension > Config.TWIST_MAX_Q:
            raise WorkBoundExceeded(
                f"twist surveys over F_{base.q ** extension} exceed the field bound",
                bound="twist_max_q", limit=Config.TWIST_MAX_Q, requested=base.q ** extension,
            )
        self.base = _short(base_change(base, extension))
        self.locus = multiplicative_locus(self.base)
        self.threads = threads or Config.THREADS
        self.samples = samples or Config.TWIST_SAMPLES
        self.max_residue_field = max_residue_field or Config.MAX_RESIDUE_FIELD

    def _sample(self, f: PolyOverFq, seed: int) -> TwistSample:
        try:
            twist = quadratic_twist(self.base, f, self.locus)
            conductor = conductor_degree(twist)
            ledger = PlaceLedger(twist, self.max_residue_field)
            lpoly = lpolynomial(twist, conductor.analytic_degree, ledger)
            spec = spectrum(lpoly)
            li = diagnose_rational_angles(spec)
            delta = delta_limit_law(build_rv(spec), self.samples, seed, threads=1)
            return TwistSample(f, lpoly, spec, delta, li, conductor.degree)
        except FfraceError as e:
            logger.warning("twist by %r failed: %s", f, e.message)
            return TwistSample(f, error=e.message)

    async def survey_async(self, polys: List[PolyOverFq], seed: int,
                           progress_callback: Optional[Callable[[str, Dict], None]] = None) -> List[TwistSample]:
        semaphore = asyncio.Semaphore(self.threads)

        async def one(index: int, f: PolyOverFq) -> TwistSample:
            async with semaphore:
                row = await asyncio.to_thread(self._sample, f, seed + index)
            if progress_callback:
                progress_callback("twist_done", {"index": index, "f": repr(f), "error": row.error})
            return row

        return list(await asyncio.gather(*(one(i, f) for i, f in enumerate(polys))))

    def survey(self, d: int, sample_size: Optional[int] = None, seed: Optional[int] = None,
               progress_callback: Optional[Callable[[str, Dict], None]] = None) -> TwistSurvey:
        if d > Config.TWIST_MAX_D:
            raise WorkBoundExceeded(
                f"twist degree {d} exceeds the survey bound",
                bound="twist_max_d", limit=Config.TWIST_MAX_D, requested=d,
            )
        seed = Config.SEED if seed is None else seed
        polys = list(enumerate_twisting_space(self.base, d, sample_size, seed))
        logger.info("surveying %d twists of degree %d over F_%d", len(polys), d, self.base.q)
        samples = asyncio.run(self.survey_async(polys, seed, progress_callback))
        return TwistSurvey(samples=samples, summary=summarize(samples, d, self.base.q), seed=seed)


def summarize(samples: List[TwistSample], d: int, q: int) -> SurveySummary:
    good = [s for s in samples if s.ok]
    summary = SurveySummary(d=d, q=q, count=len(samples), failures=len(samples) - len(good))
    if not good:
        return summary
    summary.l_degrees = [s.spectrum.degree for s in good]
    if not summary.degree_constant:
        logger.warning("L-degrees vary across the twist sample: %s", sorted(set(summary.l_degrees)))
    ranks = Counter(s.spectrum.rank for s in good)
    summary.rank_counts = dict(ranks)
    summary.rank_at_most_one = (ranks[0] + ranks[1]) / len(good)
    deltas = np.array([s.delta.point() for s in good])
    counts, edges = np.histogram(deltas, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    summary.histogram_counts = [int(c) for c in counts]
    summary.histogram_edges = [float(e) for e in edges]
    summary.max_deviation = float(np.max(np.abs(deltas - 0.5)))
    summary.deviation_constant = summary.max_deviation * math.sqrt(d)
    agree = [(s.spectrum.rank == 0 and s.delta.point() < 0.5) or (s.spectrum.rank >= 1 and s.delta.point() > 0.5)
             for s in good]
    summary.mean_sign_agreement = sum(agree) / len(agree)
    return summary
