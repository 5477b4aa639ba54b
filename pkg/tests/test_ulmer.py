from fractions import Fraction

import pytest

from src.engines import race_engine as race
from src.engines import ulmer_engine as ulmer
from src.engines.curve_engine import ulmer_curve
from src.engines.lpoly_engine import PlaceLedger, lpolynomial
from src.models.lfunction import CyclotomicBlock
from src.models.race import DensityMethod, DensityReport
from src.models.ulmer import ClosedForm, RegimeStatus
from src.utils.config import Config
from src.utils.errors import BoundViolation, StabilizationError, UlmerSpecError


@pytest.mark.parametrize("p, d, n", [(3, 5, 2), (3, 4, 1), (3, 7, 3), (5, 3, 1), (5, 26, 2), (7, 2, 1)])
def test_least_n(p, d, n):
    assert ulmer.validate(p, 1, d).n == n


@pytest.mark.parametrize("p, k, d", [(2, 1, 3), (9, 1, 5), (3, 0, 5), (3, 1, 0), (3, 1, 6), (3, 1, 8)])
def test_invalid_specs(p, k, d):
    with pytest.raises(UlmerSpecError):
        ulmer.validate(p, k, d)


def test_configured_maximum_d(monkeypatch):
    monkeypatch.setattr(Config, "ULMER_MAX_D", 10)
    with pytest.raises(UlmerSpecError, match="exceeds"):
        ulmer.validate(5, 1, 13)


def test_epsilon_d():
    assert ulmer.epsilon_d(ulmer.validate(3, 1, 5)) == 0
    assert ulmer.epsilon_d(ulmer.validate(5, 1, 3)) == 1
    assert ulmer.epsilon_d(ulmer.validate(5, 1, 26)) == 1
    assert ulmer.epsilon_d(ulmer.validate(5, 2, 3)) == 2


def test_blocks_and_rank():
    spec = ulmer.validate(3, 1, 5)
    assert ulmer.blocks(spec) == (CyclotomicBlock(order=4, multiplicity=1, sign=1),)
    assert ulmer.rank(spec) == 1

    spec = ulmer.validate(3, 4, 7)
    assert spec.n == 3
    assert ulmer.blocks(spec) == (CyclotomicBlock(order=3, multiplicity=2, sign=1),)
    assert ulmer.rank(spec) == 2

    spec = ulmer.validate(5, 1, 26)
    assert [(b.order, b.multiplicity) for b in ulmer.blocks(spec)] == [(1, 1), (4, 6)]
    assert ulmer.rank(spec) == 7
    assert ulmer.l_degree(spec) == 25


def test_closed_form_matches_counted_l_polynomial(e5_lpoly, e5_spectrum):
    lpoly, spec = ulmer.closed_form_L(ulmer.validate(3, 1, 5))
    assert lpoly.coeffs == e5_lpoly.coeffs == (1, 0, 0, 0, -81)
    assert lpoly.source == "closed-form:stated"
    assert spec.exact_turns == e5_spectrum.exact_turns
    assert spec.epsilon == -1
    assert spec.forced_zeros == [3, -3]


def test_complete_form_keeps_rank():
    spec = ulmer.validate(5, 1, 3)
    assert ulmer.l_degree(spec) == 1
    assert ulmer.closed_form_L(spec)[0].coeffs == (1, -5)
    complete = ulmer.closed_form_spectrum(spec, "complete")
    assert ulmer.l_degree(spec, ClosedForm.COMPLETE) == 2
    assert ulmer.closed_form_L(spec, ClosedForm.COMPLETE)[0].coeffs == (1, 0, -25)
    assert complete.rank == ulmer.rank(spec) == 1


def test_large_closed_form_stays_factored(monkeypatch):
    monkeypatch.setattr(Config, "EXPAND_DEGREE", 8)
    lpoly, spec = ulmer.closed_form_L(ulmer.validate(5, 1, 26))
    assert lpoly.coeffs is None
    assert lpoly.degree == spec.degree == 25


def test_periodic_part_matches_spectral_formula(e5_spectrum):
    spec = ulmer.validate(3, 1, 5)
    assert ulmer.period(spec) == 4
    for x in range(1, 9):
        assert ulmer.t_per(spec, x) == race.t_explicit_exact(e5_spectrum, x)


@pytest.mark.parametrize("p, k, d, expected", [
    (3, 5, 5, Fraction(1, 2)),
    (3, 4, 7, Fraction(1, 2)),
    (5, 1, 3, Fraction(1)),
    (5, 1, 26, Fraction(1)),
])
def test_exact_densities(p, k, d, expected):
    assert ulmer.delta_exact(ulmer.validate(p, k, d)).value == expected


def test_density_interval_when_classes_vanish():
    report = ulmer.delta_exact(ulmer.validate(3, 1, 5))
    assert report.value is None
    assert report.interval == (Fraction(1, 2), Fraction(1))
    assert report.boundary_classes == [2, 3]


def test_unbiased_regime_holds():
    report = ulmer.theorem_check(ulmer.validate(3, 5, 5))
    assert report.rank == 1
    assert report.by_regime("unbiased").status is RegimeStatus.HOLDS
    assert report.by_regime("extreme-bias-divisibility").status is RegimeStatus.NOT_APPLICABLE
    assert report.by_regime("periodic-lower-bound").status is RegimeStatus.NOT_APPLICABLE
    assert report.to_json()["density"]["method"] == report.density.to_json()["method"]


def test_divisibility_regime_holds():
    report = ulmer.theorem_check(ulmer.validate(5, 1, 3))
    result = report.by_regime("extreme-bias-divisibility")
    assert result.status is RegimeStatus.HOLDS
    assert result.conclusion == "delta = 1/1"
    assert result in report.applicable()
    with pytest.raises(KeyError):
        report.by_regime("no-such-regime")


def test_scanner_rows():
    rows = ulmer.UlmerScanner(threads=2).scan(5, 5, 1)
    assert [(r.p, r.d) for r in rows] == [(3, 1), (3, 2), (3, 4), (3, 5), (5, 1), (5, 2), (5, 3)]
    e5 = rows[3]
    assert (e5.rank, e5.degree, e5.period) == (1, 4, 4)
    assert e5.as_row()["delta_low"] == "1/2"
    assert e5.as_row()["delta_high"] == "1/1"


def test_scanner_reports_progress():
    events = []
    ulmer.UlmerScanner(threads=1).scan(3, 5, 2, progress_callback=lambda kind, data: events.append(kind))
    assert events == ["spec_done"] * 8


def test_limit_point_search_rejects_m():
    with pytest.raises(UlmerSpecError):
        ulmer.limit_point_search(0)


@pytest.mark.slow
def test_unbiased_family_reaches_one_half():
    result = ulmer.limit_point_search(1)
    assert result.distance == 0
    assert result.density.value == Fraction(1, 2)


@pytest.mark.slow
def test_limit_point_near_one_quarter():
    result = ulmer.limit_point_search(2)
    assert result.target == Fraction(1, 4)
    assert result.examined > 0
    assert result.distance < 0.1


def test_counted_l_polynomials_carry_the_small_divisor_factors():
    e3 = ulmer_curve(5, 1, 3)
    assert lpolynomial(e3, 2, PlaceLedger(e3)).coeffs == (1, 0, -25)
    with pytest.raises(StabilizationError):
        lpolynomial(e3, ulmer.l_degree(ulmer.validate(5, 1, 3)), PlaceLedger(e3))

    spec = ulmer.validate(3, 1, 10)
    e10 = ulmer_curve(3, 1, 10)
    ledger = PlaceLedger(e10)
    complete, _ = ulmer.closed_form_L(spec, ClosedForm.COMPLETE)
    assert complete.coeffs == (1, 3, 0, 0, -162, -486, 0, 0, 6561, 19683)
    assert lpolynomial(e10, 9, ledger).coeffs == complete.coeffs
    with pytest.raises(StabilizationError):
        lpolynomial(e10, ulmer.l_degree(spec), PlaceLedger(e10))


def test_rank_and_density_of_large_field_instance():
    spec = ulmer.validate(17, 4, 273)
    assert spec.n == 3
    report = ulmer.theorem_check(spec)
    # 3 | 18, so the limit-point hypotheses fail and 3 | d forces the extreme bias
    assert report.rank == 92
    assert report.density.value == Fraction(1)
    assert report.by_regime("limit-points").status is RegimeStatus.NOT_APPLICABLE
    assert report.by_regime("extreme-bias-divisibility").status is RegimeStatus.HOLDS
    assert report.by_regime("periodic-lower-bound").status is RegimeStatus.HOLDS


def test_periodic_lower_bound_on_small_primes():
    checked = 0
    for p in (3, 5, 7):
        for d in range(7, 40):
            try:
                spec = ulmer.validate(p, 1, d)
            except UlmerSpecError:
                continue
            report = ulmer.delta_exact(spec)
            low = report.value if report.value is not None else report.interval[0]
            assert low >= Fraction(1, 2 * spec.n), spec
            checked += 1
    assert checked >= 20


def test_lower_bound_failure_raises(monkeypatch):
    spec = ulmer.validate(5, 1, 7)
    monkeypatch.setattr(ulmer, "periodic_density",
                        lambda values, period: DensityReport(DensityMethod.EXACT_PERIODIC, value=Fraction(0),
                                                             period=period))
    with pytest.raises(BoundViolation):
        ulmer.delta_exact(spec)
    assert ulmer.delta_exact(spec, ClosedForm.COMPLETE).value == 0
