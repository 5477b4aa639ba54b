import math
from fractions import Fraction

import pytest

from src.engines import race_engine as race
from src.engines.lpoly_engine import spectrum_from_angles
from src.models.qsqrt import QSqrtValue
from src.models.race import DensityMethod, RaceMethod
from src.utils.errors import InvalidInputError

ROOT3 = math.sqrt(3)


def test_c_pm():
    assert race.c_pm(2, 3) == Fraction(3, 2)
    assert race.c_pm(1, 3) == QSqrtValue(Fraction(0), Fraction(1, 2), 3)
    with pytest.raises(InvalidInputError):
        race.c_pm(0, 3)


def test_t_direct_first_value(e5_ledger):
    assert race.t_direct(e5_ledger, 1, exact=True) == Fraction(1, 3)
    assert race.t_direct(e5_ledger, 1) == pytest.approx(1 / 3)


def test_direct_series_tags_counted_values(e5_ledger):
    series = race.t_direct_series(e5_ledger, 5)
    assert series.method is RaceMethod.DIRECT
    assert series.sources == ["counted"] * 5
    assert series.value(1) == pytest.approx(1 / 3)
    for x in range(1, 6):
        assert series.value(x) == pytest.approx(race.t_direct(e5_ledger, x))


def test_ramanujan_sums():
    assert [race.ramanujan_sum(4, j) for j in range(4)] == [2, 0, -2, 0]
    assert race.ramanujan_sum(1, 7) == 1
    assert race.ramanujan_sum(3, 1) == -1


def test_exact_periodic_part_of_e5(e5_spectrum):
    values = [race.t_explicit_exact(e5_spectrum, x) for x in range(1, 5)]
    assert values[0] == QSqrtValue.sqrt_q(3)
    assert values[1].is_zero()
    assert values[2].is_zero()
    assert values[3] == 3


def test_float_and_exact_explicit_values_agree(e5_spectrum):
    floats = race.t_explicit_values(e5_spectrum, range(1, 13))
    for x, value in enumerate(floats, start=1):
        assert value == pytest.approx(float(race.t_explicit_exact(e5_spectrum, x)), abs=1e-12)


def test_direct_and_explicit_sides_converge(e5, e5_ledger, e5_spectrum):
    # the two sides differ by a term decaying like X q^{-X/2}
    x = 12
    assert race.t_direct(e5_ledger, x) == pytest.approx(race.t_explicit(e5_spectrum, x), abs=0.5)


def test_exact_density_interval(e5_spectrum):
    report = race.density(e5_spectrum)
    assert report.method is DensityMethod.EXACT_PERIODIC
    assert report.period == 4
    assert report.interval == (Fraction(1, 2), Fraction(1))
    assert report.boundary_classes == [2, 3]
    assert not report.is_exact


def test_mean_and_variance(e5_spectrum):
    mv = race.mean_variance(e5_spectrum)
    assert mv.mean == pytest.approx(0.5 / (1 - 1 / ROOT3))
    assert mv.mean == pytest.approx(1.1830, abs=1e-4)
    assert mv.variance_uncorrected == pytest.approx(2.0024, abs=1e-4)
    assert mv.variance_corrected == pytest.approx(1.6005, abs=1e-4)
    assert mv.resonance == pytest.approx(3 / (ROOT3 + 1) ** 2)


def test_time_average_density_needs_horizon(e5_spectrum):
    with pytest.raises(InvalidInputError):
        race.density(e5_spectrum, DensityMethod.TIME_AVERAGE)
    report = race.density(e5_spectrum, "time-average", horizon=400)
    # classes 2 and 3 vanish exactly; floating noise decides their sign
    assert 0.5 - 1e-9 <= report.estimate <= 1.0


def test_time_average_of_generic_spectrum_matches_periodic_moments():
    spec = spectrum_from_angles(25, [(1.0, 1), (2 * math.pi - 1.0, 1)])
    moments = race.time_average_moments(spec, 20000)
    mv = race.mean_variance(spec)
    assert moments.mean == pytest.approx(mv.mean, abs=0.05)


def test_limit_modes_are_not_race_modes(e5_spectrum):
    with pytest.raises(InvalidInputError):
        race.density(e5_spectrum, DensityMethod.LIMIT_LAW_MC)


def test_orbits_need_exact_angles():
    spec = spectrum_from_angles(25, [(1.0, 1), (2 * math.pi - 1.0, 1)])
    with pytest.raises(InvalidInputError):
        race.orbit_multiplicities(spec)


def test_time_average_variance_follows_corrected_value(e5_spectrum):
    moments = race.time_average_moments(e5_spectrum, 10_000)
    mv = race.mean_variance(e5_spectrum)
    assert moments.mean == pytest.approx(mv.mean, rel=0.02)
    assert moments.variance_corrected == pytest.approx(mv.variance_corrected, rel=0.03)
    assert abs(moments.variance_corrected - mv.variance_uncorrected) > 0.1 * mv.variance_uncorrected


def test_mean_variance_document_keeps_both_names(e5_spectrum):
    doc = race.mean_variance(e5_spectrum).to_json()
    assert doc["variance_paper"] == doc["variance_uncorrected"]
    assert doc["variance_corrected"] < doc["variance_paper"]
