import math
from fractions import Fraction

import pytest

from src.engines.curve_engine import ulmer_curve
from src.engines.lpoly_engine import (
    PlaceLedger, diagnose_rational_angles, forced_zeros, functional_equation_sign, lpolynomial, spectrum,
    spectrum_from_angles, trace_power, zero_power_sums,
)
from src.models.lfunction import LPolynomial, newton_coefficients, power_sums_from_coefficients
from src.utils.errors import FunctionalEquationError, StabilizationError, WorkBoundExceeded


def test_trace_powers():
    assert [trace_power(1, 3, k) for k in range(6)] == [2, 1, -5, -8, 7, 31]
    assert trace_power(-2, 3, 5) == -2


def test_newton_identities_round_trip():
    coeffs = [1, 0, 0, 0, -81]
    sums = power_sums_from_coefficients(coeffs, 8)
    assert sums == [0, 0, 0, 324, 0, 0, 0, 4 * 81 ** 2]
    assert newton_coefficients(sums, 4) == coeffs


def test_aggregates_of_e5(e5_ledger):
    assert [e5_ledger.aggregate(d).value for d in range(1, 6)] == [-1, 3, -1, -63, -6]


def test_l_polynomial_of_e5(e5_lpoly):
    assert e5_lpoly.coeffs == (1, 0, 0, 0, -81)
    assert e5_lpoly.source == "euler-product"
    assert functional_equation_sign(e5_lpoly) == -1


def test_zero_power_sums_match_l_polynomial(e5, e5_ledger, e5_lpoly):
    expected = e5_lpoly.power_sums(6)
    assert [zero_power_sums(e5, n, e5_ledger) for n in range(1, 7)] == expected


def test_spectrum_of_e5(e5_spectrum):
    spec = e5_spectrum
    assert spec.degree == 4
    assert spec.rank == 1
    assert spec.m_minus_q == 1
    assert spec.epsilon == -1
    assert spec.forced_zeros == [3, -3]
    assert spec.exact_turns == [(Fraction(0), 1), (Fraction(1, 4), 1), (Fraction(1, 2), 1), (Fraction(3, 4), 1)]
    assert [t for t, _ in spec.angles] == pytest.approx([0, math.pi / 2, math.pi, 3 * math.pi / 2])


def test_wrong_degree_fails_to_stabilise(e5):
    with pytest.raises(StabilizationError):
        lpolynomial(e5, 3, PlaceLedger(e5))


def test_short_hint_caught_beyond_two_extra_coefficients():
    # E_10/F_3 has degree 9; its T^4 coefficient is the first nonzero one past a hint of 1
    e10 = ulmer_curve(3, 1, 10)
    with pytest.raises(StabilizationError) as exc:
        lpolynomial(e10, 1, PlaceLedger(e10))
    assert exc.value.details["extra"][:3] == [0, 0, -162]


def test_sign_undetermined_from_two_degrees(e5):
    # with degrees 1 and 2 counted, 1 - 81 T^4 and 1 + 81 T^4 both fit the data
    with pytest.raises(StabilizationError, match="sign undetermined"):
        lpolynomial(e5, 4, PlaceLedger(e5, max_residue_field=9))


def test_aggregate_recovered_from_l_polynomial(e5):
    ledger = PlaceLedger(e5, max_residue_field=81)
    lpolynomial(e5, 4, ledger)
    assert ledger.aggregate(4).source == "counted"
    assert ledger.aggregate(5).source == "recovered"
    assert ledger.aggregate(5).value == -6


def test_residue_field_bound_too_small(e5):
    with pytest.raises(WorkBoundExceeded) as exc:
        lpolynomial(e5, 4, PlaceLedger(e5, max_residue_field=3))
    assert exc.value.bound == "max_residue_field"


def test_legendre_has_trivial_l_function(legendre):
    lpoly = lpolynomial(legendre)
    assert lpoly.degree == 0
    assert lpoly.coeffs == (1,)
    spec = spectrum(lpoly)
    assert spec.rank == 0 and spec.angles == []


def test_functional_equation_sign_rejects_non_self_dual():
    with pytest.raises(FunctionalEquationError):
        functional_equation_sign(LPolynomial(q=3, degree=2, coeffs=(1, 1, 1)))


@pytest.mark.parametrize("degree, epsilon, expected", [
    (3, 1, [-5]), (3, -1, [5]), (4, -1, [5, -5]), (4, 1, []),
])
def test_forced_zeros(degree, epsilon, expected):
    assert forced_zeros(degree, epsilon, 5) == expected


def test_numeric_spectrum_of_generic_polynomial():
    # 1 - 3 T + 25 T^2: angles +-arccos(3 / 10)
    spec = spectrum(LPolynomial(q=5, degree=2, coeffs=(1, -3, 25)))
    theta = math.acos(0.3)
    assert spec.exact_turns is None
    assert [t for t, _ in spec.angles] == pytest.approx([theta, 2 * math.pi - theta])
    assert spec.purity_residual < 1e-9


def test_spectrum_from_angles_sign_follows_rank():
    spec = spectrum_from_angles(9, [(0.0, 1), (1.0, 1), (2 * math.pi - 1.0, 1)])
    assert spec.rank == 1
    assert spec.epsilon == -1
    assert spec.forced_zeros == [9]
    assert spectrum_from_angles(9, [(1.0, 1), (2 * math.pi - 1.0, 1)]).epsilon == 1


def test_li_diagnostic(e5_spectrum):
    report = diagnose_rational_angles(e5_spectrum)
    assert report.violated
    assert report.flagged_angles[0][1] == Fraction(1, 2)
    generic = spectrum(LPolynomial(q=5, degree=2, coeffs=(1, -3, 25)))
    assert not diagnose_rational_angles(generic).violated
