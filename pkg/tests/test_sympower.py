import math

import numpy as np
import pytest

from src.engines import sympower_engine as sym
from src.engines.lpoly_engine import PlaceLedger, lpolynomial
from src.engines.race_engine import t_direct
from src.models.sympower import FourierProfile
from src.utils.errors import InvalidInputError, QuadratureError, WorkBoundExceeded

ROOT3 = math.sqrt(3)


def test_chebyshev_u_values():
    theta = 0.3
    assert sym.chebyshev_u(0, theta) == pytest.approx(1.0)
    assert sym.chebyshev_u(3, theta) == pytest.approx(math.sin(4 * theta) / math.sin(theta))
    assert sym.chebyshev_u(4, 0.0) == pytest.approx(5.0)
    assert sym.chebyshev_u(4, math.pi) == pytest.approx(5.0)
    assert sym.chebyshev_u(2, np.array([0.1, 0.2])).shape == (2,)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_double_angle_expansion(m):
    coeffs = sym.double_angle_expand(m)
    assert len(coeffs) == m + 1
    for theta in (0.2, 1.1, 2.5):
        expanded = sum(c * sym.chebyshev_u(2 * m - 2 * j, theta) for j, c in enumerate(coeffs))
        assert expanded == pytest.approx(sym.chebyshev_u(m, 2 * theta))


def test_fourier_coefficients_are_orthonormal():
    def u3(theta):
        return sym.chebyshev_u(3, theta)

    assert sym.fourier_coeff(u3, 3) == pytest.approx(1.0, abs=1e-8)
    assert sym.fourier_coeff(u3, 2) == pytest.approx(0.0, abs=1e-8)
    assert sym.fourier_coeff(u3, 0) == pytest.approx(0.0, abs=1e-8)


def test_fourier_profile_reconstructs_polynomial_test_function():
    def v(theta):
        return 2 * sym.chebyshev_u(1, theta) - 0.5 * sym.chebyshev_u(4, theta)

    profile = sym.fourier_profile(v, 6)
    assert profile.is_centered
    assert profile.coefficient(1) == pytest.approx(2.0)
    assert profile.coefficient(4) == pytest.approx(-0.5)
    assert profile.coefficient(10) == 0.0
    assert sym.evaluate(profile, 0.7) == pytest.approx(v(0.7))


def test_divergent_quadrature_raises():
    with pytest.raises(QuadratureError):
        sym.fourier_coeff(lambda theta: 1.0 / (theta - 1.0) ** 2, 1)


def test_sym1_sums_are_zero_power_sums(e5, e5_ledger, e5_lpoly):
    for n in range(1, 7):
        s = sym.sym_power_sums(e5, 1, n, e5_ledger)
        assert s.s_prime == -e5_lpoly.power_sums(n)[-1]
    assert sym.sym_power_sums(e5, 1, 4, e5_ledger).normalized == pytest.approx(4.0)


def test_chebyshev_place_sum_of_e5(e5_ledger):
    # good places of degree one: a_v = 1 and a_v = -2 over F_3
    assert sym.chebyshev_place_sum(e5_ledger, 1, 1) == pytest.approx(-1 / ROOT3)
    assert sym.chebyshev_place_sum(e5_ledger, 2, 1) == pytest.approx(-1 / 3)


def test_explicit_formula_bracket(e5, e5_ledger):
    assert sym.bracket(e5, 1, 4, e5_ledger) == pytest.approx(-3.0)
    assert abs(sym.explicit_formula_residual(e5, 1, 4, e5_ledger)) < 0.2


def test_sympower_table_records_failures(e5):
    ledger = PlaceLedger(e5, max_residue_field=27)
    rows = sym.sympower_table(e5, 2, 4, ledger)
    assert [r.error is None for r in rows] == [True, True, True, False]
    assert math.isnan(rows[3].normalized)
    assert rows[0].as_row()["N"] == 1


def test_sym1_beyond_counting_uses_l_polynomial(e5):
    ledger = PlaceLedger(e5, max_residue_field=81)
    lpolynomial(e5, 4, ledger)
    s = sym.sym_power_sums(e5, 1, 8, ledger)
    assert s.source == "recovered"
    assert s.s_prime == -4 * 81 ** 2


def test_residual_decay_tools():
    residuals = {n: 2.0 * math.exp(-0.5 * n) for n in range(1, 10)}
    assert sym.residual_decay_slope(residuals) == pytest.approx(-0.5)
    c = sym.fitted_error_constant(residuals, 1, 3)
    assert all(abs(r) <= c * 3 ** (-n / 6) + 1e-12 for n, r in residuals.items())


def test_q_v_requires_centered_profile():
    with pytest.raises(InvalidInputError):
        sym.q_v(FourierProfile([1.0, 0.5]), 3, 9, {1: 0.0})
    with pytest.raises(InvalidInputError):
        sym.q_v(FourierProfile([0.0, 0.5]), 3, 9, {})


def test_q_v_value():
    profile = FourierProfile([0.0, 1.0, 0.0, 2.0])
    value = sym.q_v(profile, 2, 9, {1: 0.0, 3: 1.0})
    c = 9 / 8
    assert value == pytest.approx(c * 1.0 + (c - 1.5 * 1.0) * 2.0)


def test_t_v_direct_with_u1_matches_race(e5_ledger):
    for x in (1, 2, 3):
        value = sym.t_v_direct(e5_ledger, lambda t: sym.chebyshev_u(1, t), x)
        assert value == pytest.approx(-t_direct(e5_ledger, x))
        place_sums = sum(sym.chebyshev_place_sum(e5_ledger, 1, d) for d in range(1, x + 1))
        assert value == pytest.approx(x / 3 ** (x / 2) * place_sums)


def test_estimate_mm_shape(e5, e5_ledger):
    est = sym.estimate_mm(e5, 1, 6, e5_ledger)
    assert len(est.averages) == 6
    assert est.to_json()["rounded"] == est.rounded


def test_uncountable_degree_without_l_polynomial(e5):
    ledger = PlaceLedger(e5, max_residue_field=9)
    with pytest.raises(WorkBoundExceeded):
        sym.sym_power_sums(e5, 2, 3, ledger)
