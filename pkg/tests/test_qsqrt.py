from fractions import Fraction

import pytest

from src.models.qsqrt import QSqrtValue, sqrt_power


def test_sign_of_mixed_values():
    root3 = QSqrtValue.sqrt_q(3)
    assert (root3 - 1).sign() == 1
    assert (root3 - 2).sign() == -1
    assert (2 * root3 - 3).sign() == 1        # 12 > 9
    assert (root3 * root3 - 3).sign() == 0


def test_exact_cancellation():
    q = 3
    x = sqrt_power(q, 3) - 3 * QSqrtValue.sqrt_q(q)
    assert x.is_zero()
    assert x.sign() == 0


def test_inverse_and_division():
    x = QSqrtValue(Fraction(1), Fraction(1), 5)
    assert x * x.inverse() == 1
    assert (1 / x) * x == 1
    with pytest.raises(ZeroDivisionError):
        QSqrtValue.rational(0, 5).inverse()


def test_perfect_square_q_collapses():
    x = QSqrtValue.sqrt_q(9)
    assert x.b == 0
    assert x == 3
    assert sqrt_power(25, -3) == Fraction(1, 125)


def test_negative_powers():
    assert sqrt_power(3, -2) == Fraction(1, 3)
    assert float(sqrt_power(3, -1)) == pytest.approx(3 ** -0.5)


def test_mixing_fields_rejected():
    with pytest.raises(ValueError):
        QSqrtValue.sqrt_q(3) + QSqrtValue.sqrt_q(5)
