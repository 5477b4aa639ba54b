import pytest

from src.engines.places import field_from_q, make_field
from src.models.poly import PolyOverFq
from src.utils.errors import FieldError


def test_prime_field_arithmetic(f5):
    two, three = f5.element(2), f5.element(3)
    assert (two + three).is_zero()
    assert (two * three).code == 1
    assert two.inverse().code == 3
    assert (two ** 4).code == 1


def test_extension_field_is_a_field(f9):
    assert f9.q == 9
    assert len(f9.modulus) == 3
    for x in f9.enumerate_elements()[1:]:
        assert (x * x.inverse()).code == 1
        assert (x ** 8).code == 1


def test_frobenius_fixes_the_prime_field(f9):
    fixed = [x for x in f9.enumerate_elements() if x.frobenius() == x]
    assert len(fixed) == 3


def test_squares_in_odd_field(f9):
    squares = {(x * x).code for x in f9.enumerate_elements()[1:]}
    assert len(squares) == 4
    assert all(f9.is_square(c) for c in squares)


def test_codes_round_trip(f9):
    for code in range(f9.q):
        assert f9.code(f9.coords(code)) == code


def test_field_from_q():
    ctx = field_from_q(25)
    assert (ctx.p, ctx.k) == (5, 2)
    assert field_from_q(7) == make_field(7)


@pytest.mark.parametrize("q", [1, 6, 12, 100])
def test_field_from_q_rejects_non_prime_powers(q):
    with pytest.raises(FieldError):
        field_from_q(q)


def test_make_field_rejects_composite_characteristic():
    with pytest.raises(FieldError):
        make_field(9)


def test_polynomial_division_and_gcd(f5):
    f = PolyOverFq.from_ints(f5, [-1, 0, 1])      # t^2 - 1
    g = PolyOverFq.from_ints(f5, [-1, 1])         # t - 1
    quot, rem = divmod(f, g)
    assert rem.is_zero()
    assert quot == PolyOverFq.from_ints(f5, [1, 1])
    assert f.gcd(PolyOverFq.from_ints(f5, [1, 1])) == PolyOverFq.from_ints(f5, [1, 1])
    assert f.valuation(g) == 1
    assert (f * f).valuation(g) == 2


def test_from_code_enumerates_monic_polynomials(f3):
    polys = [PolyOverFq.from_code(f3, i, 2) for i in range(9)]
    assert len(set(polys)) == 9
    assert all(p.is_monic() and p.degree == 2 for p in polys)
    assert polys[0] == PolyOverFq.monomial(f3, 2)


def test_derivative_and_evaluation(f5):
    f = PolyOverFq.from_ints(f5, [1, 2, 3])
    assert f.derivative() == PolyOverFq.from_ints(f5, [2, 1])
    assert f.eval(f5.element(1)).code == 1
