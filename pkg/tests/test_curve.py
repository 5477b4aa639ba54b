import math

import pytest
from pydantic import ValidationError

from src.engines.curve_engine import (
    base_change, bad_places, conductor_degree, curve_from_json, is_squarefree, make_curve,
    multiplicative_locus, quadratic_twist, reduce_at, reduction_table, short_form, translate,
)
from src.engines.places import places_of_degree
from src.models.curve import ReductionType
from src.models.poly import PolyOverFq
from src.utils.errors import CurveError, TwistError
from src.utils.serialization import read_json


def _by_label(rows):
    return {r.place.label(): r for r in rows}


def test_good_traces_of_e5(e5, f3):
    rows = _by_label(reduce_at(e5, pl) for pl in places_of_degree(f3, 1))
    assert rows["t + 2"].type is ReductionType.GOOD
    assert rows["t + 2"].a_v == 1
    assert rows["t + 1"].type is ReductionType.GOOD
    assert rows["t + 1"].a_v == -2
    assert rows["t"].type.is_bad
    assert rows["inf"].type.is_bad


def test_theta_matches_trace(e5, f3):
    for pl in places_of_degree(f3, 1):
        r = reduce_at(e5, pl)
        if r.type is ReductionType.GOOD:
            assert r.a_v == pytest.approx(2 * math.sqrt(r.q_v) * math.cos(r.theta_v))
            assert r.point_count == r.q_v + 1 - r.a_v


def test_hasse_bound_through_degree_three(e5):
    table = reduction_table(e5, 3)
    assert len(table.rows) == 4 + 3 + 8
    for r in table.rows:
        assert r.a_v * r.a_v <= 4 * r.q_v


def test_legendre_bad_reduction(legendre, f5):
    rows = _by_label(reduce_at(legendre, pl) for pl in places_of_degree(f5, 1))
    assert rows["t"].type in (ReductionType.SPLIT, ReductionType.NONSPLIT)
    assert rows["t + 4"].type in (ReductionType.SPLIT, ReductionType.NONSPLIT)
    assert rows["inf"].type is ReductionType.ADDITIVE
    assert rows["t + 1"].type is ReductionType.GOOD


def test_legendre_conductor(legendre):
    conductor = conductor_degree(legendre)
    assert conductor.degree == 4
    assert conductor.analytic_degree == 0
    assert conductor.multiplicative_degree == 2
    assert conductor.infinity_exponent == 2


def test_bad_places_of_legendre(legendre):
    labels = [pl.label() for pl in bad_places(legendre)]
    assert labels == ["inf", "t", "t + 4"]


def test_conductor_needs_tame_characteristic(e5):
    with pytest.raises(CurveError):
        conductor_degree(e5)


def test_singular_and_isotrivial_models_rejected(f5):
    with pytest.raises(CurveError, match="discriminant"):
        make_curve(f5, 0, 0, 0, 0, 0)
    with pytest.raises(CurveError, match="constant j"):
        make_curve(f5, 0, 0, 0, 0, 1)


def test_multiplicative_locus_of_legendre(legendre, f5):
    locus = multiplicative_locus(short_form(legendre))
    assert locus == PolyOverFq.from_ints(f5, [0, -1, 1])


def test_squarefree(f5):
    t = PolyOverFq.t(f5)
    assert is_squarefree(t * (t + 1))
    assert not is_squarefree(t * t * (t + 1))


def test_twist_rejects_bad_polynomials(legendre, f5):
    short = short_form(legendre)
    t = PolyOverFq.t(f5)
    with pytest.raises(TwistError):
        quadratic_twist(short, t)
    with pytest.raises(TwistError):
        quadratic_twist(short, (t + 2) * (t + 2))
    with pytest.raises(TwistError):
        quadratic_twist(legendre, t + 2)


def test_twist_of_degree_one_has_conductor_five(legendre, f5):
    twist = quadratic_twist(short_form(legendre), PolyOverFq.t(f5) + 2)
    assert conductor_degree(twist).analytic_degree == 1


def test_base_change_keeps_coefficients(legendre):
    lifted = base_change(legendre, 2)
    assert lifted.q == 25
    assert [a.coeffs for a in lifted.coefficients] == [a.coeffs for a in legendre.coefficients]
    assert base_change(legendre, 1) is legendre


def test_curve_files(data_dir, e5, legendre):
    assert curve_from_json(read_json(data_dir / "ulmer_d5_q3.json")).coefficients == e5.coefficients
    assert curve_from_json(read_json(data_dir / "legendre_f5.json")).coefficients == legendre.coefficients


def test_family_curve_documents(e5):
    assert curve_from_json({"p": 3, "family": "ulmer", "d": 5}).coefficients == e5.coefficients
    assert curve_from_json({"q": 5, "family": "legendre"}).name == "Legendre"


def test_curve_document_needs_five_arrays():
    with pytest.raises(ValidationError):
        curve_from_json({"p": 5, "a": [[], [], [], []]})
    with pytest.raises(ValidationError):
        curve_from_json({"p": 5, "family": "ulmer"})


@pytest.mark.parametrize("c", [1, 2, 3, 4])
def test_reduction_table_invariant_under_translation(legendre, c):
    def rows(curve):
        return sorted((r.place.degree, r.type.value, r.a_v) for r in reduction_table(curve, 2).rows)

    moved = translate(legendre, c)
    assert moved.a2 != legendre.a2
    assert rows(moved) == rows(legendre)
