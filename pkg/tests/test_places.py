import pytest

from src.engines import places as places_engine
from src.engines.places import (
    count_places, distinct_degree_parts, is_irreducible, is_irreducible_exhaustive, places_of_degree,
)
from src.models.poly import PolyOverFq
from src.utils.config import Config
from src.utils.errors import BoundViolation, PolynomialError, WorkBoundExceeded


def test_degree_one_places_include_infinity(f3):
    places = places_of_degree(f3, 1)
    assert len(places) == 4
    assert places[0].is_infinite
    assert [p.label() for p in places[1:]] == ["t", "t + 1", "t + 2"]


@pytest.mark.parametrize("d, expected", [(1, 4), (2, 3), (3, 8), (4, 18)])
def test_place_counts_over_f3(f3, d, expected):
    assert len(places_of_degree(f3, d)) == expected
    assert count_places(f3, d).count == expected


@pytest.mark.parametrize("d", [1, 2, 3])
def test_place_count_residual_within_bound(f9, d):
    count = count_places(f9, d)
    assert count.within_bound
    assert count.count == len(places_of_degree(f9, d))


def test_residual_past_the_bound_raises(monkeypatch, f3):
    monkeypatch.setattr(places_engine, "BASE_GENUS", -1)
    with pytest.raises(BoundViolation):
        count_places(f3, 2)


def test_ben_or_agrees_with_exhaustive_search(f3):
    for index in range(27):
        f = PolyOverFq.from_code(f3, index, 3)
        assert is_irreducible(f) == is_irreducible_exhaustive(f)


def test_distinct_degree_parts(f3):
    # (t)(t + 1)(t^2 + 1)
    f = PolyOverFq.from_ints(f3, [0, 1]) * PolyOverFq.from_ints(f3, [1, 1]) * PolyOverFq.from_ints(f3, [1, 0, 1])
    parts = distinct_degree_parts(f)
    assert parts[1] == PolyOverFq.from_ints(f3, [0, 1, 1])
    assert parts[2] == PolyOverFq.from_ints(f3, [1, 0, 1])


def test_zero_degree_rejected(f3):
    with pytest.raises(PolynomialError):
        places_of_degree(f3, 0)


def test_count_limit(monkeypatch, f3):
    monkeypatch.setattr(Config, "COUNT_LIMIT", 100)
    with pytest.raises(WorkBoundExceeded) as exc:
        count_places(f3, 5)
    assert exc.value.exit_code == 2
