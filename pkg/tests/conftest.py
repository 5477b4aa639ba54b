from pathlib import Path

import pytest

from src.engines.curve_engine import legendre_curve, ulmer_curve
from src.engines.lpoly_engine import PlaceLedger, lpolynomial, spectrum
from src.engines.places import make_field

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def f3():
    return make_field(3)


@pytest.fixture(scope="session")
def f5():
    return make_field(5)


@pytest.fixture(scope="session")
def f9():
    return make_field(3, 2)


@pytest.fixture(scope="session")
def e5():
    """y^2 + xy = x^3 - t^5 over F_3(t); L = 1 - 81 T^4."""
    return ulmer_curve(3, 1, 5)


@pytest.fixture(scope="session")
def e5_ledger(e5):
    return PlaceLedger(e5)


@pytest.fixture(scope="session")
def e5_lpoly(e5, e5_ledger):
    return lpolynomial(e5, 4, e5_ledger)


@pytest.fixture(scope="session")
def e5_spectrum(e5_lpoly):
    return spectrum(e5_lpoly)


@pytest.fixture(scope="session")
def legendre(f5):
    return legendre_curve(f5)


@pytest.fixture
def data_dir():
    return DATA_DIR
