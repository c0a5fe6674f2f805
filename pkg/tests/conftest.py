"""Shared fixtures: numeric contexts and the case-study systems."""
import pytest

from services.constants_service import PolySystem
from utils.rignum import NumericContext

CASE_POLYS = ('k^2 + 3', 'k^3 - 5', 'k^5 + 3', '2*k^6 + 3')


@pytest.fixture(scope="session")
def ctx():
    return NumericContext(40)


@pytest.fixture(scope="session")
def ctx15():
    return NumericContext(15)


@pytest.fixture(scope="session")
def f0():
    return PolySystem.parse(['k^2 + 3'])


@pytest.fixture(scope="session")
def cases():
    return [PolySystem.parse([text]) for text in CASE_POLYS]


@pytest.fixture(scope="session")
def sophie_germain():
    return PolySystem.parse(['2k + 1']).shifted()
