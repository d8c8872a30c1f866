import pytest

from friable.dickman import build_dickman
from friable.sieve import build_table


@pytest.fixture(scope="session")
def table():
    return build_table(10**6)


@pytest.fixture(scope="session")
def dickman():
    return build_dickman()
