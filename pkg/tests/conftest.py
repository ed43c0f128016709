import pytest

from fatpoint.oracle import OracleConfig


@pytest.fixture
def cfg():
    return OracleConfig()
