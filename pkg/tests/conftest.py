import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from stratmc import cgs  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def coin():
    return cgs.g_coin()


@pytest.fixture
def blind():
    return cgs.g_3blind()


@pytest.fixture
def coin_path():
    return os.path.join(FIXTURES, "g_coin.cgs")
