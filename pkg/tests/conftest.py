import pytest

from helpers import LEVEL_CAMERA, STANDARD_TROLLEY


@pytest.fixture
def camera():
    return LEVEL_CAMERA


@pytest.fixture
def trolley():
    return STANDARD_TROLLEY
