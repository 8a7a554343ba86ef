import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ballistic_fi import get_potential


@pytest.fixture(scope="session")
def quadratic1():
    return get_potential("quadratic", alpha=1.0)


@pytest.fixture(scope="session")
def quadratic2():
    return get_potential("quadratic", alpha=2.0)


@pytest.fixture(scope="session")
def sine2():
    return get_potential("sine_squared", c=1.0)


@pytest.fixture(scope="session")
def double_well():
    return get_potential("double_well")
