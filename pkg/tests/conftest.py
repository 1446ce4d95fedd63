import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sqa_chain.instances import generate_instance  # noqa: E402


@pytest.fixture(scope="session")
def inst6():
    return generate_instance(6, "uniform01", 42)


@pytest.fixture(scope="session")
def inst8_ordered():
    return generate_instance(8, "ordered(1)", 0)


@pytest.fixture(scope="session")
def inst4():
    return generate_instance(4, "uniform01", 3)
