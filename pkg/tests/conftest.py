import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sprcause import fixtures


@pytest.fixture(scope="session")
def example_model():
    return fixtures.builtin_model("example")


@pytest.fixture(scope="session")
def example_dist():
    return fixtures.builtin_dist("example")


@pytest.fixture(scope="session")
def appendix_model():
    return fixtures.builtin_model("appendix-e")


@pytest.fixture(scope="session")
def appendix_dist():
    return fixtures.builtin_dist("appendix-e")


@pytest.fixture(scope="session")
def grid_model_a():
    return fixtures.builtin_model("grid-a")


@pytest.fixture(scope="session")
def grid_dist():
    return fixtures.builtin_dist("grid")
