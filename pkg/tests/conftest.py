from pathlib import Path

import numpy as np
import pytest

import evuc

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def inst10():
    return evuc.builtin_instance(10, "v2g")


@pytest.fixture(scope="session")
def inst10_ll():
    return evuc.builtin_instance(10, "load-leveling")


@pytest.fixture(scope="session")
def inst20():
    return evuc.builtin_instance(20, "v2g")


@pytest.fixture(scope="session")
def published_v2g():
    return evuc.read_csv(FIXTURES / "published_best_v2g.csv")


@pytest.fixture(scope="session")
def published_ll():
    return evuc.read_csv(FIXTURES / "published_best_load_leveling.csv")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

