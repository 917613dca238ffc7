import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the shared oracles module

from bellsampling import parse_hamiltonian

FIXTURE_DIR = Path(__file__).parent.parent / "src" / "bellsampling" / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


def load_fixture(name: str):
    return parse_hamiltonian((FIXTURE_DIR / name).read_text())


@pytest.fixture(scope="session")
def h2():
    return load_fixture("h2.ham")


@pytest.fixture(scope="session")
def h4():
    return load_fixture("h4.ham")
