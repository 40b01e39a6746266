import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from symbreak.spectrum import DomainSpec, neumann_spectrum  # noqa: E402


@pytest.fixture(scope="session")
def disc():
    return DomainSpec("disc")


@pytest.fixture(scope="session")
def disc_spectrum(disc):
    return neumann_spectrum(disc, 200.0)


@pytest.fixture(scope="session")
def ball_spectrum():
    return neumann_spectrum(DomainSpec("ball"), 60.0)
