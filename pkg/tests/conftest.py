import numpy as np
import pytest
from hypothesis import settings

from fgnls import build_context, defocusing_surface, focusing_surface

settings.register_profile("fgnls", max_examples=15, deadline=None, derandomize=True)
settings.load_profile("fgnls")

PAPER_ALPHAS = (0.1 + 2j, 0.5j, -0.1 + 1j)
G4_ALPHAS = (0.2 + 1j, -0.2 + 1j, 0.1 + 1j, -0.1 + 1j, 1j)
G3_ALPHAS = (0.15 + 1j, -0.15 + 1j, 0.05 + 1j, -0.05 + 1j)
DNLS_BANDS = ((0.0, 1.0), (2.0, 2.5))


def random_focusing(rng, g):
    """Cuts at distinct abscissas spaced by at least 0.1, heights in [0.3, 1.5]."""
    xs = rng.choice(np.arange(-20, 21), g + 1, replace=False) * 0.1
    return focusing_surface(xs + 1j * rng.uniform(0.3, 1.5, g + 1))


def random_defocusing(rng, g):
    """Interlaced real endpoints with gaps of at least 0.1."""
    steps = rng.uniform(0.1, 1.0, 2 * g + 2)
    e = np.cumsum(steps) - steps.sum() / 2
    return defocusing_surface(e.reshape(-1, 2))


@pytest.fixture(scope="session")
def paper_ctx():
    return build_context(focusing_surface(PAPER_ALPHAS))


@pytest.fixture(scope="session")
def g4_ctx():
    return build_context(focusing_surface(G4_ALPHAS))


@pytest.fixture(scope="session")
def g3_ctx():
    return build_context(focusing_surface(G3_ALPHAS))


@pytest.fixture(scope="session")
def dnls_ctx():
    return build_context(defocusing_surface(DNLS_BANDS))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
