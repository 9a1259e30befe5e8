import numpy as np
import pytest

from tandemq import Rates


@pytest.fixture(scope="session")
def rates5() -> Rates:
    """The worked-example parameter set used for the golden values."""
    return Rates(0.1, (0.4, 0.5))


@pytest.fixture(scope="session")
def rates3() -> Rates:
    """Three-station set with pairwise distinct service weights."""
    return Rates(0.1, (0.4, 0.5, 0.3))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def random_stable_rates(rng: np.random.Generator) -> Rates:
    """Stable two-station rates with distinct service weights."""
    while True:
        lam = rng.uniform(0.02, 0.3)
        mu1 = rng.uniform(lam * 1.05, 1.0)
        mu2 = rng.uniform(lam * 1.05, 1.0)
        r = Rates(lam, (mu1, mu2))
        if r.stable and not r.equal_service_rates():
            return r
