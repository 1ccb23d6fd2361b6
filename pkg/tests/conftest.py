import numpy as np
import pytest

from permris import Direction


def rel_err(a: float, b: float) -> float:
    """Relative difference with a unit floor.

    Gains are phasor-sum powers with natural scale >= 1 (a single element
    contributes unit power); below that scale a pure ratio only amplifies
    float noise of the oscillatory sum.
    """
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def random_visible(rng, radius: float = 1.0) -> Direction:
    ang = rng.uniform(0.0, 2.0 * np.pi)
    rad = radius * np.sqrt(rng.uniform())
    return Direction(rad * np.cos(ang), rad * np.sin(ang))


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
