import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def within_sigmas(freq: float, p: float, n: int, k: float = 4.0) -> bool:
    sigma = np.sqrt(p * (1 - p) / n)
    return abs(freq - p) <= k * sigma
