import math

import numpy as np
import pytest

from pfrlab import DistortionMatrix, FinitePmf, solve_at_distortion


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@pytest.fixture(scope="session")
def uniform2():
    return FinitePmf.uniform(2)


@pytest.fixture(scope="session")
def hamming2():
    return DistortionMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture(scope="session")
def bsc_sol(uniform2, hamming2):
    """RD solution for the uniform binary source with Hamming distortion at D = 0.11."""
    return solve_at_distortion(uniform2, hamming2, 0.11, tol_D=1e-7)
