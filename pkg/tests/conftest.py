import numpy as np
import pytest

from dgdlab import topology


@pytest.fixture(scope="session")
def mix_quarter():
    """3-agent mixing matrix with 1/2 diagonal and 1/4 off-diagonal."""
    w = np.array([[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]])
    return topology.validate_mixing(w)


@pytest.fixture(scope="session")
def mix_skewed():
    """3-agent mixing matrix with eigenvalues (-0.1, 0.1, 1)."""
    w = np.array([[0.4, 0.3, 0.3], [0.3, 0.3, 0.4], [0.3, 0.4, 0.3]])
    return topology.validate_mixing(w)


@pytest.fixture(scope="session")
def mix_single():
    return topology.validate_mixing(np.array([[1.0]]))
