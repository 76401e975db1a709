import numpy as np
import pytest

from pairoverlap.calibration import m_from_overlap

M_VALUES = (1.0, 2.0, float(np.log2(5.0)), 3.0)


def random_dataset(rng, max_n_points=200, max_dim=5, max_k=6):
    """Continuous random data (distance ties have probability zero)."""
    n_points = int(rng.integers(6, max_n_points + 1))
    dim = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, min(max_k, n_points) + 1))
    n_blobs = int(rng.integers(1, 5))
    centers = rng.normal(scale=4.0, size=(n_blobs, dim))
    points = centers[rng.integers(n_blobs, size=n_points)] + rng.normal(size=(n_points, dim))
    return points, k


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def canonical_m():
    return m_from_overlap(1.0 / 3.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
