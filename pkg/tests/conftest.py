import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from csit_sharing.channel import AntennaConfig, as_config  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte-Carlo runs reproducing the published experiments")


@pytest.fixture
def symmetric3():
    """Three users, two antennas at every node, one stream each."""

    return AntennaConfig.homogeneous(3, 2)


@pytest.fixture
def heterogeneous3():
    return as_config((2, 1, 3), (2, 1, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(7)
