"""
Shared fixtures for the tensorlab test suite
"""

import os

import numpy as np
import pytest

from tensorlab.config import get_settings
from tensorlab.services.linalg import UnitaryFamily, haar_family
from tensorlab.services.logging import setup_logging


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Fresh settings per test, without TENSORLAB_* leaking from the shell"""
    for key in list(os.environ):
        if key.startswith("TENSORLAB_"):
            monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    setup_logging("WARNING")
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def haar_pair() -> UnitaryFamily:
    return haar_family(2, 4, 3)


@pytest.fixture
def pauli_family() -> UnitaryFamily:
    """(I, X, Z) on C^2"""
    return UnitaryFamily((
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.diag([1.0, -1.0]).astype(complex),
    ))
