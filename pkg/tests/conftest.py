"""
Shared pytest fixtures for hk-gic tests.

Settings are cached by get_settings(); the cache is cleared around every test
so monkeypatched HKGIC_ variables take effect.
"""

import numpy as np
import pytest

from hkgic.lib.config import get_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    """seeded generator so random-instance tests are reproducible"""
    return np.random.default_rng(20240611)
