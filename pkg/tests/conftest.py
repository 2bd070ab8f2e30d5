"""
Shared fixtures for the test suite
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Repository root on the path so tests run without installing the package
sys.path.insert(0, str(Path(__file__).parent.parent))

from parsimax.core.streams import POPULATION_STREAM, stream
from parsimax.harness import DgpConfig, ErrorKind, ErrorModel, generate, random_population


HETEROSCEDASTIC = ErrorModel(ErrorKind.HETEROSCEDASTIC_SCALE)


@pytest.fixture
def rng():
    """Seeded generator; every test gets the same stream"""
    return stream(20240101, POPULATION_STREAM)


@pytest.fixture
def population(rng):
    """Heteroscedastic population with p=2, h=3"""
    return random_population(rng, 2, 3)


@pytest.fixture
def hetero_cfg():
    return DgpConfig(n=200, p=2, h=4, error_model=HETEROSCEDASTIC, seed=7)


@pytest.fixture
def dataset(hetero_cfg):
    """Simulated H0 sample with an intercept in Z"""
    return generate(hetero_cfg)
