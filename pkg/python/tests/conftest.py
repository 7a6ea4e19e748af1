"""Shared fixtures for the centroidal_power test suite."""

import numpy as np
import pytest

from centroidal_power import WeightedGenerator, unit_square
from centroidal_power.models import Point2


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def two_generators():
    """Two generators whose shared bisector is the line x = 0.6."""
    return (
        WeightedGenerator(site=Point2(0.25, 0.5), weight=0.1),
        WeightedGenerator(site=Point2(0.75, 0.5), weight=0.0),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
