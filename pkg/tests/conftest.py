import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from sastat import FeatureVector, PointSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240117)


def random_instance(rng, n, dims=2, scale=1.0):
    """A random point set with one standard-normal feature."""
    pts = PointSet(rng.random((n, dims)) * scale)
    fv = FeatureVector("z", rng.standard_normal(n))
    return pts, fv
