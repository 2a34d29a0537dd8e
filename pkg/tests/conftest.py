import numpy as np
import pytest

from eif.forest import build_forest
from eif.synthetic import gen_gaussian_blob


@pytest.fixture(scope="session")
def blob_2d():
    return gen_gaussian_blob(2000, 2, seed=7)


@pytest.fixture(scope="session")
def small_forest(blob_2d):
    """Fully extended 2-D forest shared by read-only tests."""
    return build_forest(blob_2d, 50, 256, 1, seed=7)


@pytest.fixture(scope="session")
def axis_forest(blob_2d):
    """Extension-level-0 (axis-parallel) counterpart of small_forest."""
    return build_forest(blob_2d, 50, 256, 0, seed=7)
