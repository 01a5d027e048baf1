#
# shared fixtures for the cluster forests tests
#
import os

import numpy as np
import pytest

from data import DataMatrix, LabelVector


def blobs(n=200, p=10, offset=5.0, seed=7):
    """two gaussian clouds at +offset and -offset in every coordinate, first half label 0."""
    rng = np.random.default_rng(seed)
    truth = np.repeat([0, 1], [n // 2, n - n // 2])
    centers = np.where(truth[:, None] == 0, offset, -offset)
    values = centers + rng.standard_normal((n, p))
    return DataMatrix.from_array(values), LabelVector(truth, 2)


@pytest.fixture
def two_blobs():
    return blobs()


@pytest.fixture
def small_blobs():
    return blobs(n=40, p=4, offset=6.0, seed=3)


def dataset_path(name):
    """path of a converted benchmark file under $CF_DATA_DIR; skips the test when absent."""
    path = os.path.join(os.environ.get('CF_DATA_DIR', ''), f'{name}.csv')
    if not os.environ.get('CF_DATA_DIR') or not os.path.exists(path):
        pytest.skip(f'{name}.csv not found under CF_DATA_DIR')
    return path
