import sys
from pathlib import Path

import numpy as np
import pytest

# chima.py lives at the repository root, next to the packages.
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from mediation.core_model import make_dataset  # noqa: E402


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run the Monte-Carlo tests marked slow')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long Monte-Carlo checks, run with --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_dataset(rng):
    """n = 30 observations of 12 mediators with two of them active."""
    n, p = 30, 12
    exposure = rng.normal(size=n)
    mediators = rng.normal(size=(n, p))
    mediators[:, :3] += np.outer(exposure, [0.8, -0.6, 0.7])
    outcome = mediators[:, [0, 1]] @ [0.9, 0.7] + 0.5 * exposure + rng.normal(size=n)
    return make_dataset(exposure, mediators, outcome)


@pytest.fixture
def wide_dataset(rng):
    """n = 8 observations of 10 mediators plus one covariate."""
    n, p = 8, 10
    return make_dataset(rng.normal(size=n), rng.normal(size=(n, p)), rng.normal(size=n),
                        covariates=rng.normal(size=(n, 1)))
