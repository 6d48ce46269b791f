import numpy as np
import pytest

from unbcount.datasets import NMES_ENV_VAR, load_nmes, nmes_path_from_env

# The (r, p) grid used by the distribution-level property tests.
GRID_R = (0.5, 1.0, 2.0, 5.0, 20.0)
GRID_P = (0.1, 0.3, 0.5, 0.7, 0.9)
GRID = tuple((r, p) for r in GRID_R for p in GRID_P)

NMES_SKIP_NOTICE = (
    "NMES file not available: run scripts/fetch_nmes.py and set "
    f"{NMES_ENV_VAR} to its output directory")


@pytest.fixture(scope="session")
def nmes_dataset():
    path = nmes_path_from_env()
    if path is None:
        pytest.skip(NMES_SKIP_NOTICE)
    return load_nmes(path)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
