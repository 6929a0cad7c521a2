import numpy as np
import pytest

from trendfolio.closed_forms import SectorParams, single_asset_sharpe_sq


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def sh1_sq():
    """Single-asset squared Sharpe at the reference parameters."""
    params = SectorParams.from_values(2, 0.0, 0.0)
    return single_asset_sharpe_sq(params.Q, params.R, params.p, params.q)


def random_corr(rng, n, extra=2):
    a = rng.normal(size=(n, n + extra))
    cov = a @ a.T
    d = np.sqrt(np.diag(cov))
    return cov / np.outer(d, d)


def random_symmetric(rng, n):
    w = rng.normal(size=(n, n))
    return w + w.T
