import numpy as np
import pytest

from trendfolio.errors import DegenerateRate, HorizonTooSmall
from trendfolio.kernels import (
    ProductKind,
    ema_matrix,
    kernel_product_finite,
    kernel_product_stationary,
    stationary_horizon,
)

KINDS = list(ProductKind)
RATES = (0.1, 0.5, 0.9, 0.99)


def test_ema_matrix_is_strictly_lower_triangular():
    e = ema_matrix(0.7, 6, strength=2.0)
    assert np.all(np.triu(e) == 0)
    assert e[5, 2] == pytest.approx(2.0 * 0.7**2)
    assert e[1, 0] == 2.0


@pytest.mark.parametrize("t", [2, 3, 10, 40])
def test_pp_with_zero_rate_is_one(t):
    assert kernel_product_finite("PP", 0.0, 0.5, t) == 1.0


def test_pp_first_step_is_empty_sum():
    # no lagged return exists at the first step
    assert kernel_product_finite("PP", 0.0, 0.5, 1) == 0.0
    assert kernel_product_finite("PP", 0.0, 0.5, 1, method="dense") == 0.0


@pytest.mark.parametrize("p", RATES)
@pytest.mark.parametrize("t", [1, 2, 5, 37])
def test_pp_partial_geometric_sum(p, t):
    expected = sum(p ** (2 * s) for s in range(t - 1))
    assert kernel_product_finite("PP", p, 0.3, t) == pytest.approx(expected, rel=1e-14, abs=0)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("p,q", [(0.1, 0.9), (0.5, 0.5), (0.99, 0.9), (0.9, 0.99)])
@pytest.mark.parametrize("t", [1, 2, 7, 60])
def test_recursive_matches_dense(kind, p, q, t):
    fast = kernel_product_finite(kind, p, q, t)
    dense = kernel_product_finite(kind, p, q, t, method="dense")
    assert fast == pytest.approx(dense, rel=1e-12, abs=1e-300)


def test_stationary_examples():
    assert kernel_product_stationary("PP", 0.5, 0.5) == pytest.approx(4 / 3)
    assert kernel_product_stationary("PQQP", 0.0, 0.0) == 1.0
    assert kernel_product_stationary("PQQ", 0.99, 0.99) == pytest.approx(0.99 / (0.0199 * 0.0199))
    assert kernel_product_stationary("PP", 0.99, 0.5) == pytest.approx(50.2512562814)


def test_large_horizon_approaches_limit():
    for kind in KINDS:
        dense = kernel_product_finite(kind, 0.99, 0.99, 2000, method="dense")
        limit = kernel_product_stationary(kind, 0.99, 0.99)
        assert dense == pytest.approx(limit, rel=1e-6)
        fast = kernel_product_finite(kind, 0.99, 0.99, 5000)
        assert fast == pytest.approx(limit, rel=1e-12)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("p", RATES)
@pytest.mark.parametrize("q", RATES)
def test_residual_decreases_monotonically(kind, p, q):
    limit = kernel_product_stationary(kind, p, q)
    gaps = [limit - kernel_product_finite(kind, p, q, t) for t in range(2, 400)]
    ulp = 8 * np.finfo(float).eps * limit  # converged gaps hover at round-off level
    assert all(g >= -ulp for g in gaps)
    assert all(b <= a + ulp for a, b in zip(gaps, gaps[1:]))
    if max(p, q) < 0.99:
        assert gaps[-1] < 1e-8 * limit


def test_degenerate_rate_and_horizon():
    with pytest.raises(DegenerateRate):
        kernel_product_stationary("PP", 1.0, 0.5)
    with pytest.raises(HorizonTooSmall):
        kernel_product_finite("PP", 0.5, 0.5, 0)
    with pytest.raises(ValueError):
        kernel_product_finite("PP", 0.5, 0.5, 3, method="magic")


def test_stationary_horizon():
    assert stationary_horizon(0.01, 0.05) == 1000
    assert stationary_horizon(0.05, 0.05) == 200
