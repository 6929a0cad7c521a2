import math

import numpy as np
import pytest

from trendfolio import errors
from trendfolio.kernels import ema_matrix
from trendfolio.market import make_spec, two_asset_spec
from trendfolio.moments import portfolio_moments, stationary_moments
from trendfolio.montecarlo import (
    PathEnsemble,
    SimConfig,
    empirical_sharpe,
    sample_paths,
    simulate,
    write_paths_csv,
)


def _fast_pair(re=0.5, rx=-0.3, beta0=0.3):
    return two_asset_spec(0.7, 1.2, re, rx, beta0=beta0, lam=0.05, eta=0.05)


def test_pure_noise_single_asset():
    spec = make_spec(0.05, 0.05, 0.0, 1.3, [[1.0]], [[1.0]])
    ens = simulate(SimConfig(spec, horizon=40, n_paths=8000, seed=3), [[1.0]])
    s = ens.summary()
    assert abs(s["mean"]) < 3 * s["mean_se"]
    assert s["variance"] == pytest.approx(1.3**4, abs=3 * s["variance_se"])


def test_bit_identical_across_workers():
    spec = _fast_pair()
    cfg = SimConfig(spec, horizon=20, n_paths=3000, seed=11, block_size=256)
    w = [[0.3, 0.1], [0.1, 0.6]]
    one = simulate(cfg, w, workers=1)
    four = simulate(cfg, w, workers=4)
    assert np.array_equal(one.path_sum, four.path_sum)
    assert np.array_equal(one.path_sumsq, four.path_sumsq)


def test_seed_changes_output():
    spec = _fast_pair()
    w = np.eye(2)
    a = simulate(SimConfig(spec, horizon=5, n_paths=100, seed=1), w)
    b = simulate(SimConfig(spec, horizon=5, n_paths=100, seed=2), w)
    assert not np.array_equal(a.path_sum, b.path_sum)


def test_recursions_match_convolution():
    spec = _fast_pair(beta0=0.5)
    horizon = 60
    raw = sample_paths(spec, horizon, 7, seed=5)
    trend_conv = np.einsum("ts,psj->ptj", ema_matrix(spec.q, horizon), raw["xi"]) * spec.beta[None, None, :]
    signal_conv = spec.gamma * np.einsum("ts,psj->ptj", ema_matrix(spec.p, horizon), raw["returns"])
    np.testing.assert_allclose(raw["trend"], trend_conv, atol=1e-12)
    np.testing.assert_allclose(raw["signal"], signal_conv, atol=1e-12)
    np.testing.assert_allclose(raw["returns"], raw["eps"] + raw["trend"], atol=1e-15)


def test_return_covariance():
    spec = _fast_pair(beta0=0.8)
    t = 199
    raw = sample_paths(spec, t + 1, 20000, seed=9)
    r = raw["returns"][:, t]
    emp = r.T @ r / r.shape[0]
    fill = (1 - spec.q ** (2 * t)) / (1 - spec.q**2)
    ref = spec.corr_noise + np.outer(spec.beta, spec.beta) * spec.corr_trend * fill
    np.testing.assert_allclose(ref, spec.return_covariance(), rtol=1e-6)
    se = np.sqrt((ref**2 + np.outer(np.diag(ref), np.diag(ref))) / r.shape[0])
    assert np.all(np.abs(emp - ref) < 3.5 * se)


def test_matches_stationary_moments():
    spec = _fast_pair()
    rng = np.random.default_rng(4)
    a = rng.normal(size=(2, 2))
    w = a + a.T
    mean, var = portfolio_moments(stationary_moments(spec), w)
    s = simulate(SimConfig(spec, horizon=60, n_paths=20000, seed=21), w, workers=4).summary()
    assert s["mean"] == pytest.approx(mean, abs=3 * s["mean_se"])
    assert s["variance"] == pytest.approx(var, abs=3 * s["variance_se"])


def test_error_bars_shrink_with_paths():
    spec = _fast_pair()
    w = np.eye(2)
    small = simulate(SimConfig(spec, horizon=20, n_paths=4000, seed=8), w).summary()
    big = simulate(SimConfig(spec, horizon=20, n_paths=16000, seed=8), w).summary()
    assert small["mean_se"] / big["mean_se"] == pytest.approx(2.0, rel=0.1)


def test_zero_variance_and_insufficient_samples():
    const = PathEnsemble(np.full(10, 2.0), np.full(10, 4.0), horizon=1)
    with pytest.raises(errors.ZeroVariance):
        empirical_sharpe(const)
    with pytest.raises(errors.InsufficientSamples):
        PathEnsemble(np.ones(1), np.ones(1), horizon=1).summary()
    with pytest.raises(errors.BadRange):
        SimConfig(_fast_pair(), horizon=5, n_paths=1)


def test_weight_shape_checked():
    with pytest.raises(errors.BadRange):
        simulate(SimConfig(_fast_pair(), horizon=2, n_paths=4), np.eye(3))


def test_write_paths_csv(tmp_path):
    spec = _fast_pair()
    ens = simulate(SimConfig(spec, horizon=3, n_paths=4, seed=1), np.eye(2), record=True)
    assert ens.samples.shape == (4, 3)
    np.testing.assert_allclose(ens.samples.sum(axis=1), ens.path_sum)
    out = tmp_path / "paths.csv"
    write_paths_csv(ens, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "path,t,dpnl"
    assert len(lines) == 13
    assert math.isclose(float(lines[1].split(",")[2]), ens.samples[0, 0], rel_tol=1e-11)
