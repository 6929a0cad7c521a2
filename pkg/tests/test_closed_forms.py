import math

import numpy as np
import pytest

from trendfolio import closed_forms as cf
from trendfolio.errors import BadRange, RegimeUndefined
from trendfolio.market import equicorrelation, sector_spec, two_asset_spec
from trendfolio.moments import stationary_moments
from trendfolio.optimizer import optimize


def _pair(kappa=1.0, nu=1.0, re=0.0, rx=0.0, **kw):
    return cf.TwoAssetParams.from_values(kappa, nu, re, rx, **kw)


def test_reduced_sharpe_reduces_to_equal_weight_form():
    for re, rx in [(0.0, 0.0), (0.3, -0.4), (-0.8, 0.9)]:
        params = _pair(re=re, rx=rx)
        w = np.array([[2.0, 0.0], [0.0, 2.0]])
        assert cf.two_asset_sharpe_sq(params, w) == pytest.approx(cf.sharpe_sq_no_leadlag_equal(params), rel=1e-13)


def test_equal_weight_form_doubles_single_asset(sh1_sq):
    assert cf.sharpe_sq_no_leadlag_equal(_pair()) == pytest.approx(2 * sh1_sq, rel=1e-13)


def test_joint_rescaling_keeps_sharpe():
    a = two_asset_spec(0.6, 1.5, 0.2, 0.1, beta0=0.1, sigma2=1.0)
    b = two_asset_spec(0.6, 1.5, 0.2, 0.1, beta0=0.3, sigma2=3.0)
    pa, pb = cf.TwoAssetParams.from_spec(a), cf.TwoAssetParams.from_spec(b)
    assert pa.Q == pytest.approx(pb.Q)
    w = np.array([[0.3, -0.1], [-0.1, 1.0]])
    assert cf.two_asset_sharpe_sq(pa, w) == pytest.approx(cf.two_asset_sharpe_sq(pb, w), rel=1e-13)


def test_uncorrelated_special_cases(sh1_sq):
    x, z, sh2 = cf.two_asset_uncorrelated_opt(_pair())
    assert (x, z) == (0.0, 1.0)
    assert sh2 == pytest.approx(2 * sh1_sq, rel=1e-13)
    _, z, sh2 = cf.two_asset_uncorrelated_opt(_pair(kappa=0.0))
    assert z == 0.0
    assert sh2 == pytest.approx(sh1_sq, rel=1e-13)


def test_uncorrelated_reference_weights():
    _, z, _ = cf.two_asset_uncorrelated_opt(_pair(kappa=0.5))
    assert z == pytest.approx(0.403, abs=1e-3)
    weight = 100 * z / (1 + z)
    assert weight == pytest.approx(28.6, abs=0.2)
    assert 100 - weight == pytest.approx(71.4, abs=0.2)


def test_equal_correlation_pair(sh1_sq):
    x, sh2 = cf.two_asset_indist_opt(_pair(re=0.7, rx=0.7))
    assert x == pytest.approx(-0.7, rel=1e-12)
    assert sh2 == pytest.approx(2 * sh1_sq, rel=1e-12)


@pytest.mark.parametrize("rx", [1.0, -1.0])
@pytest.mark.parametrize("re", [0.3, -0.5, 0.0])
def test_perfect_trend_correlation(re, rx):
    x, _ = cf.two_asset_indist_opt(_pair(re=re, rx=rx))
    assert x == pytest.approx(rx, rel=1e-12)


def test_special_lead_lag_cases(rng):
    for _ in range(50):
        r = float(rng.uniform(-0.95, 0.95))
        params = _pair(rx=r)
        assert cf.two_asset_indist_opt(params)[0] == pytest.approx(
            cf.x_opt_uncorrelated_noise(params.Q, params.R, r), rel=1e-12, abs=1e-15)
        params = _pair(re=r)
        assert cf.two_asset_indist_opt(params)[0] == pytest.approx(
            cf.x_opt_uncorrelated_trends(params.Q, params.R, r), rel=1e-12, abs=1e-15)


def test_small_r_approximations_exact_at_zero_r(rng):
    for _ in range(20):
        re, rx = rng.uniform(-0.9, 0.9, 2)
        params = cf.TwoAssetParams(Q=1.7, R=0.0, kappa=1.0, nu=1.0, rho_eps=re, rho_xi=rx, p=0.99, q=0.99)
        assert cf.indist_sharpe_sq_approx(params) == pytest.approx(cf.two_asset_indist_opt(params)[1], rel=1e-12)
        assert cf.x_opt_uncorrelated_noise(1.7, 0.0, rx, approx=True) == pytest.approx(
            cf.x_opt_uncorrelated_noise(1.7, 0.0, rx), rel=1e-12)
        assert cf.x_opt_uncorrelated_trends(1.7, 0.0, re, approx=True) == pytest.approx(
            cf.x_opt_uncorrelated_trends(1.7, 0.0, re), rel=1e-12)
    # at the reference parameters R is small and the approximation is close
    params = _pair(re=0.4, rx=0.2)
    assert cf.indist_sharpe_sq_approx(params) == pytest.approx(cf.two_asset_indist_opt(params)[1], rel=0.05)
    params = _pair()
    assert cf.indist_sharpe_sq_approx(params) == pytest.approx(2 * params.prefactor / (params.Q * (params.Q + 2)))


def test_stationarity_system_vanishes_at_optimum(rng):
    for _ in range(50):
        re, rx = rng.uniform(-0.95, 0.95, 2)
        params = _pair(re=re, rx=rx)
        x, _ = cf.two_asset_indist_opt(params)
        np.testing.assert_allclose(cf.indist_system_residuals(params, x, 1.0), 0.0, atol=1e-12)
        assert np.abs(cf.indist_system_residuals(params, x + 0.1, 1.0)).max() > 1e-6


def test_no_leadlag_equal_profitability():
    params = _pair(re=0.3, rx=-0.2)
    z, sh2 = cf.two_asset_no_leadlag_opt(params)
    a, b, _ = cf.no_leadlag_coefficients(params)
    assert z == pytest.approx(1.0, rel=1e-12)
    assert sh2 == pytest.approx(2 * params.prefactor / (a + b), rel=1e-12)
    assert sh2 == pytest.approx(cf.sharpe_sq_no_leadlag_equal(params), rel=1e-12)


def test_no_leadlag_profitless_asset():
    z, sh2 = cf.two_asset_no_leadlag_opt(_pair(kappa=0.0))
    assert z == 0.0
    # correlated noise makes the profitless asset a hedge: z = -rho_eps^2
    z, _ = cf.two_asset_no_leadlag_opt(_pair(kappa=0.0, re=0.5))
    assert z == pytest.approx(-0.25, rel=1e-12)


def test_no_leadlag_consistent_with_uncorrelated():
    params = _pair(kappa=0.5)
    assert cf.two_asset_no_leadlag_opt(params)[0] == pytest.approx(cf.two_asset_uncorrelated_opt(params)[1], rel=1e-12)


def test_indistinguishable_formula_requires_kappa_one():
    with pytest.raises(BadRange):
        cf.two_asset_indist_opt(_pair(kappa=0.5))


@pytest.mark.parametrize("n", [2, 3, 5, 10])
def test_equicorrelated_product(n):
    for re, rx in [(0.3, 0.1), (-0.05, 0.6)]:
        prod = equicorrelation(n, re) @ equicorrelation(n, rx)
        a, b = cf.noise_trend_product(n, re, rx)
        assert prod[0, 0] == pytest.approx(a, rel=1e-14)
        if n > 1:
            assert prod[0, 1] == pytest.approx(b, rel=1e-14)


def test_sector_equal_correlation_law(sh1_sq):
    for n in (2, 3, 6, 10):
        for rho in (-0.1, 0.2, 0.8):
            res = cf.sector_opt(cf.SectorParams.from_values(n, rho, rho))
            assert res.x_opt == pytest.approx(-rho / (1 + (n - 2) * rho), rel=1e-10)
            assert res.sharpe_sq_opt == pytest.approx(n * sh1_sq, rel=1e-10)
            assert res.gain**2 == pytest.approx(1 + (n - 1) * rho * rho, rel=1e-10)


def test_sector_two_assets_reduce_to_pair(rng):
    for _ in range(20):
        re, rx = rng.uniform(-0.9, 0.9, 2)
        sec = cf.sector_opt(cf.SectorParams.from_values(2, re, rx))
        x, sh2 = cf.two_asset_indist_opt(_pair(re=re, rx=rx))
        assert sec.x_opt == pytest.approx(x, rel=1e-10, abs=1e-13)
        assert sec.sharpe_sq_opt == pytest.approx(sh2, rel=1e-10)
        assert sec.sharpe_sq_conventional == pytest.approx(cf.sharpe_sq_no_leadlag_equal(_pair(re=re, rx=rx)), rel=1e-10)


def test_sector_params_from_spec():
    p = cf.SectorParams.from_spec(sector_spec(4, 0.2, 0.3, 0.12, 0.02, 0.03))
    assert (p.n, p.rho_eps, p.rho_xi) == (4, pytest.approx(0.2), pytest.approx(0.3))
    with pytest.raises(BadRange):
        cf.SectorParams.from_spec(two_asset_spec(0.5, 1.0, 0.2, 0.2))


def test_no_noise_correlation_expansion_decays_quadratically():
    gaps = []
    for n in (101, 201, 401):
        rep = cf.sector_asymptotics(cf.SectorParams.from_values(n, 0.4, 0.0))
        assert rep.regime == "rho_xi_zero"
        gaps.append(rep.total_correction_exact + 1)
        # residual relative to the leading correction shrinks like 1/(n-1)
        assert abs(rep.correction_residual) < 10 / (n - 1) * abs(rep.total_correction + 1)
    assert gaps[0] / gaps[1] == pytest.approx(4, rel=0.05)
    assert gaps[1] / gaps[2] == pytest.approx(4, rel=0.03)


def test_trend_only_correlation_changes_sign():
    assert cf.sector_opt(cf.SectorParams.from_values(50, 0.0, 0.5)).x_opt > 0
    assert cf.sector_opt(cf.SectorParams.from_values(1000, 0.0, 0.5)).x_opt < 0
    rep = cf.sector_asymptotics(cf.SectorParams.from_values(20000, 0.0, 0.5))
    assert rep.regime == "rho_eps_zero"
    assert rep.total_correction_exact == pytest.approx(rep.total_correction, rel=1e-3)


# with rho_eps = 0 the approach is slow (gap about 400 / n at these parameters)
@pytest.mark.parametrize("re,rx,n", [(0.4, 0.0, 10**5), (0.3, 0.2, 10**5), (0.0, 0.5, 10**6)])
def test_limits_match_large_n(re, rx, n):
    params = cf.SectorParams.from_values(n, re, rx)
    rep = cf.sector_asymptotics(params)
    assert rep.sharpe_sq_per_asset_exact == pytest.approx(rep.sharpe_sq_per_asset_limit, rel=1e-3)


def test_general_limit_reduces_to_special_regimes():
    params = cf.SectorParams.from_values(10, 0.4, 0.0)
    big_q, big_r = params.Q, params.R
    expected = params.prefactor / (big_q**2 * 0.6**2 + 2 * big_q * 0.6 + big_r)
    assert cf.sector_limit_sharpe_sq_per_asset(params) == pytest.approx(expected, rel=1e-14)
    params = cf.SectorParams.from_values(10, 0.0, 0.5)
    expected = params.prefactor * 0.25 / (big_q**2 + 2 * big_q * 0.5 + big_r * 0.25)
    assert cf.sector_limit_sharpe_sq_per_asset(params) == pytest.approx(expected, rel=1e-14)


def test_regime_errors():
    with pytest.raises(RegimeUndefined):
        cf.sector_asymptotics(cf.SectorParams.from_values(100, 0.0, 0.0), "rho_xi_zero")
    with pytest.raises(RegimeUndefined):
        cf.sector_asymptotics(cf.SectorParams.from_values(100, 0.2, 0.3), "rho_eps_zero")
    with pytest.raises(RegimeUndefined):
        cf.sector_asymptotics(cf.SectorParams.from_values(100, 0.2, 0.3), "bogus")


def test_general_expansion_tracks_exact():
    for n in (200, 800):
        rep = cf.sector_asymptotics(cf.SectorParams.from_values(n, 0.3, 0.2), "general")
        assert rep.total_correction_exact == pytest.approx(rep.total_correction, abs=5 / (n - 1))


@pytest.mark.parametrize("rx", [-0.5, 0.0, 0.5])
def test_lead_lag_monotone_in_noise_correlation(rx):
    grid = np.linspace(-0.95, 0.95, 191)
    xs = [cf.two_asset_indist_opt(_pair(re=re, rx=rx))[0] for re in grid]
    assert all(b < a for a, b in zip(xs, xs[1:]))
    # the end points are +-1 only up to terms of order R / Q^2
    assert cf.two_asset_indist_opt(_pair(re=-1.0, rx=rx))[0] == pytest.approx(1.0, abs=1e-2)
    assert cf.two_asset_indist_opt(_pair(re=1.0, rx=rx))[0] == pytest.approx(-1.0, abs=1e-2)


def test_gain_at_least_one():
    for re in np.linspace(-0.99, 0.99, 67):
        for rx in np.linspace(-0.99, 0.99, 67):
            params = _pair(re=re, rx=rx)
            _, sh2 = cf.two_asset_indist_opt(params)
            assert sh2 >= cf.sharpe_sq_no_leadlag_equal(params) * (1 - 1e-12)


def test_pair_params_from_spec_roundtrip():
    spec = two_asset_spec(0.4, 1.7, -0.3, 0.6, beta0=0.2, lam=0.03, eta=0.02, sigma2=1.4)
    p = cf.TwoAssetParams.from_spec(spec)
    ref = cf.TwoAssetParams.from_values(0.4, 1.7, -0.3, 0.6, 0.2, 0.03, 0.02, 1.4)
    for name in ("Q", "R", "kappa", "nu", "rho_eps", "rho_xi", "p", "q"):
        assert getattr(p, name) == pytest.approx(getattr(ref, name), rel=1e-13)
    best = optimize(stationary_moments(spec))
    assert cf.two_asset_sharpe_sq(p, best.weights) == pytest.approx(best.sharpe_sq, rel=1e-12)
    assert math.isfinite(best.sharpe_sq)
