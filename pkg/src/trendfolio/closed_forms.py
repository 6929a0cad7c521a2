"""Analytic solutions for two assets and for the equicorrelated sector model.

All formulas work in the reduced parameterization ``(Q, R, kappa, nu,
rho_eps, rho_xi, p, q)``; the Sharpe landscape depends on nothing else.
They serve as independent oracles for the generic optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadRange, DegenerateDenominator, DegenerateQuadratic, RegimeUndefined, ZeroVariance
from .market import MarketSpec, equicorrelation, validate_spec


def q_and_r(beta0: float, sigma: float, lam: float, eta: float) -> tuple[float, float]:
    p, q = 1.0 - eta, 1.0 - lam
    return (1.0 - p * q) * sigma**2 / beta0**2, 1.0 + q * q - 2.0 * p * p * q * q


@dataclass(frozen=True)
class TwoAssetParams:
    Q: float
    R: float
    kappa: float
    nu: float
    rho_eps: float
    rho_xi: float
    p: float
    q: float

    @property
    def prefactor(self) -> float:
        """``q^2 (1 - p^2)``."""
        return self.q**2 * (1.0 - self.p**2)

    @classmethod
    def from_values(cls, kappa, nu, rho_eps, rho_xi, beta0=0.1, lam=0.01, eta=0.01, sigma2=1.0):
        """``beta0`` and ``sigma2`` belong to asset 2, the reference asset."""
        big_q, big_r = q_and_r(beta0, sigma2, lam, eta)
        return cls(big_q, big_r, kappa, nu, rho_eps, rho_xi, 1.0 - eta, 1.0 - lam)

    @classmethod
    def from_spec(cls, spec: MarketSpec) -> "TwoAssetParams":
        spec = validate_spec(spec)
        if spec.n != 2:
            raise BadRange("two-asset parameters need n == 2")
        if spec.beta[1] <= 0:
            raise BadRange("asset 2 must carry a trend (beta[1] > 0)")
        big_q, big_r = q_and_r(spec.beta0[1], spec.sigma[1], spec.lam, spec.eta)
        rho = spec.noise_correlation
        return cls(
            big_q, big_r, spec.beta[0] / spec.beta[1], spec.sigma[0] / spec.sigma[1],
            float(rho[0, 1]), float(spec.corr_trend[0, 1]), spec.p, spec.q,
        )


def omegas(params: TwoAssetParams, w11, w12, w22) -> tuple[float, float, float]:
    """Noise-noise, noise-trend and trend-trend quadratic forms of the variance."""
    k, v, re, rx = params.kappa, params.nu, params.rho_eps, params.rho_xi
    o1 = (
        v**4 * w11**2 + 4 * re * v * w12 * (v**2 * w11 + w22) + 2 * v**2 * re**2 * w11 * w22
        + 2 * v**2 * (1 + re**2) * w12**2 + w22**2
    )
    o2 = (
        v**2 * k**2 * w11**2 + 2 * w11 * w12 * v * k * (v * rx + k * re) + 2 * w11 * w22 * v * k * re * rx
        + w12**2 * (v**2 + 2 * v * k * re * rx + k**2) + 2 * w12 * w22 * (v * re + k * rx) + w22**2
    )
    o3 = (
        k**4 * w11**2 + 4 * rx * k * w12 * (k**2 * w11 + w22) + 2 * k**2 * rx**2 * w11 * w22
        + 2 * k**2 * (1 + rx**2) * w12**2 + w22**2
    )
    return o1, o2, o3


def two_asset_sharpe_sq(params: TwoAssetParams, w) -> float:
    """Stationary ``Sh^2`` of a two-asset portfolio from the reduced parameters."""
    om = w.omega if hasattr(w, "omega") else np.asarray(w, dtype=float)
    w11, w12, w22 = om[0, 0], 0.5 * (om[0, 1] + om[1, 0]), om[1, 1]
    o1, o2, o3 = omegas(params, w11, w12, w22)
    big_q, big_r = params.Q, params.R
    den = big_q**2 * o1 + 2 * big_q * o2 + big_r * o3
    if den <= 0:
        raise ZeroVariance("two-asset variance vanishes")
    num = params.kappa**2 * w11 + 2 * params.rho_xi * params.kappa * w12 + w22
    return float(params.prefactor * num**2 / den)


def single_asset_sharpe_sq(big_q: float, big_r: float, p: float, q: float) -> float:
    return q * q * (1.0 - p * p) / (big_q**2 + 2 * big_q + big_r)


def two_asset_uncorrelated_opt(params: TwoAssetParams) -> tuple[float, float, float]:
    """Optimum for ``rho_eps = rho_xi = 0``: ``(x_opt, z_opt, Sh^2_opt)``.

    No lead-lag term is needed; ``z = w11 / w22`` balances the two assets.
    """
    big_q, big_r, k, v = params.Q, params.R, params.kappa, params.nu
    first = big_q**2 + 2 * big_q + big_r
    second = v**4 * big_q**2 + 2 * v**2 * k**2 * big_q + k**4 * big_r
    z = k**2 * first / second
    sharpe_sq = params.prefactor * (1.0 / first + k**4 / second)
    return 0.0, z, sharpe_sq


def _require_indistinguishable(params):
    if not (math.isclose(params.kappa, 1.0) and math.isclose(params.nu, 1.0)):
        raise BadRange("formula requires kappa == nu == 1")


def two_asset_indist_opt(params: TwoAssetParams) -> tuple[float, float]:
    """Lead-lag ratio ``x = w12 / w22`` and ``Sh^2_opt`` for ``kappa = nu = 1``.

    The optimum always has ``w11 = w22``.
    """
    _require_indistinguishable(params)
    big_q, big_r, re, rx = params.Q, params.R, params.rho_eps, params.rho_xi
    num = big_q**2 * (2 * re - rx - re**2 * rx) + 2 * big_q * re * (1 - rx**2) + big_r * rx * (1 - rx**2)
    den = big_q**2 * (1 - 2 * re * rx + re**2) + 2 * big_q * (1 - rx**2) + big_r * (1 - rx**2)
    if den == 0:
        raise DegenerateDenominator("x_opt denominator vanishes")
    x = -num / den

    d_e = big_q**2 * (1 - re**2)
    d_x = big_r * (1 - rx**2)
    top = (1 - rx**2) * (d_e + 2 * big_q * (1 - re * rx) + d_x) + 2 * big_q**2 * (re - rx) ** 2
    bottom = (
        (d_e + 4 * big_q * (1 - re * rx) + d_x) * (d_e + d_x)
        + 4 * big_q**2 * (1 - re**2) * (1 - rx**2)
        + 4 * big_q**2 * big_r * (re - rx) ** 2
    )
    if bottom == 0:
        raise DegenerateDenominator("Sh^2_opt denominator vanishes")
    return float(x), float(2 * params.prefactor * top / bottom)


def indist_sharpe_sq_approx(params: TwoAssetParams) -> float:
    """``Sh^2_opt`` for indistinguishable assets with the ``R`` terms dropped (``R << Q``).

    This is the exact ``R -> 0`` limit of :func:`two_asset_indist_opt`; at
    zero correlation it gives ``2 q^2 (1 - p^2) / (Q (Q + 2))``.
    """
    _require_indistinguishable(params)
    big_q, re, rx = params.Q, params.rho_eps, params.rho_xi
    num = (1 - rx**2) * (big_q * (1 - re**2) + 2 * (1 - re * rx)) + 2 * big_q * (re - rx) ** 2
    den = big_q * (1 - re**2) * (big_q**2 * (1 - re**2) + 4 * big_q * (1 - re * rx) + 4 * (1 - rx**2))
    return float(2 * params.prefactor * num / den)


def x_opt_uncorrelated_noise(big_q, big_r, rho_xi, approx=False) -> float:
    """Lead-lag ratio for indistinguishable assets with ``rho_eps = 0``."""
    if approx:
        return rho_xi / (1 + (1 - rho_xi**2) * 2 / big_q)
    return rho_xi * (big_q**2 - big_r * (1 - rho_xi**2)) / (big_q**2 + (2 * big_q + big_r) * (1 - rho_xi**2))


def x_opt_uncorrelated_trends(big_q, big_r, rho_eps, approx=False) -> float:
    """Lead-lag ratio for indistinguishable assets with ``rho_xi = 0``."""
    if approx:
        return -rho_eps / (1 - (1 - rho_eps**2) * big_q / (2 * (big_q + 1)))
    return -rho_eps * 2 * big_q * (big_q + 1) / (big_q**2 * (1 + rho_eps**2) + 2 * big_q + big_r)


def sharpe_sq_no_leadlag_equal(params: TwoAssetParams) -> float:
    """``Sh^2_0``: indistinguishable assets, ``w11 = w22`` and ``w12 = 0``.

    Carries the factor 2 of two equally weighted assets, so that at zero
    correlation it equals ``2 Sh_1^2``.
    """
    big_q, big_r, re, rx = params.Q, params.R, params.rho_eps, params.rho_xi
    return float(2.0 * params.prefactor / (big_q**2 * (1 + re**2) + 2 * big_q * (1 + re * rx) + big_r * (1 + rx**2)))


def indist_coefficients(params: TwoAssetParams) -> tuple[float, float, float, float]:
    """Coefficients ``A, B, C, D`` of the stationarity system in ``(x, z)``."""
    big_q, big_r, re, rx = params.Q, params.R, params.rho_eps, params.rho_xi
    a = big_q**2 * (1 - 2 * re * rx + re**2) + 2 * big_q * (1 - rx**2) + big_r * (1 - rx**2)
    b = big_q * (big_q + 1) * (re - rx)
    c = big_q**2 * re * (1 - re * rx) + big_q * (re + rx - 2 * re * rx**2) + big_r * rx * (1 - rx**2)
    d = big_q**2 * (1 - re**2) + 2 * big_q * (1 - re * rx) + big_r * (1 - rx**2)
    return a, b, c, d


def indist_system_residuals(params: TwoAssetParams, x: float, z: float) -> np.ndarray:
    """Left-hand sides of the three quadratic stationarity equations."""
    a, b, c, d = indist_coefficients(params)
    return np.array([
        2 * a * x**2 + 2 * b * x * z + 2 * c * x - d * z + d,
        d * z**2 + 2 * a * x**2 + 2 * c * x * z - d * z + 2 * b * x,
        b * z**2 + a * x * z + 2 * c * z + a * x + b,
    ])


def no_leadlag_coefficients(params: TwoAssetParams) -> tuple[float, float, float]:
    """``a, b, c`` of the ``w12 = 0`` variance ``a w11^2 + 2b w11 w22 + c w22^2``.

    Reduces to the unit-volatility form when ``nu = 1``.
    """
    big_q, big_r, k, v = params.Q, params.R, params.kappa, params.nu
    re, rx = params.rho_eps, params.rho_xi
    a = v**4 * big_q**2 + 2 * big_q * v**2 * k**2 + big_r * k**4
    b = big_q**2 * v**2 * re**2 + 2 * big_q * v * k * re * rx + big_r * k**2 * rx**2
    c = big_q**2 + 2 * big_q + big_r
    return a, b, c


def _no_leadlag_sharpe(params, z, a, b, c):
    den = a * z * z + 2 * b * z + c
    return params.prefactor * (params.kappa**2 * z + 1) ** 2 / den


def two_asset_no_leadlag_opt(params: TwoAssetParams) -> tuple[float, float]:
    """Best ``z = w11 / w22`` with ``w12 = 0`` and its ``Sh^2``.

    Both roots of the stationarity quadratic are evaluated and the one with
    the larger ``Sh^2`` is returned.  A vanishing leading coefficient falls
    back to the linear root.
    """
    a, b, c = no_leadlag_coefficients(params)
    k = params.kappa
    lead = b * k**4 - a * k**2
    mid = c * k**4 - a
    const = c * k**2 - b
    roots = []
    if abs(lead) <= 1e-14 * max(abs(mid), abs(const), 1e-300):
        if mid == 0:
            raise DegenerateQuadratic("stationarity equation is degenerate")
        roots.append(-const / mid)
    else:
        disc = (a - c * k**4) ** 2 - 4 * const * lead
        disc = max(disc, 0.0)
        sq = math.sqrt(disc)
        roots.extend([(a - c * k**4 + sq) / (2 * lead), (a - c * k**4 - sq) / (2 * lead)])
    best = max(roots, key=lambda z: _no_leadlag_sharpe(params, z, a, b, c))
    return float(best), float(_no_leadlag_sharpe(params, best, a, b, c))


@dataclass(frozen=True)
class SectorParams:
    n: int
    Q: float
    R: float
    rho_eps: float
    rho_xi: float
    p: float
    q: float

    @property
    def prefactor(self) -> float:
        return self.q**2 * (1.0 - self.p**2)

    @classmethod
    def from_values(cls, n, rho_eps, rho_xi, beta0=0.1, lam=0.01, eta=0.01):
        big_q, big_r = q_and_r(beta0, 1.0, lam, eta)
        return cls(int(n), big_q, big_r, rho_eps, rho_xi, 1.0 - eta, 1.0 - lam)

    @classmethod
    def from_spec(cls, spec: MarketSpec) -> "SectorParams":
        spec = validate_spec(spec)
        n = spec.n
        if n < 2:
            raise BadRange("sector model needs n >= 2")
        if not (np.allclose(spec.sigma, 1.0) and np.allclose(spec.beta, spec.beta[0])):
            raise BadRange("sector model needs unit volatilities and identical trend strengths")
        re, rx = spec.corr_noise[0, 1], spec.corr_trend[0, 1]
        if not (np.allclose(spec.corr_noise, equicorrelation(n, re))
                and np.allclose(spec.corr_trend, equicorrelation(n, rx))):
            raise BadRange("sector model needs equicorrelated matrices")
        big_q, big_r = q_and_r(spec.beta0[0], 1.0, spec.lam, spec.eta)
        return cls(n, big_q, big_r, float(re), float(rx), spec.p, spec.q)


@dataclass(frozen=True)
class SectorOptimum:
    x_opt: float
    sharpe_sq_opt: float
    V1: float
    V2: float
    V3: float
    sharpe_sq_conventional: float

    @property
    def gain(self) -> float:
        """``Sh_opt / Sh_n``."""
        return math.sqrt(self.sharpe_sq_opt / self.sharpe_sq_conventional)


def sector_v(params: SectorParams) -> tuple[float, float, float]:
    n, big_q, big_r, re, rx = params.n, params.Q, params.R, params.rho_eps, params.rho_xi
    m = n - 1
    v1 = big_q**2 * (1 + m * re**2) + 2 * big_q * (1 + m * re * rx) + big_r * (1 + m * rx**2)
    v2 = m * (
        big_q**2 * (2 * re + (n - 2) * re**2)
        + 2 * big_q * (re + rx + (n - 2) * re * rx)
        + big_r * (2 * rx + (n - 2) * rx**2)
    )
    ue, ux = 1 + m * re, 1 + m * rx
    v3 = n * (big_q**2 * ue**2 + 2 * big_q * ue * ux + big_r * ux**2) - v1 - 2 * v2
    return v1, v2, v3


def sector_conventional_sharpe_sq(params: SectorParams) -> float:
    """``Sh^2_n``: equal diagonal weights, no lead-lag terms."""
    v1, _, _ = sector_v(params)
    return params.n * params.prefactor / v1


def sector_opt(params: SectorParams) -> SectorOptimum:
    """Optimal common lead-lag ratio ``x = w12 / w11`` for ``n`` indistinguishable assets."""
    if params.n < 2:
        raise BadRange("sector model needs n >= 2")
    v1, v2, v3 = sector_v(params)
    m, rx = params.n - 1, params.rho_xi
    det = v1 * v3 - v2 * v2
    x_den = v3 - m * rx * v2
    scale = max(abs(v1 * v3), v2 * v2, 1e-300)
    if abs(det) <= 1e-15 * scale or x_den == 0:
        raise DegenerateDenominator("sector optimum is degenerate")
    x = -(v2 - m * rx * v1) / x_den
    sh2 = params.n * params.prefactor * (m * m * rx * rx * v1 - 2 * rx * m * v2 + v3) / det
    return SectorOptimum(float(x), float(sh2), v1, v2, v3, params.n * params.prefactor / v1)


def noise_trend_product(n: int, rho_eps: float, rho_xi: float) -> tuple[float, float]:
    """Diagonal and off-diagonal entries of ``C_eps C_xi`` for equicorrelated matrices."""
    return 1 + (n - 1) * rho_eps * rho_xi, rho_eps + rho_xi + (n - 2) * rho_eps * rho_xi


def sector_tilde_sums(n, rho_eps, rho_xi, beta0, p, q) -> tuple[float, float, float, float]:
    """Block sums ``(V0, V1, V2, V3)`` of the stationary covariance.

    ``V0`` sums everything, ``V1`` diagonal-diagonal pairs ``(jj; kk)``, ``V2``
    diagonal against off-diagonal pairs, and ``V3 = V0 - V1 - 2 V2`` the
    off-diagonal block.
    """
    c1 = 2 * beta0**2 / (1 - p * q)
    c2 = beta0**4 * (1 + q * q - 2 * p * p * q * q) / (1 - p * q) ** 2
    re, rx = rho_eps, rho_xi
    v1 = n * (1 + c1 + c2) + n * (n - 1) * (re**2 + c1 * re * rx + c2 * rx**2)
    v2 = n * (n - 1) * (
        2 * re + (n - 2) * re**2 + c1 * (re + rx + (n - 2) * re * rx) + c2 * (2 * rx + (n - 2) * rx**2)
    )
    ue, ux = 1 + (n - 1) * re, 1 + (n - 1) * rx
    v0 = n * n * (ue**2 + c1 * ue * ux + c2 * ux**2)
    return v0, v1, v2, v0 - v1 - 2 * v2


@dataclass(frozen=True)
class AsymptoticReport:
    regime: str
    n: int
    total_correction: float  # asymptotic (n-1) x_opt
    total_correction_exact: float
    sharpe_sq_per_asset_limit: float  # lim Sh^2_opt / n
    sharpe_sq_per_asset_exact: float

    @property
    def correction_residual(self) -> float:
        return self.total_correction_exact - self.total_correction

    @property
    def sharpe_residual(self) -> float:
        return self.sharpe_sq_per_asset_exact - self.sharpe_sq_per_asset_limit


REGIMES = ("rho_xi_zero", "rho_eps_zero", "general")


def sector_limit_sharpe_sq_per_asset(params: SectorParams) -> float:
    """``lim_{n -> inf} Sh^2_opt / n`` for general correlations.

    Reduces to the published limits when either correlation vanishes.
    """
    big_q, big_r, re, rx = params.Q, params.R, params.rho_eps, params.rho_xi
    den = big_q**2 * (1 - re) ** 2 + 2 * big_q * (1 - re) * (1 - rx) + big_r * (1 - rx) ** 2
    if den == 0:
        raise RegimeUndefined("limit undefined for fully correlated assets")
    return params.prefactor * (1 - rx) ** 2 / den


def sector_asymptotics(params: SectorParams, regime: str | None = None) -> AsymptoticReport:
    """Large-``n`` expansion of the total lead-lag correction ``(n - 1) x_opt``.

    Regimes: ``rho_xi_zero`` (correction of order ``1/(n-1)^2``),
    ``rho_eps_zero`` (order ``1/(n-1)``) and ``general`` (from the expansion
    of ``x_opt`` to order ``1/(n-1)^2``).  ``regime=None`` picks one from the
    correlations.
    """
    big_q, big_r, re, rx = params.Q, params.R, params.rho_eps, params.rho_xi
    m = params.n - 1
    if regime is None:
        regime = "rho_xi_zero" if rx == 0 else "rho_eps_zero" if re == 0 else "general"
    if regime not in REGIMES:
        raise RegimeUndefined(f"unknown regime {regime!r}")
    if m < 1:
        raise RegimeUndefined("expansion needs n >= 2")

    if regime == "rho_xi_zero":
        if rx != 0 or re == 0:
            raise RegimeUndefined("rho_xi_zero expansion needs rho_xi == 0 and rho_eps != 0")
        corr = -1 + (big_q**2 * (1 - re) ** 2 + 2 * big_q * (1 - re) + big_r) / (big_q**2 * re**2 * m**2)
    elif regime == "rho_eps_zero":
        if re != 0 or rx in (0.0, 1.0) or big_r == 0:
            raise RegimeUndefined("rho_eps_zero expansion needs rho_eps == 0, 0 < rho_xi < 1, R != 0")
        corr = -1 + (big_q**2 + 2 * big_q * (1 - rx) + big_r * (1 - rx) ** 2) / (rx * (1 - rx) * big_r * m)
    else:
        bracket = big_q**2 * re**2 + 2 * big_q * re * rx + big_r * rx**2
        if rx == 1 or bracket == 0:
            raise RegimeUndefined("general expansion needs rho_xi != 1 and a nonzero leading term")
        top = rx * (big_q**2 * (1 - re) ** 2 + 2 * big_q * (1 - re) * (1 - rx) + big_r * (1 - rx) ** 2)
        corr = m * (-1 / m + top / ((1 - rx) * bracket * m**2))

    exact = sector_opt(params)
    return AsymptoticReport(
        regime=regime,
        n=params.n,
        total_correction=float(corr),
        total_correction_exact=m * exact.x_opt,
        sharpe_sq_per_asset_limit=sector_limit_sharpe_sq_per_asset(params),
        sharpe_sq_per_asset_exact=exact.sharpe_sq_opt / params.n,
    )
