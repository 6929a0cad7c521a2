"""Gaussian market model with separately correlated noise and stochastic trends.

Returns of asset ``j`` are ``r_t = eps_t + trend_t`` where the noise ``eps``
is white with cross-covariance ``corr_noise`` and the trend is an EMA of
innovations ``xi`` with cross-correlation ``corr_trend``.  All assets share
the trend rate ``lam`` and all strategies share the signal rate ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadRange, NotPositiveSemidefinite, NotSymmetric

# eigenvalues down to -PSD_RTOL * largest are treated as round-off and clipped
PSD_RTOL = 1e-10
SYM_TOL = 1e-12
DIAG_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MarketSpec:
    """Full model parameterization.

    Attributes:
        n: number of assets.
        lam: common trend EMA rate, ``q = 1 - lam``.
        eta: common strategy EMA rate, ``p = 1 - eta``.
        beta: trend strengths, shape ``(n,)``.
        sigma: noise volatilities, shape ``(n,)``.
        corr_noise: noise covariance with volatilities folded in
            (entries ``sigma_j sigma_k rho_jk``).
        corr_trend: trend innovation correlation, unit diagonal.
    """

    n: int
    lam: float
    eta: float
    beta: np.ndarray
    sigma: np.ndarray
    corr_noise: np.ndarray
    corr_trend: np.ndarray

    def __post_init__(self):
        for name in ("beta", "sigma", "corr_noise", "corr_trend"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def q(self) -> float:
        return 1.0 - self.lam

    @property
    def p(self) -> float:
        return 1.0 - self.eta

    @property
    def gamma(self) -> float:
        """Signal strength normalizing the pure-noise P&L variance to one."""
        return math.sqrt(1.0 - self.p**2)

    @property
    def beta0(self) -> np.ndarray:
        """Stationary trend amplitudes ``beta / sqrt(1 - q^2)``."""
        return self.beta / math.sqrt(1.0 - self.q**2)

    @property
    def noise_correlation(self) -> np.ndarray:
        """Devolatilized view of ``corr_noise``."""
        return self.corr_noise / np.outer(self.sigma, self.sigma)

    @property
    def trend_cov_beta(self) -> np.ndarray:
        """``beta_j beta_k C_xi[j, k]``."""
        return np.outer(self.beta, self.beta) * self.corr_trend

    @property
    def trend_cov_beta0(self) -> np.ndarray:
        """``beta0_j beta0_k C_xi[j, k]``, the stationary trend covariance."""
        return np.outer(self.beta0, self.beta0) * self.corr_trend

    def return_covariance(self) -> np.ndarray:
        """Stationary same-time covariance of returns, ``<r_t^j r_t^k>``."""
        return self.corr_noise + self.trend_cov_beta0

    def replace(self, **changes) -> "MarketSpec":
        fields = dict(
            n=self.n, lam=self.lam, eta=self.eta, beta=self.beta, sigma=self.sigma,
            corr_noise=self.corr_noise, corr_trend=self.corr_trend,
        )
        fields.update(changes)
        return MarketSpec(**fields)


@dataclass(frozen=True, eq=False)
class ValidatedSpec(MarketSpec):
    """A checked :class:`MarketSpec` with cached eigendecompositions.

    Eigenvalues are ascending and clipped at zero.
    """

    noise_eigvals: np.ndarray = field(default=None)
    noise_eigvecs: np.ndarray = field(default=None)
    trend_eigvals: np.ndarray = field(default=None)
    trend_eigvecs: np.ndarray = field(default=None)

    def __post_init__(self):
        super().__post_init__()
        for name in ("noise_eigvals", "noise_eigvecs", "trend_eigvals", "trend_eigvecs"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    def noise_factor(self) -> np.ndarray:
        """Symmetric-square-root style factor ``L`` with ``L @ L.T == corr_noise``."""
        return self.noise_eigvecs * np.sqrt(self.noise_eigvals)

    def trend_factor(self) -> np.ndarray:
        return self.trend_eigvecs * np.sqrt(self.trend_eigvals)

    def replace(self, **changes) -> "ValidatedSpec":
        return validate_spec(MarketSpec.replace(self, **changes))


@dataclass(frozen=True)
class DerivedScalars:
    """Scalar combinations that control the stationary Sharpe landscape.

    ``Q`` and ``beta0_ref`` refer to a reference asset (the last one by
    default, which is asset 2 in the two-asset convention).  ``kappa`` and
    ``nu`` are only defined for two assets.
    """

    q: float
    p: float
    gamma: float
    Q: float
    R: float
    beta0: np.ndarray
    kappa: float | None = None
    nu: float | None = None


def _check_psd(name, mat):
    vals, vecs = np.linalg.eigh(mat)
    top = max(float(np.max(np.abs(vals))), 1e-300)
    if vals[0] < -PSD_RTOL * top:
        raise NotPositiveSemidefinite(
            f"{name} is not positive semidefinite (min eigenvalue {vals[0]:.6g})",
            min_eigenvalue=float(vals[0]),
        )
    return np.clip(vals, 0.0, None), vecs


def validate_spec(spec: MarketSpec) -> ValidatedSpec:
    """Check ``spec`` and return it with cached eigendecompositions.

    Raises:
        BadRange: rates outside (0, 1), non-positive volatility, negative
            trend strength, bad shapes or inconsistent diagonals.
        NotSymmetric: a correlation matrix is not symmetric.
        NotPositiveSemidefinite: a correlation matrix has a negative eigenvalue.
    """
    if isinstance(spec, ValidatedSpec):
        return spec
    n = spec.n
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise BadRange(f"n must be a positive integer, got {n!r}")
    n = int(n)
    for name, val in (("lambda", spec.lam), ("eta", spec.eta)):
        if not (0.0 < val < 1.0):
            raise BadRange(f"{name} must lie in (0, 1), got {val}")
    beta, sigma = spec.beta, spec.sigma
    cn, ct = spec.corr_noise, spec.corr_trend
    if beta.shape != (n,) or sigma.shape != (n,):
        raise BadRange(f"beta and sigma must have shape ({n},)")
    if cn.shape != (n, n) or ct.shape != (n, n):
        raise BadRange(f"correlation matrices must have shape ({n}, {n})")
    for name, arr in (("beta", beta), ("sigma", sigma), ("corr_noise", cn), ("corr_trend", ct)):
        if not np.all(np.isfinite(arr)):
            raise BadRange(f"{name} contains non-finite values")
    if np.any(sigma <= 0):
        raise BadRange("sigma must be positive")
    if np.any(beta < 0):
        raise BadRange("beta must be non-negative")

    for name, mat in (("corr_noise", cn), ("corr_trend", ct)):
        scale = max(1.0, float(np.max(np.abs(mat))))
        if np.max(np.abs(mat - mat.T)) > SYM_TOL * scale:
            raise NotSymmetric(f"{name} is not symmetric")
    if np.max(np.abs(np.diag(ct) - 1.0)) > DIAG_TOL:
        raise BadRange("corr_trend must have unit diagonal")
    if np.max(np.abs(np.diag(cn) / sigma**2 - 1.0)) > DIAG_TOL:
        raise BadRange("corr_noise diagonal must equal sigma**2")

    nvals, nvecs = _check_psd("corr_noise", cn)
    tvals, tvecs = _check_psd("corr_trend", ct)

    rho = cn / np.outer(sigma, sigma)
    if np.max(np.abs(rho)) > 1.0 + 1e-12 or np.max(np.abs(ct)) > 1.0 + 1e-12:
        raise BadRange("correlation magnitudes must not exceed 1")

    return ValidatedSpec(
        n=n, lam=float(spec.lam), eta=float(spec.eta), beta=beta, sigma=sigma,
        corr_noise=cn, corr_trend=ct,
        noise_eigvals=nvals, noise_eigvecs=nvecs,
        trend_eigvals=tvals, trend_eigvecs=tvecs,
    )


def equicorrelation(n: int, rho: float) -> np.ndarray:
    """Matrix with unit diagonal and constant off-diagonal ``rho``."""
    return (1.0 - rho) * np.eye(n) + rho * np.ones((n, n))


def make_spec(lam, eta, beta0, sigma, noise_corr, trend_corr) -> ValidatedSpec:
    """Build and validate a spec from correlation (unit-diagonal) matrices.

    ``beta0`` and ``sigma`` may be scalars or length-n sequences.
    """
    noise_corr = np.atleast_2d(np.asarray(noise_corr, dtype=float))
    n = noise_corr.shape[0]
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n,))
    beta0 = np.broadcast_to(np.asarray(beta0, dtype=float), (n,))
    q = 1.0 - lam
    spec = MarketSpec(
        n=n, lam=lam, eta=eta,
        beta=beta0 * math.sqrt(1.0 - q * q),
        sigma=sigma,
        corr_noise=np.outer(sigma, sigma) * noise_corr,
        corr_trend=np.atleast_2d(np.asarray(trend_corr, dtype=float)),
    )
    return validate_spec(spec)


def sector_spec(n, rho_eps, rho_xi, beta0, lam, eta) -> ValidatedSpec:
    """``n`` indistinguishable unit-volatility assets with equal pairwise correlations."""
    return make_spec(lam, eta, beta0, 1.0, equicorrelation(n, rho_eps), equicorrelation(n, rho_xi))


def two_asset_spec(kappa, nu, rho_eps, rho_xi, beta0=0.1, lam=0.01, eta=0.01, sigma2=1.0) -> ValidatedSpec:
    """Two assets with ``beta0_1 = kappa * beta0`` and ``sigma_1 = nu * sigma2``."""
    return make_spec(
        lam, eta, [kappa * beta0, beta0], [nu * sigma2, sigma2],
        [[1.0, rho_eps], [rho_eps, 1.0]], [[1.0, rho_xi], [rho_xi, 1.0]],
    )


def derived_scalars(spec: MarketSpec, ref: int = -1) -> DerivedScalars:
    q, p = spec.q, spec.p
    beta0 = spec.beta0
    b_ref = beta0[ref]
    Q = (1.0 - p * q) * spec.sigma[ref] ** 2 / b_ref**2 if b_ref > 0 else math.inf
    kappa = nu = None
    if spec.n == 2:
        kappa = spec.beta[0] / spec.beta[1] if spec.beta[1] > 0 else math.inf
        nu = spec.sigma[0] / spec.sigma[1]
    return DerivedScalars(
        q=q, p=p, gamma=math.sqrt(1.0 - p * p), Q=Q,
        R=1.0 + q * q - 2.0 * p * p * q * q, beta0=beta0, kappa=kappa, nu=nu,
    )
