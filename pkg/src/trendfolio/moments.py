"""Mean and covariance of the n^2 virtual-asset P&L contributions.

The incremental P&L is ``sum_{j,k} w[j,k] r_t^j s_t^k``: signal ``k`` applied
to asset ``j``.  Each ``(j, k)`` pair is a virtual asset with mean
``mean[j, k]`` and covariance ``cov[j1, k1, j2, k2]``.

``cov`` is the exact covariance of the virtual assets (Wick expansion with
five terms), valid for any weight matrix.  Because the model restricts to
symmetric weights, portfolio aggregation symmetrizes ``w`` first.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, HorizonTooSmall, NotSymmetric, ZeroVariance
from .kernels import ema_matrix
from .market import MarketSpec, validate_spec

ANNUALIZATION = math.sqrt(255.0)


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Virtual-asset moments.  ``horizon`` is ``None`` in the stationary regime."""

    mean: np.ndarray
    cov: np.ndarray
    horizon: int | None = None

    def __post_init__(self):
        n = self.mean.shape[0]
        if self.mean.shape != (n, n) or self.cov.shape != (n, n, n, n):
            raise DimensionMismatch("mean must be (n, n) and cov (n, n, n, n)")

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @property
    def regime(self) -> str:
        return "stationary" if self.horizon is None else f"finite({self.horizon})"

    @property
    def cov_matrix(self) -> np.ndarray:
        """``cov`` as an ``n^2 x n^2`` matrix over flattened ``(j, k)`` pairs."""
        n2 = self.n**2
        return self.cov.reshape(n2, n2)

    def scaled(self, mean_factor=1.0, cov_factor=1.0) -> "MomentSet":
        return MomentSet(self.mean * mean_factor, self.cov * cov_factor, self.horizon)

    def reduced(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance in the symmetric-pair basis (``j <= k``)."""
        basis = pair_basis(self.n)
        return basis.T @ self.mean.ravel(), basis.T @ self.cov_matrix @ basis


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Symmetric allocation weights ``omega[j, k]`` (signal k on asset j)."""

    omega: np.ndarray

    def __post_init__(self):
        om = np.atleast_2d(np.array(self.omega, dtype=float))
        if om.ndim != 2 or om.shape[0] != om.shape[1]:
            raise DimensionMismatch("weights must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(om)))) if om.size else 1.0
        if np.max(np.abs(om - om.T)) > 1e-12 * scale:
            raise NotSymmetric("weight matrix must be symmetric; use WeightMatrix.symmetrized")
        om.setflags(write=False)
        object.__setattr__(self, "omega", om)

    @classmethod
    def symmetrized(cls, omega) -> "WeightMatrix":
        om = np.asarray(omega, dtype=float)
        return cls(0.5 * (om + om.T))

    @classmethod
    def from_pairs(cls, n: int, values) -> "WeightMatrix":
        """Inverse of :meth:`to_pairs`."""
        return cls((pair_basis(n) @ np.asarray(values, dtype=float)).reshape(n, n))

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    def to_pairs(self) -> np.ndarray:
        """Upper-triangle entries ``omega[j, k]``, ``j <= k``, row-major."""
        return self.omega[np.triu_indices(self.n)]

    def canonical(self) -> "WeightMatrix":
        """Rescale to unit trace, or unit Frobenius norm when the trace vanishes.

        The positive scale factor keeps the sign of the expected P&L.
        """
        tr = float(np.trace(self.omega))
        norm = float(np.linalg.norm(self.omega))
        if norm == 0.0:
            return self
        if tr > 1e-12 * norm:
            return WeightMatrix(self.omega / tr)
        return WeightMatrix(self.omega / norm)


def pair_basis(n: int) -> np.ndarray:
    """``n^2 x n(n+1)/2`` map from symmetric-pair weights to the full matrix.

    Off-diagonal pair weights feed both ``(j, k)`` and ``(k, j)``, so the
    reduced mean ``basis.T @ mean`` doubles off-diagonal entries.
    """
    rows, cols = np.triu_indices(n)
    basis = np.zeros((n * n, rows.size))
    idx = np.arange(rows.size)
    basis[rows * n + cols, idx] = 1.0
    basis[cols * n + rows, idx] = 1.0
    return basis


def _as_omega(w, n: int) -> np.ndarray:
    om = w.omega if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)
    if om.shape != (n, n):
        raise DimensionMismatch(f"weights have shape {om.shape}, moments expect ({n}, {n})")
    return 0.5 * (om + om.T)


def stationary_moments(spec: MarketSpec) -> MomentSet:
    """Exact ``t -> infinity`` moments for common EMA rates."""
    spec = validate_spec(spec)
    p, q = spec.p, spec.q
    ce = spec.corr_noise
    cb = spec.trend_cov_beta0
    a = (1.0 + p * q) / (1.0 - p * q)
    cross = q * q * (1.0 - p * p) / (1.0 - p * q) ** 2
    mean = q * math.sqrt(1.0 - p * p) / (1.0 - p * q) * cb
    # axes: j1, k1, j2, k2
    cov = (
        np.einsum("ac,bd->abcd", ce, ce)
        + np.einsum("ac,bd->abcd", cb, ce)
        + a * np.einsum("ac,bd->abcd", ce, cb)
        + a * np.einsum("ac,bd->abcd", cb, cb)
        + cross * np.einsum("ad,bc->abcd", cb, cb)
    )
    return MomentSet(mean, cov, None)


def compact_stationary_cov(spec: MarketSpec) -> np.ndarray:
    """Shorter stationary covariance that agrees with ``cov`` on symmetric weights.

    ``C_e (x) C_e + 2/(1-pq) C_e (x) C_b + R/(1-pq)^2 C_b (x) C_b`` with
    ``C_b`` the stationary trend covariance.  Not the true covariance for
    asymmetric weights.
    """
    spec = validate_spec(spec)
    p, q = spec.p, spec.q
    ce, cb = spec.corr_noise, spec.trend_cov_beta0
    big_r = 1.0 + q * q - 2.0 * p * p * q * q
    return (
        np.einsum("ac,bd->abcd", ce, ce)
        + 2.0 / (1.0 - p * q) * np.einsum("ac,bd->abcd", ce, cb)
        + big_r / (1.0 - p * q) ** 2 * np.einsum("ac,bd->abcd", cb, cb)
    )


def finite_moments(
    spec: MarketSpec,
    t: int,
    trend_kernels: Sequence[np.ndarray] | None = None,
    signal_kernels: Sequence[np.ndarray] | None = None,
) -> MomentSet:
    """Moments at finite horizon ``t`` from dense kernel products.

    By default the kernels are ``A^j = beta_j E_q`` and ``S^k = gamma E_p``.
    Arbitrary per-asset lower-triangular kernels (at least ``t x t``; the
    leading block is used) may be supplied instead.  Only the last rows of the
    kernels enter, so the cost is O(n t^2).
    """
    spec = validate_spec(spec)
    if t < 2:
        raise HorizonTooSmall(f"horizon must be >= 2, got {t}")
    n = spec.n
    if trend_kernels is None:
        eq = ema_matrix(spec.q, t)
        trend_kernels = [b * eq for b in spec.beta]
    if signal_kernels is None:
        ep = ema_matrix(spec.p, t, spec.gamma)
        signal_kernels = [ep] * n
    if len(trend_kernels) != n or len(signal_kernels) != n:
        raise DimensionMismatch("need one trend and one signal kernel per asset")
    A = [np.asarray(k, dtype=float)[:t, :t] for k in trend_kernels]
    S = [np.asarray(k, dtype=float)[:t, :t] for k in signal_kernels]

    a_rows = np.array([k[-1] for k in A])  # row t of A^j
    s_rows = np.array([k[-1] for k in S])  # row t of S^k
    g_rows = np.array([S[k][-1] @ A[k] for k in range(n)])  # row t of S^k A^k

    aa = a_rows @ a_rows.T  # (A^j1 A^j2T)_tt
    ss = s_rows @ s_rows.T  # (S^k1 S^k2T)_tt
    gg = g_rows @ g_rows.T  # (S^k1 A^k1 A^k2T S^k2T)_tt
    ga = g_rows @ a_rows.T  # ga[k, j] = (S^k A^k A^jT)_tt

    ce, cx = spec.corr_noise, spec.corr_trend
    mean = cx * ga.T
    ret = ce + cx * aa  # <r_t^j1 r_t^j2>
    lagged = ce * ss + cx * gg  # sum_t1' sum_t2' S S <r_t1' r_t2'>
    mixed = cx * ga.T  # mixed[j, k] = C_xi[j, k] (S^k A^k A^jT)_tt
    cov = np.einsum("ac,bd->abcd", ret, lagged) + np.einsum("ad,cb->abcd", mixed, mixed)
    return MomentSet(mean, cov, t)


def portfolio_moments(moments: MomentSet, w) -> tuple[float, float]:
    """Expected incremental P&L and its variance for weights ``w``.

    Raw arrays are accepted and replaced by their symmetric part.
    """
    om = _as_omega(w, moments.n)
    mean = float(np.sum(om * moments.mean))
    var = float(np.einsum("ab,abcd,cd->", om, moments.cov, om))
    return mean, var


def sharpe_squared(moments: MomentSet, w) -> float:
    mean, var = portfolio_moments(moments, w)
    om = _as_omega(w, moments.n)
    scale = float(np.sum(om * om)) * float(np.max(np.abs(moments.cov)))
    if var <= 1e-14 * scale or var <= 0.0:
        raise ZeroVariance("portfolio variance is zero")
    return mean * mean / var


def annualize(sharpe_sq: float) -> float:
    """Daily squared Sharpe to annualized Sharpe, ``sqrt(255 Sh^2)``."""
    return ANNUALIZATION * math.sqrt(sharpe_sq)


def write_moments_csv(moments: MomentSet, mean_path, cov_path) -> None:
    """Export ``mean`` as ``j,k,value`` and ``cov`` as ``j,k,j2,k2,value`` (0-based)."""
    from .reporting import fmt

    n = moments.n
    with open(mean_path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["j", "k", "value"])
        for j in range(n):
            for k in range(n):
                wr.writerow([j, k, fmt(moments.mean[j, k])])
    with open(cov_path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["j", "k", "j2", "k2", "value"])
        for idx in np.ndindex(moments.cov.shape):
            wr.writerow([*idx, fmt(moments.cov[idx])])
