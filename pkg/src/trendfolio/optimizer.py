"""Sharpe-optimal weight matrices.

Maximizing ``(m.u)^2 / (u.V.u)`` over symmetric weights is a generalized
Rayleigh quotient: with ``V`` positive definite the optimal ray is
``u = V^{-1} m`` and the optimal squared Sharpe ratio is ``m.V^{-1}.m``.
Everything is solved in the ``n(n+1)/2`` symmetric-pair basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, SingularCovariance
from .moments import MomentSet, WeightMatrix, annualize, pair_basis

# smallest admissible eigenvalue of the reduced covariance, relative to the largest
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class OptimalAllocation:
    weights: WeightMatrix
    sharpe_sq: float
    kkt_residual: float

    @property
    def sharpe_annualized(self) -> float:
        return annualize(self.sharpe_sq)

    @property
    def sharpe(self) -> float:
        return float(np.sqrt(self.sharpe_sq))


def kkt_residual(moments: MomentSet, w) -> float:
    """Relative violation of the stationarity equations of ``Sh^2``.

    For each pair the residual is ``M[j,k] (w.V.w) - (V w)[j,k] (M.w)``,
    symmetrized over ``(j, k)`` and ``(k, j)`` since weights are symmetric.
    Returned as a max-norm divided by the largest individual term.
    """
    om = w.omega if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)
    n = moments.n
    if om.shape != (n, n):
        raise DimensionMismatch(f"weights have shape {om.shape}, moments expect ({n}, {n})")
    om = 0.5 * (om + om.T)
    vec = om.ravel()
    vmat = moments.cov_matrix
    mflat = moments.mean.ravel()
    v_w = vmat @ vec
    mw = float(mflat @ vec)
    wvw = float(vec @ v_w)
    first = (mflat * wvw).reshape(n, n)
    second = (v_w * mw).reshape(n, n)
    res = first - second
    res = 0.5 * (res + res.T)
    scale = max(float(np.max(np.abs(first))), float(np.max(np.abs(second))))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(res)) / scale)


def _solve(moments: MomentSet, free: np.ndarray) -> OptimalAllocation:
    n = moments.n
    m_red, v_red = moments.reduced()
    m_f = m_red[free]
    v_f = v_red[np.ix_(free, free)]
    vals, vecs = np.linalg.eigh(v_f)
    top = float(np.max(np.abs(vals)))
    if top == 0.0 or vals[0] <= SINGULAR_RTOL * top:
        raise SingularCovariance(
            f"virtual-asset covariance is not positive definite "
            f"(eigenvalue {vals[0]:.3g}, largest {top:.3g})",
            eigenvalue=float(vals[0]),
            eigenvector=vecs[:, 0],
        )
    u_f = linalg.cho_solve(linalg.cho_factor(v_f), m_f)
    sharpe_sq = float(m_f @ u_f)
    u = np.zeros(m_red.size)
    u[free] = u_f
    if m_red @ u < 0:
        u = -u
    weights = WeightMatrix.from_pairs(n, u).canonical()
    return OptimalAllocation(weights, sharpe_sq, kkt_residual(moments, weights))


def optimize(moments: MomentSet) -> OptimalAllocation:
    """Unconstrained Sharpe maximizer over symmetric weight matrices.

    Raises:
        SingularCovariance: the reduced covariance is not positive definite.
    """
    return _solve(moments, np.ones(moments.n * (moments.n + 1) // 2, dtype=bool))


def optimize_constrained(moments: MomentSet, mask) -> OptimalAllocation:
    """Sharpe maximizer with ``omega[j, k]`` forced to zero where ``mask`` is False.

    A diagonal mask gives the conventional allocation without lead-lag terms.
    """
    n = moments.n
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (n, n):
        raise DimensionMismatch(f"mask has shape {mask.shape}, expected ({n}, {n})")
    if not np.array_equal(mask, mask.T):
        raise ValueError("mask must be symmetric")
    free = mask[np.triu_indices(n)]
    if not free.any():
        raise ValueError("mask leaves no free weight")
    return _solve(moments, free)


def diagonal_mask(n: int) -> np.ndarray:
    return np.eye(n, dtype=bool)


def sharpe_gradient(moments: MomentSet, w) -> np.ndarray:
    """Analytic gradient of ``Sh^2`` in the symmetric-pair basis."""
    om = w.omega if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)
    u = om[np.triu_indices(moments.n)]
    m_red, v_red = moments.reduced()
    mu = m_red @ u
    var = u @ v_red @ u
    return 2.0 * mu / var**2 * (m_red * var - (v_red @ u) * mu)


__all__ = [
    "OptimalAllocation",
    "diagonal_mask",
    "kkt_residual",
    "optimize",
    "optimize_constrained",
    "pair_basis",
    "sharpe_gradient",
]
