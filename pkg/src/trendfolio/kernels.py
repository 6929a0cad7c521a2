"""Causal EMA kernels and the diagonal entries of their products.

``E_r`` is the strictly lower triangular matrix with ``E_r[t, t'] = r**(t-t'-1)``
for ``t > t'``.  The trend kernel is ``A = beta * E_q`` and the signal kernel
is ``S = gamma * E_p``.  Horizons are 1-based: ``(X)_{t,t}`` is the last
diagonal entry of a ``t x t`` product.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import BadRange, DegenerateRate, HorizonTooSmall


class ProductKind(str, Enum):
    PP = "PP"  # (E_p E_p^T)_{t,t}
    QQ = "QQ"  # (E_q E_q^T)_{t,t}
    PQQ = "PQQ"  # (E_p E_q E_q^T)_{t,t}
    PQQP = "PQQP"  # (E_p E_q E_q^T E_p^T)_{t,t}


def ema_matrix(rate_complement: float, horizon: int, strength: float = 1.0) -> np.ndarray:
    """Dense ``horizon x horizon`` causal EMA matrix."""
    if horizon < 1:
        raise HorizonTooSmall(f"horizon must be >= 1, got {horizon}")
    idx = np.arange(horizon)
    lag = idx[:, None] - idx[None, :] - 1
    mask = lag >= 0
    out = np.zeros((horizon, horizon))
    out[mask] = strength * np.power(float(rate_complement), lag[mask])
    return out


def stationary_horizon(lam: float, eta: float) -> int:
    """Horizon after which EMA products are effectively stationary (10 e-folds)."""
    return int(math.ceil(10.0 / min(lam, eta)))


def _check_rates(p, q):
    for name, val in (("p", p), ("q", q)):
        if not (0.0 <= val <= 1.0):
            raise BadRange(f"{name} must lie in [0, 1], got {val}")


def _kind(kind) -> ProductKind:
    return kind if isinstance(kind, ProductKind) else ProductKind(str(kind).upper())


def kernel_products_recursive(p: float, q: float, t: int) -> dict:
    """All finite-horizon products at horizon ``t`` in O(t).

    Propagates the second moments of a unit-innovation trend ``T`` and its
    EMA ``S``: ``T' = qT + xi``, ``S' = pS + T``.  Then ``(E_q E_q^T)_{tt}``,
    ``(E_p E_q E_q^T)_{tt}`` and ``(E_p E_q E_q^T E_p^T)_{tt}`` are ``var T``,
    ``cov(S, T)`` and ``var S`` at step ``t``.
    """
    _check_rates(p, q)
    if t < 1:
        raise HorizonTooSmall(f"horizon must be >= 1, got {t}")
    pp = vtt = vst = vss = 0.0
    for _ in range(t - 1):
        # right-hand sides use the previous step's values
        vss, vst, vtt, pp = (
            p * p * vss + 2.0 * p * vst + vtt,
            p * q * vst + q * vtt,
            q * q * vtt + 1.0,
            p * p * pp + 1.0,
        )
    return {ProductKind.PP: pp, ProductKind.QQ: vtt, ProductKind.PQQ: vst, ProductKind.PQQP: vss}


def kernel_product_dense(kind, p: float, q: float, t: int) -> float:
    """Same quantities from explicit triangular matrices (O(t^2) oracle)."""
    kind = _kind(kind)
    _check_rates(p, q)
    if t < 1:
        raise HorizonTooSmall(f"horizon must be >= 1, got {t}")
    ep_row = ema_matrix(p, t)[-1]
    eq = ema_matrix(q, t)
    if kind is ProductKind.PP:
        return float(ep_row @ ep_row)
    if kind is ProductKind.QQ:
        return float(eq[-1] @ eq[-1])
    pq_row = ep_row @ eq
    if kind is ProductKind.PQQ:
        return float(pq_row @ eq[-1])
    return float(pq_row @ pq_row)


def kernel_product_finite(kind, p: float, q: float, t: int, method: str = "recursive") -> float:
    """Diagonal entry ``(.)_{t,t}`` of an EMA product at finite horizon ``t``.

    ``method`` is ``"recursive"`` (O(t)) or ``"dense"`` (explicit matrices).
    """
    kind = _kind(kind)
    if method == "dense":
        return kernel_product_dense(kind, p, q, t)
    if method != "recursive":
        raise ValueError(f"unknown method {method!r}")
    return kernel_products_recursive(p, q, t)[kind]


def kernel_product_stationary(kind, p: float, q: float) -> float:
    """Closed-form ``t -> infinity`` limit of :func:`kernel_product_finite`."""
    kind = _kind(kind)
    _check_rates(p, q)
    if p >= 1.0 or q >= 1.0:
        raise DegenerateRate(f"stationary limit diverges for p={p}, q={q}")
    if kind is ProductKind.PP:
        return 1.0 / (1.0 - p * p)
    if kind is ProductKind.QQ:
        return 1.0 / (1.0 - q * q)
    if kind is ProductKind.PQQ:
        return q / ((1.0 - q * q) * (1.0 - p * q))
    return (1.0 + p * q) / ((1.0 - p * q) * (1.0 - q * q) * (1.0 - p * p))
