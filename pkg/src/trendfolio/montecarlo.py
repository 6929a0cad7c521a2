"""Monte Carlo simulation of the market model and the strategy P&L.

Trends and signals are carried as EMA states (O(1) memory per asset):

    r_t     = eps_t + T_t
    dpnl_t  = sum_j r_t^j (omega @ s_t)^j
    T_{t+1} = q T_t + beta * xi_t
    s_{t+1} = p s_t + gamma * r_t

Paths are grouped in fixed-size blocks.  Each block draws from its own
Philox stream keyed by ``(seed, block index)``, so results do not depend on
how many worker threads run the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadRange, FactorizationFailure, InsufficientSamples, ZeroVariance
from .kernels import stationary_horizon
from .market import MarketSpec, validate_spec
from .moments import WeightMatrix, annualize
from .reporting import write_csv

DEFAULT_BLOCK = 2048


@dataclass(frozen=True)
class SimConfig:
    spec: MarketSpec
    horizon: int
    n_paths: int
    burn_in: int | None = None  # None: 10 / min(lambda, eta)
    seed: int = 0
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        object.__setattr__(self, "spec", validate_spec(self.spec))
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", stationary_horizon(self.spec.lam, self.spec.eta))
        if self.n_paths < 2:
            raise BadRange("n_paths must be >= 2")
        if self.horizon < 1 or self.burn_in < 0 or self.block_size < 1:
            raise BadRange("horizon must be >= 1, burn_in >= 0, block_size >= 1")
        if not (0 <= self.seed < 2**64):
            raise BadRange("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Per-path sums of the sampled incremental P&L.

    ``samples`` holds the full ``(n_paths, horizon)`` record when requested.
    """

    path_sum: np.ndarray
    path_sumsq: np.ndarray
    horizon: int
    samples: np.ndarray | None = None

    @property
    def n_paths(self) -> int:
        return self.path_sum.size

    def _moments(self):
        if self.n_paths < 2:
            raise InsufficientSamples("need at least two paths")
        xbar = self.path_sum / self.horizon
        x2bar = self.path_sumsq / self.horizon
        mean = math.fsum(xbar) / self.n_paths
        second = math.fsum(x2bar) / self.n_paths
        # paths are iid; steps within a path are not, so errors use path-level aggregates
        cov = np.cov(np.vstack([xbar, x2bar]), ddof=1) / self.n_paths
        return mean, second, cov

    @property
    def mean(self) -> float:
        return self._moments()[0]

    @property
    def variance(self) -> float:
        mean, second, _ = self._moments()
        return second - mean * mean

    def summary(self) -> dict:
        """Empirical mean and variance with delta-method standard errors."""
        mean, second, cov = self._moments()
        var = second - mean * mean
        g_var = np.array([-2.0 * mean, 1.0])
        return {
            "mean": mean,
            "mean_se": math.sqrt(cov[0, 0]),
            "variance": var,
            "variance_se": math.sqrt(max(float(g_var @ cov @ g_var), 0.0)),
            "n_paths": self.n_paths,
            "horizon": self.horizon,
        }


def _factor(mat_factor, name):
    if not np.all(np.isfinite(mat_factor)):
        raise FactorizationFailure(f"cannot factor {name}")
    return mat_factor


def _run_block(spec, omega, lnoise, ltrend, burn_in, horizon, seed, block, size, record):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    n = spec.n
    q, p, gamma = spec.q, spec.p, spec.gamma
    beta = spec.beta
    trend = np.zeros((size, n))
    signal = np.zeros((size, n))
    total = np.zeros(size)
    total_sq = np.zeros(size)
    rec = np.empty((size, horizon)) if record else None
    for step in range(burn_in + horizon):
        eps = rng.standard_normal((size, n)) @ lnoise.T
        xi = rng.standard_normal((size, n)) @ ltrend.T
        r = eps + trend
        if step >= burn_in:
            dpnl = np.einsum("ij,ij->i", r, signal @ omega.T)
            total += dpnl
            total_sq += dpnl * dpnl
            if record:
                rec[:, step - burn_in] = dpnl
        trend = q * trend + beta * xi
        signal = p * signal + gamma * r
    return total, total_sq, rec


def simulate(config: SimConfig, w, workers: int = 1, record: bool = False) -> PathEnsemble:
    """Simulate ``config.n_paths`` paths and accumulate the sampled P&L.

    Output is bit-identical for a given ``(config, w)`` whatever ``workers``.
    """
    spec = config.spec
    omega = (w if isinstance(w, WeightMatrix) else WeightMatrix.symmetrized(w)).omega
    if omega.shape != (spec.n, spec.n):
        raise BadRange("weight matrix does not match the number of assets")
    lnoise = _factor(spec.noise_factor(), "corr_noise")
    ltrend = _factor(spec.trend_factor(), "corr_trend")
    bs = config.block_size
    n_blocks = -(-config.n_paths // bs)
    sizes = [min(bs, config.n_paths - b * bs) for b in range(n_blocks)]

    def job(b):
        return _run_block(spec, omega, lnoise, ltrend, config.burn_in, config.horizon,
                          config.seed, b, sizes[b], record)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_blocks)))
    else:
        parts = [job(b) for b in range(n_blocks)]
    return PathEnsemble(
        path_sum=np.concatenate([pt[0] for pt in parts]),
        path_sumsq=np.concatenate([pt[1] for pt in parts]),
        horizon=config.horizon,
        samples=np.concatenate([pt[2] for pt in parts]) if record else None,
    )


def empirical_sharpe(ensemble: PathEnsemble) -> tuple[float, float]:
    """Sample Sharpe ratio (daily) and its delta-method standard error."""
    mean, second, cov = ensemble._moments()
    var = second - mean * mean
    if var <= 1e-300 or var <= 1e-14 * second:
        raise ZeroVariance("sampled P&L has zero variance")
    sd = math.sqrt(var)
    grad = np.array([second / sd**3, -mean / (2.0 * sd**3)])
    se = math.sqrt(max(float(grad @ cov @ grad), 0.0))
    return mean / sd, se


def empirical_sharpe_annualized(ensemble: PathEnsemble) -> tuple[float, float]:
    sh, se = empirical_sharpe(ensemble)
    return math.copysign(annualize(sh * sh), sh), annualize(se * se)


def sample_paths(spec: MarketSpec, horizon: int, n_paths: int, seed: int = 0) -> dict:
    """Short raw paths for inspection: innovations, returns, trends and signals.

    Arrays are ``(n_paths, horizon, n)``; index ``t`` is the 0-based step.
    ``signal[:, t]`` is the signal available when ``returns[:, t]`` is realized.
    """
    spec = validate_spec(spec)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0])))
    n = spec.n
    eps = rng.standard_normal((n_paths, horizon, n)) @ spec.noise_factor().T
    xi = rng.standard_normal((n_paths, horizon, n)) @ spec.trend_factor().T
    trend = np.zeros((n_paths, horizon, n))
    signal = np.zeros((n_paths, horizon, n))
    returns = np.zeros((n_paths, horizon, n))
    for t in range(horizon):
        if t > 0:
            trend[:, t] = spec.q * trend[:, t - 1] + spec.beta * xi[:, t - 1]
            signal[:, t] = spec.p * signal[:, t - 1] + spec.gamma * returns[:, t - 1]
        returns[:, t] = eps[:, t] + trend[:, t]
    return {"eps": eps, "xi": xi, "trend": trend, "signal": signal, "returns": returns}


def write_paths_csv(ensemble: PathEnsemble, path) -> None:
    """Dump recorded samples as ``path,t,dpnl`` rows."""
    if ensemble.samples is None:
        raise ValueError("ensemble was simulated without record=True")
    samples = ensemble.samples
    write_csv(
        path, ["path", "t", "dpnl"],
        ((i, t, samples[i, t]) for i in range(samples.shape[0]) for t in range(samples.shape[1])),
    )
