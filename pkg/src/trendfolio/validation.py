"""Cross-oracle validation suites: closed forms vs optimizer vs Monte Carlo.

``fast`` runs every analytic comparison in a few seconds; ``full`` adds the
Monte Carlo moment oracle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .closed_forms import (
    SectorParams,
    TwoAssetParams,
    sector_asymptotics,
    sector_opt,
    single_asset_sharpe_sq,
    two_asset_indist_opt,
    two_asset_no_leadlag_opt,
    two_asset_uncorrelated_opt,
)
from .kernels import stationary_horizon
from .market import make_spec, sector_spec, two_asset_spec
from .moments import annualize, finite_moments, portfolio_moments, stationary_moments
from .montecarlo import SimConfig, simulate
from .optimizer import diagonal_mask, optimize, optimize_constrained

ORACLE_RTOL = 1e-8
KKT_TOL = 1e-8


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    count: int = 1
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return (f"{status}  {self.name:<28} max residual {self.max_residual:.3e}"
                f"  (tol {self.tolerance:.1e}, {self.count} cases){extra}")


@dataclass
class ValidationReport:
    level: str
    checks: list[CheckResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        verdict = "ALL PASSED" if self.passed else "FAILURES PRESENT"
        out.append(f"{verdict}: {sum(c.passed for c in self.checks)}/{len(self.checks)} "
                   f"suites, level {self.level}, {self.seconds:.1f}s")
        return out


def rel_err(value: float, ref: float, floor: float = 0.0) -> float:
    """``|value - ref| / max(|ref|, floor)``; ``floor`` guards ratios that may vanish."""
    scale = max(abs(ref), floor)
    if scale == 0.0:
        return abs(value - ref)
    return abs(value - ref) / scale


# random parameter draws ---------------------------------------------------

def draw_rates(rng) -> dict:
    return {
        "beta0": float(rng.uniform(0.05, 0.3)),
        "lam": float(rng.uniform(0.005, 0.1)),
        "eta": float(rng.uniform(0.005, 0.1)),
    }


def draw_two_asset(rng, indist=False, uncorrelated=False) -> tuple[dict, TwoAssetParams]:
    kw = draw_rates(rng)
    kappa = 1.0 if indist else float(rng.uniform(0.1, 2.0))
    nu = 1.0 if indist else float(rng.uniform(0.3, 3.0))
    re, rx = (0.0, 0.0) if uncorrelated else tuple(float(v) for v in rng.uniform(-0.85, 0.85, 2))
    sigma2 = float(rng.uniform(0.5, 2.0))
    vals = dict(kappa=kappa, nu=nu, rho_eps=re, rho_xi=rx, sigma2=sigma2, **kw)
    params = TwoAssetParams.from_values(kappa, nu, re, rx, kw["beta0"], kw["lam"], kw["eta"], sigma2)
    return vals, params


def _two_asset_spec(vals):
    return two_asset_spec(vals["kappa"], vals["nu"], vals["rho_eps"], vals["rho_xi"],
                          vals["beta0"], vals["lam"], vals["eta"], vals["sigma2"])


# suites -------------------------------------------------------------------

def check_single_asset() -> CheckResult:
    params = SectorParams.from_values(2, 0.0, 0.0)
    closed = annualize(single_asset_sharpe_sq(params.Q, params.R, params.p, params.q))
    opt = annualize(optimize(stationary_moments(sector_spec(1, 0.0, 0.0, 0.1, 0.01, 0.01))).sharpe_sq)
    resid = max(abs(closed - 0.7885), abs(opt - closed))
    return CheckResult("single_asset_benchmark", resid <= 5e-4, resid, 5e-4,
                       detail=f"sqrt(255) Sh1 = {closed:.6f}")


def check_uncorrelated(rng, draws) -> CheckResult:
    worst = kkt = 0.0
    for _ in range(draws):
        vals, params = draw_two_asset(rng, uncorrelated=True)
        _, z, sh2 = two_asset_uncorrelated_opt(params)
        opt = optimize(stationary_moments(_two_asset_spec(vals)))
        om = opt.weights.omega
        worst = max(worst, rel_err(opt.sharpe_sq, sh2), rel_err(om[0, 0] / om[1, 1], z, 1.0),
                    abs(om[0, 1] / om[1, 1]))
        kkt = max(kkt, opt.kkt_residual)
    return CheckResult("two_asset_uncorrelated", worst <= ORACLE_RTOL and kkt <= KKT_TOL,
                       worst, ORACLE_RTOL, draws, f"kkt {kkt:.1e}")


def check_indistinguishable(rng, draws) -> CheckResult:
    worst = kkt = 0.0
    for _ in range(draws):
        vals, params = draw_two_asset(rng, indist=True)
        x, sh2 = two_asset_indist_opt(params)
        opt = optimize(stationary_moments(_two_asset_spec(vals)))
        om = opt.weights.omega
        worst = max(worst, rel_err(opt.sharpe_sq, sh2), rel_err(om[0, 1] / om[1, 1], x, 1.0),
                    rel_err(om[0, 0] / om[1, 1], 1.0))
        kkt = max(kkt, opt.kkt_residual)
    return CheckResult("two_asset_indistinguishable", worst <= ORACLE_RTOL and kkt <= KKT_TOL,
                       worst, ORACLE_RTOL, draws, f"kkt {kkt:.1e}")


def check_no_leadlag(rng, draws) -> CheckResult:
    worst = kkt = 0.0
    for _ in range(draws):
        vals, params = draw_two_asset(rng)
        z, sh2 = two_asset_no_leadlag_opt(params)
        opt = optimize_constrained(stationary_moments(_two_asset_spec(vals)), diagonal_mask(2))
        om = opt.weights.omega
        worst = max(worst, rel_err(opt.sharpe_sq, sh2), rel_err(om[0, 0] / om[1, 1], z, 1.0))
        kkt = max(kkt, _diag_kkt(stationary_moments(_two_asset_spec(vals)), om))
    return CheckResult("two_asset_no_leadlag", worst <= ORACLE_RTOL and kkt <= KKT_TOL,
                       worst, ORACLE_RTOL, draws, f"kkt {kkt:.1e}")


def _diag_kkt(moments, om) -> float:
    """Stationarity residual restricted to the free diagonal weights."""
    n = moments.n
    vec = om.ravel()
    v_w = moments.cov_matrix @ vec
    mw, wvw = float(moments.mean.ravel() @ vec), float(vec @ v_w)
    idx = np.arange(n) * (n + 1)
    first = moments.mean.ravel()[idx] * wvw
    second = v_w[idx] * mw
    return float(np.max(np.abs(first - second)) / max(np.max(np.abs(first)), np.max(np.abs(second))))


def draw_sector(rng) -> tuple[dict, SectorParams]:
    n = int(rng.integers(2, 9))
    lo = -0.9 / (n - 1)
    re, rx = (float(v) for v in rng.uniform(lo, 0.9, 2))
    kw = draw_rates(rng)
    vals = dict(n=n, rho_eps=re, rho_xi=rx, **kw)
    return vals, SectorParams.from_values(n, re, rx, kw["beta0"], kw["lam"], kw["eta"])


def check_sector(rng, draws) -> CheckResult:
    worst = kkt = 0.0
    for _ in range(draws):
        vals, params = draw_sector(rng)
        spec = sector_spec(vals["n"], vals["rho_eps"], vals["rho_xi"], vals["beta0"], vals["lam"], vals["eta"])
        moments = stationary_moments(spec)
        closed = sector_opt(params)
        opt = optimize(moments)
        om = opt.weights.omega
        conv = optimize_constrained(moments, diagonal_mask(params.n))
        worst = max(worst, rel_err(opt.sharpe_sq, closed.sharpe_sq_opt),
                    rel_err(om[0, 1] / om[0, 0], closed.x_opt, 1.0),
                    rel_err(conv.sharpe_sq, closed.sharpe_sq_conventional))
        kkt = max(kkt, opt.kkt_residual)
    return CheckResult("sector_model", worst <= ORACLE_RTOL and kkt <= KKT_TOL,
                       worst, ORACLE_RTOL, draws, f"kkt {kkt:.1e}")


def equal_correlation_grid():
    for n in range(2, 11):
        for rho in np.round(np.arange(-0.8, 0.81, 0.1), 10):
            if rho <= -1.0 / (n - 1) + 1e-9:
                continue
            yield n, float(rho)


def check_equal_correlation() -> CheckResult:
    worst, count = 0.0, 0
    for n, rho in equal_correlation_grid():
        params = SectorParams.from_values(n, rho, rho)
        res = sector_opt(params)
        sh1 = single_asset_sharpe_sq(params.Q, params.R, params.p, params.q)
        worst = max(
            worst,
            rel_err(res.x_opt, -rho / (1 + (n - 2) * rho), 1.0),
            rel_err(res.sharpe_sq_opt, n * sh1),
            rel_err(res.sharpe_sq_opt / res.sharpe_sq_conventional, 1 + (n - 1) * rho * rho),
        )
        count += 1
    return CheckResult("equal_correlation_law", worst <= ORACLE_RTOL, worst, ORACLE_RTOL, count)


def check_asymptotics() -> CheckResult:
    """Leading large-``n`` correction plus the sign change of the total correction.

    The gap to the leading term is itself of relative order ``1/(n-1)``, so
    the scaled gaps ``(n-1) * rel`` must agree across ``n``; the 5% band is
    checked where the next order allows it (``n >= 200``).
    """
    rels = {}
    for n in (100, 200, 400):
        rep = sector_asymptotics(SectorParams.from_values(n, 0.4, 0.0), "rho_xi_zero")
        rels[n] = rel_err(rep.total_correction_exact + 1, rep.total_correction + 1)
    scaled = [rels[n] * (n - 1) for n in rels]
    first_order = max(scaled) <= 1.1 * min(scaled)
    band = max(rels[200], rels[400])
    small = sector_opt(SectorParams.from_values(50, 0.0, 0.5))
    large = sector_opt(SectorParams.from_values(1000, 0.0, 0.5))
    sign_change = small.x_opt > 0 > large.x_opt
    detail = "rel gap " + ", ".join(f"n={n}: {r:.3f}" for n, r in rels.items())
    detail += "; sign change n=50 -> 1000" if sign_change else "; no sign change"
    return CheckResult("large_n_asymptotics", band <= 0.05 and first_order and sign_change,
                       band, 0.05, 4, detail)


def check_finite_convergence() -> CheckResult:
    worst, count = 0.0, 0
    rng = np.random.default_rng(7)
    for rate in (0.01, 0.05):
        for n in (1, 2, 3):
            corr = _random_corr(rng, n)
            spec = make_spec(rate, rate, rng.uniform(0.05, 0.3, n), rng.uniform(0.5, 2, n), corr, _random_corr(rng, n))
            stat = stationary_moments(spec)
            fin = finite_moments(spec, stationary_horizon(rate, rate))
            worst = max(worst, elementwise_rel(fin.mean, stat.mean), elementwise_rel(fin.cov, stat.cov))
            count += 1
    return CheckResult("finite_to_stationary", worst <= 1e-3, worst, 1e-3, count)


def elementwise_rel(value: np.ndarray, ref: np.ndarray) -> float:
    """Largest elementwise relative error; exact zeros of ``ref`` compare absolutely."""
    diff = np.abs(value - ref)
    scale = np.abs(ref)
    rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), diff)
    return float(np.max(rel))


def _random_corr(rng, n) -> np.ndarray:
    a = rng.normal(size=(n, n + 2))
    cov = a @ a.T
    d = np.sqrt(np.diag(cov))
    return cov / np.outer(d, d)


def draw_moment_case(rng, n_max=4):
    n = int(rng.integers(1, n_max + 1))
    lam, eta = (float(v) for v in rng.uniform(0.03, 0.15, 2))
    spec = make_spec(lam, eta, rng.uniform(0.05, 0.4, n), rng.uniform(0.5, 2.0, n),
                     _random_corr(rng, n), _random_corr(rng, n))
    w = rng.normal(size=(n, n))
    return spec, 0.5 * (w + w.T)


def moment_oracle(rng, cases: int, paths: int, horizon: int = 50, seed: int = 0, workers: int = 1):
    """Compare sampled P&L mean and variance with the analytic aggregates.

    Returns ``(failures, checks, worst_z)``; each case contributes two checks.
    """
    failures, worst = 0, 0.0
    for i in range(cases):
        spec, w = draw_moment_case(rng)
        mean, var = portfolio_moments(stationary_moments(spec), w)
        ens = simulate(SimConfig(spec, horizon, paths, seed=seed + i), w, workers=workers)
        s = ens.summary()
        z_mean = abs(s["mean"] - mean) / s["mean_se"]
        z_var = abs(s["variance"] - var) / s["variance_se"]
        failures += (z_mean > 3) + (z_var > 3)
        worst = max(worst, z_mean, z_var)
    return failures, 2 * cases, worst


def check_moment_oracle(rng, cases, paths, seed) -> CheckResult:
    failures, checks, worst = moment_oracle(rng, cases, paths, seed=seed)
    return CheckResult("monte_carlo_moments", failures <= 2, worst, 3.0, checks,
                       f"{failures} outside 3 SE (allowed 2)")


def check_single_asset_mc(paths, seed) -> CheckResult:
    from .montecarlo import empirical_sharpe_annualized

    spec = sector_spec(1, 0.0, 0.0, 0.1, 0.01, 0.01)
    ens = simulate(SimConfig(spec, 100, paths, seed=seed), np.eye(1), workers=4)
    sh, se = empirical_sharpe_annualized(ens)
    params = SectorParams.from_values(2, 0.0, 0.0)
    ref = annualize(single_asset_sharpe_sq(params.Q, params.R, params.p, params.q))
    z = abs(sh - ref) / se
    return CheckResult("single_asset_monte_carlo", z <= 3, z, 3.0, 1, f"{sh:.4f} +/- {se:.4f}")


def run_validate(level: str = "fast", seed: int = 0, paths: int | None = None,
                 emit: Callable[[str], None] | None = None) -> ValidationReport:
    """Run the suites for ``level`` in {"fast", "full"}; ``emit`` receives each result line."""
    if level not in ("fast", "full"):
        raise ValueError(f"unknown level {level!r}")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    draws = 125 if level == "fast" else 250
    jobs = [
        check_single_asset,
        lambda: check_uncorrelated(rng, draws),
        lambda: check_indistinguishable(rng, draws),
        lambda: check_no_leadlag(rng, draws),
        lambda: check_sector(rng, draws),
        check_equal_correlation,
        check_asymptotics,
        check_finite_convergence,
    ]
    if level == "full":
        jobs.append(lambda: check_single_asset_mc(paths or 100_000, seed))
        jobs.append(lambda: check_moment_oracle(rng, 50, paths or 10_000, seed))
    report = ValidationReport(level)
    for job in jobs:
        res = job()
        report.checks.append(res)
        if emit:
            emit(res.line())
    report.seconds = time.perf_counter() - start
    return report


__all__ = ["CheckResult", "ValidationReport", "run_validate", "moment_oracle", "rel_err"]
