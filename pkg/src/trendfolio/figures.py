"""Data behind the five published figures, one CSV per panel.

Column contract (first column is the swept variable; series columns are
labelled ``<series>=<value>``; ``n=inf`` marks the large-``n`` limit):

fig1 (uncorrelated pair, ``beta0`` of the reference asset, ``beta0_1 = kappa beta0``)
    fig1a_weight.csv      kappa, nu=0.5, nu=1, nu=2       weight of asset 1 in %
    fig1b_sharpe.csv      kappa, nu=0.5, nu=1, nu=2       annualized Sh_opt
fig2 (indistinguishable pair, long format)
    fig2a_x_opt.csv       rho_eps, rho_xi, x_opt
    fig2b_gain.csv        rho_eps, rho_xi, gain           Sh_opt / Sh_0
fig3 (series rho_xi=-0.5, 0, 0.5)
    fig3a_x_opt_kappa1.csv, fig3b_x_opt_kappa0.5.csv      x_opt = w12 / w22
    fig3c_sharpe_kappa1.csv, fig3d_sharpe_kappa0.5.csv    annualized Sh_opt
    fig3e_gain_kappa1.csv                                 Sh_opt / Sh_0
    fig3f_z_opt_kappa0.5.csv                              z_opt = w11 / w22
fig4 (rho_xi = 0, sweep rho_eps) and fig5 (rho_eps = 0, sweep rho_xi),
series n=2, 5, 10, 50, 1000 and n=inf where a limit exists
    figXa_x_opt.csv, figXb_total_correction.csv ((n-1) x_opt),
    figXc_sharpe_opt_per_asset.csv, figXd_sharpe_conv_per_asset.csv,
    figXe_gain.csv
    figXf_sharpe_vs_n.csv  n, opt_rho=..., conv_rho=...   per-asset annualized
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .closed_forms import (
    SectorParams,
    TwoAssetParams,
    sector_limit_sharpe_sq_per_asset,
    sector_opt,
    sharpe_sq_no_leadlag_equal,
    single_asset_sharpe_sq,
    two_asset_indist_opt,
    two_asset_uncorrelated_opt,
)
from .errors import UnknownFigure
from .market import two_asset_spec
from .moments import annualize, stationary_moments
from .optimizer import optimize
from .reporting import write_csv

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")
SECTOR_SIZES = (2, 5, 10, 50, 1000)
VS_N_RHOS = (0.1, 0.3, 0.5, 0.7, 0.9)
VS_N_MAX = 1000
DEFAULT_PARAMS = {"beta0": 0.1, "lambda": 0.01, "eta": 0.01}


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 10)


def _label(name, value) -> str:
    return f"{name}={value:g}"


def _fig1(out: Path, prm) -> list[Path]:
    kappas = grid(0.0, 1.0, 0.01)
    nus = (0.5, 1.0, 2.0)
    weight, sharpe = [], []
    for k in kappas:
        wrow, srow = [k], [k]
        for nu in nus:
            params = TwoAssetParams.from_values(k, nu, 0.0, 0.0, prm["beta0"], prm["lambda"], prm["eta"])
            _, z, sh2 = two_asset_uncorrelated_opt(params)
            wrow.append(100.0 * z / (1.0 + z))
            srow.append(annualize(sh2))
        weight.append(wrow)
        sharpe.append(srow)
    header = ["kappa"] + [_label("nu", v) for v in nus]
    return [
        write_csv(out / "fig1a_weight.csv", header, weight),
        write_csv(out / "fig1b_sharpe.csv", header, sharpe),
    ]


def _fig2(out: Path, prm) -> list[Path]:
    rhos = grid(-0.9, 0.9, 0.02)
    xs, gains = [], []
    for re in rhos:
        for rx in rhos:
            params = TwoAssetParams.from_values(1.0, 1.0, re, rx, prm["beta0"], prm["lambda"], prm["eta"])
            x, sh2 = two_asset_indist_opt(params)
            xs.append((re, rx, x))
            gains.append((re, rx, math.sqrt(sh2 / sharpe_sq_no_leadlag_equal(params))))
    return [
        write_csv(out / "fig2a_x_opt.csv", ["rho_eps", "rho_xi", "x_opt"], xs),
        write_csv(out / "fig2b_gain.csv", ["rho_eps", "rho_xi", "gain"], gains),
    ]


def _fig3(out: Path, prm) -> list[Path]:
    rhos_eps = grid(-1.0, 1.0, 0.01)
    rhos_xi = (-0.5, 0.0, 0.5)
    panels = {key: [] for key in "abcdef"}
    for re in rhos_eps:
        rows = {key: [re] for key in "abcdef"}
        for rx in rhos_xi:
            params = TwoAssetParams.from_values(1.0, 1.0, re, rx, prm["beta0"], prm["lambda"], prm["eta"])
            x, sh2 = two_asset_indist_opt(params)
            rows["a"].append(x)
            rows["c"].append(annualize(sh2))
            rows["e"].append(math.sqrt(sh2 / sharpe_sq_no_leadlag_equal(params)))
            # distinct assets: generic optimizer on the full model
            spec = two_asset_spec(0.5, 1.0, re, rx, prm["beta0"], prm["lambda"], prm["eta"])
            best = optimize(stationary_moments(spec))
            om = best.weights.omega
            rows["b"].append(om[0, 1] / om[1, 1])
            rows["d"].append(best.sharpe_annualized)
            rows["f"].append(om[0, 0] / om[1, 1])
        for key in panels:
            panels[key].append(rows[key])
    header = ["rho_eps"] + [_label("rho_xi", v) for v in rhos_xi]
    names = {
        "a": "fig3a_x_opt_kappa1.csv",
        "b": "fig3b_x_opt_kappa0.5.csv",
        "c": "fig3c_sharpe_kappa1.csv",
        "d": "fig3d_sharpe_kappa0.5.csv",
        "e": "fig3e_gain_kappa1.csv",
        "f": "fig3f_z_opt_kappa0.5.csv",
    }
    return [write_csv(out / names[key], header, panels[key]) for key in "abcdef"]


def _sector(n, rho, noise_sweep, prm) -> SectorParams:
    re, rx = (rho, 0.0) if noise_sweep else (0.0, rho)
    return SectorParams.from_values(n, re, rx, prm["beta0"], prm["lambda"], prm["eta"])


def _sector_figure(fid: str, out: Path, prm, noise_sweep: bool) -> list[Path]:
    sweep = "rho_eps" if noise_sweep else "rho_xi"
    rhos = grid(0.0, 0.9, 0.01)
    base = _sector(2, 0.0, noise_sweep, prm)
    sh1 = single_asset_sharpe_sq(base.Q, base.R, base.p, base.q)
    rows = {key: [] for key in "abcde"}
    for rho in rhos:
        cur = {key: [rho] for key in "abcde"}
        for n in SECTOR_SIZES:
            params = _sector(n, rho, noise_sweep, prm)
            opt = sector_opt(params)
            cur["a"].append(opt.x_opt)
            cur["b"].append((n - 1) * opt.x_opt)
            cur["c"].append(annualize(opt.sharpe_sq_opt / n))
            cur["d"].append(annualize(opt.sharpe_sq_conventional / n))
            cur["e"].append(opt.gain)
        limit = _sector(2, rho, noise_sweep, prm)
        cur["a"].append(0.0)
        cur["b"].append(0.0 if rho == 0 else -1.0)
        cur["c"].append(annualize(sector_limit_sharpe_sq_per_asset(limit)))
        cur["d"].append(annualize(sh1) if rho == 0 else 0.0)
        for key in rows:
            rows[key].append(cur[key])
    series = [_label("n", n) for n in SECTOR_SIZES]
    with_limit = [sweep] + series + ["n=inf"]
    paths = [
        write_csv(out / f"{fid}a_x_opt.csv", with_limit, rows["a"]),
        write_csv(out / f"{fid}b_total_correction.csv", with_limit, rows["b"]),
        write_csv(out / f"{fid}c_sharpe_opt_per_asset.csv", with_limit, rows["c"]),
        write_csv(out / f"{fid}d_sharpe_conv_per_asset.csv", with_limit, rows["d"]),
        write_csv(out / f"{fid}e_gain.csv", [sweep] + series, rows["e"]),
    ]

    vs_n = []
    for n in range(1, VS_N_MAX + 1):
        row = [n]
        opt_vals, conv_vals = [], []
        for rho in VS_N_RHOS:
            if n == 1:
                opt_vals.append(annualize(sh1))
                conv_vals.append(annualize(sh1))
                continue
            opt = sector_opt(_sector(n, rho, noise_sweep, prm))
            opt_vals.append(annualize(opt.sharpe_sq_opt / n))
            conv_vals.append(annualize(opt.sharpe_sq_conventional / n))
        vs_n.append(row + opt_vals + conv_vals)
    header = (["n"] + [_label(f"opt_{sweep}", r) for r in VS_N_RHOS]
              + [_label(f"conv_{sweep}", r) for r in VS_N_RHOS])
    paths.append(write_csv(out / f"{fid}f_sharpe_vs_n.csv", header, vs_n))
    return paths


def run_figure(fid: str, out, params: dict | None = None) -> list[Path]:
    """Write the CSV panels of figure ``fid`` into directory ``out``.

    ``params`` may override ``beta0`` (reference asset), ``lambda`` and ``eta``.
    """
    prm = dict(DEFAULT_PARAMS)
    for key, value in (params or {}).items():
        if key not in prm:
            raise KeyError(f"figure parameter {key!r} not supported; use one of {sorted(prm)}")
        prm[key] = float(value)
    out = Path(out)
    if fid == "fig1":
        return _fig1(out, prm)
    if fid == "fig2":
        return _fig2(out, prm)
    if fid == "fig3":
        return _fig3(out, prm)
    if fid == "fig4":
        return _sector_figure("fig4", out, prm, noise_sweep=True)
    if fid == "fig5":
        return _sector_figure("fig5", out, prm, noise_sweep=False)
    raise UnknownFigure(f"unknown figure {fid!r}; expected one of {', '.join(FIGURES)}")
