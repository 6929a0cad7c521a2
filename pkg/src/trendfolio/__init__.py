"""Exact moments and Sharpe-optimal lead-lag allocation for trend-following portfolios."""

from .closed_forms import SectorParams, TwoAssetParams, sector_asymptotics, sector_opt
from .errors import *  # noqa: F401,F403
from .figures import run_figure
from .kernels import kernel_product_finite, kernel_product_stationary
from .market import MarketSpec, ValidatedSpec, make_spec, sector_spec, two_asset_spec, validate_spec
from .moments import (
    MomentSet,
    WeightMatrix,
    annualize,
    finite_moments,
    portfolio_moments,
    sharpe_squared,
    stationary_moments,
)
from .montecarlo import PathEnsemble, SimConfig, empirical_sharpe, simulate
from .optimizer import OptimalAllocation, optimize, optimize_constrained
from .spec_io import load_spec
from .validation import run_validate

__version__ = "0.1.0"
