"""Exposure-minimizing derivative selection for a two-asset lognormal market."""

__version__ = "0.1.0"

from .allocation import (
    AllocationResult,
    ExposureTarget,
    UtilitySummary,
    l1_min_lp,
    merton_eta,
    solve_allocation,
    triangular_allocation,
    value_function,
)
from .market import (
    MarketParams,
    PathSet,
    RollLeg,
    RollStrategy,
    WealthResult,
    load_market_params,
    simulate_paths,
    simulate_wealth,
)
from .pricing import (
    OptionSpec,
    PriceAndGreeks,
    PricingSettings,
    SensitivityMatrix,
    bs_european,
    bs_straddle,
    mc_price,
    price_and_greeks,
    sensitivity_matrix,
    tree_price_american,
)

__all__ = [
    "AllocationResult",
    "ExposureTarget",
    "MarketParams",
    "OptionSpec",
    "PathSet",
    "PriceAndGreeks",
    "PricingSettings",
    "RollLeg",
    "RollStrategy",
    "SensitivityMatrix",
    "UtilitySummary",
    "WealthResult",
    "bs_european",
    "bs_straddle",
    "l1_min_lp",
    "load_market_params",
    "mc_price",
    "merton_eta",
    "price_and_greeks",
    "sensitivity_matrix",
    "simulate_paths",
    "simulate_wealth",
    "solve_allocation",
    "tree_price_american",
    "triangular_allocation",
    "value_function",
]
