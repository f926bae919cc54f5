"""Realized certainty-equivalent rates of discretely rebalanced portfolios.

The certainty equivalent rate (CER) is the riskless growth rate whose
utility matches the portfolio's expected utility; it is estimated from the
(1 - gamma)-power mean of terminal wealth and compared against the
continuously rebalanced optimum and the one-risk-hedged benchmark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .allocation import merton_eta, value_function
from .errors import ParameterError
from .market import MarketParams, RollLeg, RollStrategy, simulate_wealth, spawn_seed
from .pricing import OptionSpec, PricingSettings
from .selection import _parallel_map, straddle_ratio_path

BANKRUPT_WARN_FRACTION = 0.01


@dataclass(frozen=True)
class CERReport:
    """Estimated CER with its Monte-Carlo error and the two benchmarks."""

    cer_estimate: float
    std_err: float
    theoretical_cer: float
    incomplete_cer: float
    frequency: float
    composition: tuple[str, ...]
    n_paths: int
    bankrupt_fraction: float
    warning: str | None = None


def cer_from_terminal_wealth(terminal: np.ndarray, gamma: float,
                             horizon: float, w0: float = 1.0,
                             antithetic: bool = True) -> tuple[float, float]:
    """Invert mean CRRA utility into an annualized rate, with its std err.

    Exact for any sample: applying it to W_T = W0 * exp(c * T) returns c.
    Antithetic samples are averaged pairwise first so the standard error
    uses independent draws.
    """
    if gamma <= 0 or gamma == 1.0:
        raise ParameterError("CRRA gamma must be positive and != 1")
    u = (np.asarray(terminal, dtype=float) / w0) ** (1.0 - gamma)
    if antithetic:
        u = u.reshape(-1, 2).mean(axis=1)
    mean_u = float(u.mean())
    se_u = float(u.std(ddof=1)) / math.sqrt(u.size) if u.size > 1 else 0.0
    cer = math.log(mean_u) / ((1.0 - gamma) * horizon)
    se = se_u / (abs(1.0 - gamma) * horizon * mean_u)
    return cer, se


def stock_composition(params: MarketParams) -> tuple[OptionSpec, OptionSpec]:
    """The two assets themselves, encoded as zero-strike European calls."""
    return (OptionSpec("call", "european", "s1", 0.0, params.maturity),
            OptionSpec("call", "european", "s2", 0.0, params.maturity))


def _build_strategy(composition, mode, n_rebalances, params,
                    ratio_schedules=None) -> RollStrategy:
    if mode not in ("fixed_strike", "ratio"):
        raise ParameterError(f"unknown strategy mode {mode!r}")
    legs = []
    for spec in composition:
        if spec.asset is None:
            raise ParameterError(
                "wealth simulation compositions use one option per asset")
        if spec.style != "european":
            raise ParameterError(
                "the default wealth pricer covers European families; pass a "
                "custom pricing oracle for other styles")
        if ratio_schedules is not None:
            legs.append(RollLeg(asset=spec.asset, family=spec.family,
                                strike_rule="schedule",
                                schedule=ratio_schedules[spec.asset]))
        elif mode == "fixed_strike":
            legs.append(RollLeg(asset=spec.asset, family=spec.family,
                                value=spec.strike, strike_rule="fixed"))
        else:
            legs.append(RollLeg(asset=spec.asset, family=spec.family,
                                value=spec.strike / params.spot[spec.asset],
                                strike_rule="ratio"))
    assets = sorted(leg.asset for leg in legs)
    if legs and assets != [0, 1]:
        raise ParameterError("composition must hold one option per asset")
    eta = merton_eta(params)
    return RollStrategy(n_rebalances=n_rebalances, legs=tuple(legs),
                        exposure=eta.eta)


def estimate_cer(composition: Sequence[OptionSpec], mode: str,
                 frequency: float, params: MarketParams, n_paths: int,
                 seed: int, *, ratio_schedules=None, pricing=None,
                 substeps: int = 1, antithetic: bool = True) -> CERReport:
    """Estimate the CER of a rolled composition at a rebalancing frequency.

    ``composition`` holds one European option per asset (empty = all cash);
    ``mode`` rolls either a fixed strike or a fixed strike/spot ratio, and
    ``ratio_schedules`` (one callable per asset) overrides the ratio at
    each rebalance date.  Substeps refine the simulated path grid without
    changing the rebalance dates, so different frequencies can share
    draws.
    """
    n_rebalances = frequency * params.horizon
    if abs(n_rebalances - round(n_rebalances)) > 1e-9 or n_rebalances < 1:
        raise ParameterError(
            "frequency * horizon must be a positive whole number of "
            "rebalances")
    strategy = _build_strategy(tuple(composition), mode,
                               int(round(n_rebalances)), params,
                               ratio_schedules)
    result = simulate_wealth(params, strategy, pricing, n_paths, seed,
                             antithetic=antithetic, substeps=substeps)
    cer, se = cer_from_terminal_wealth(result.terminal, params.gamma,
                                       params.horizon, antithetic=antithetic)
    summary = value_function(params, 0.0, 1.0)
    warning = None
    if result.bankrupt_fraction > BANKRUPT_WARN_FRACTION:
        warning = (f"bankrupt-path fraction {result.bankrupt_fraction:.3%} "
                   f"exceeds {BANKRUPT_WARN_FRACTION:.0%}; CER estimate "
                   "unreliable")
    return CERReport(cer_estimate=cer, std_err=se,
                     theoretical_cer=summary.cer_star,
                     incomplete_cer=summary.cer_incomplete,
                     frequency=frequency,
                     composition=tuple(s.record() for s in composition),
                     n_paths=n_paths,
                     bankrupt_fraction=result.bankrupt_fraction,
                     warning=warning)


def cer_strike_surface(k1_values, k2_values, frequencies,
                       params: MarketParams, n_paths: int, seed: int,
                       family: str = "call", threads: int = 1) -> list[dict]:
    """CER per (strike pair, frequency) for a rolled one-asset pair.

    Each strike pair keeps one seed across all frequencies so frequency
    comparisons are paired.  Rows carry k1, k2, frequency, cer, stderr,
    theoretical, incomplete.
    """
    cells = [(i, j, float(k1), float(k2))
             for i, k1 in enumerate(k1_values)
             for j, k2 in enumerate(k2_values)]

    def run_cell(cell):
        i, j, k1, k2 = cell
        composition = (
            OptionSpec(family, "european", "s1", k1, params.maturity),
            OptionSpec(family, "european", "s2", k2, params.maturity),
        )
        cell_seed = spawn_seed(seed, i, j)
        out = []
        for frequency in frequencies:
            report = estimate_cer(composition, "fixed_strike", frequency,
                                  params, n_paths, cell_seed)
            out.append({"k1": k1, "k2": k2, "frequency": frequency,
                        "cer": report.cer_estimate,
                        "stderr": report.std_err,
                        "theoretical": report.theoretical_cer,
                        "incomplete": report.incomplete_cer})
        return out

    nested = _parallel_map(run_cell, cells, threads)
    return [row for rows in nested for row in rows]


def rolling_straddle_cer(frequencies, params: MarketParams, n_paths: int,
                         seed: int, settings: PricingSettings | None = None,
                         ratio_grid_points: int = 65) -> list[dict]:
    """CER versus rebalancing frequency for the rolling-straddle pair.

    The strike at each rebalance is the current optimal ratio times spot;
    ratios are precomputed on a time grid and interpolated at rebalance
    dates.  One seed is shared across frequencies.
    """
    settings = settings or PricingSettings()
    grid = np.linspace(0.0, params.horizon, ratio_grid_points)
    schedules = []
    for asset in (0, 1):
        ratios = straddle_ratio_path(asset, params, grid, "european", settings)
        schedules.append(lambda t, g=grid, r=ratios: float(np.interp(t, g, r)))

    composition = (
        OptionSpec("straddle", "european", "s1", params.spot[0],
                   params.maturity),
        OptionSpec("straddle", "european", "s2", params.spot[1],
                   params.maturity),
    )
    rows = []
    for frequency in frequencies:
        report = estimate_cer(composition, "ratio", frequency, params,
                              n_paths, seed, ratio_schedules=schedules)
        rows.append({"frequency": frequency, "cer": report.cer_estimate,
                     "stderr": report.std_err,
                     "theoretical": report.theoretical_cer,
                     "incomplete": report.incomplete_cer})
    return rows
