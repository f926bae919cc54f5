"""Market constants, correlated GBM path generation, and the wealth ledger.

Paths are sampled from the exact lognormal transition density (no Euler
bias).  Random numbers come from a counter-based generator keyed on
(seed, block index) with a fixed block size, so the draws behind path i
depend only on the seed and i, never on the total path count or on how
work is chunked.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import bsm
from .errors import CompositionInfeasibleError, ParameterError

MEASURES = ("physical", "risk-neutral")

# Fixed chunking so results never depend on how many paths are requested.
PATH_BLOCK = 16384

# Wealth below this fraction of initial wealth is treated as bankruptcy:
# CRRA utility is undefined at zero wealth.
BANKRUPTCY_FLOOR = 1e-8

MARKET_KEYS = (
    "r", "sigma1", "sigma2", "lambda1", "lambda2", "rho", "gamma",
    "horizon", "maturity", "spot1", "spot2",
)


@dataclass(frozen=True)
class MarketParams:
    """Constants of the two-asset lognormal market.

    sigma / lam / spot are per-asset pairs; rho is the correlation of the
    two driving Brownian motions; gamma is the CRRA risk-aversion
    coefficient; horizon is the investment horizon and maturity the
    time-to-maturity options are rolled to, both in years.
    """

    r: float
    sigma: tuple[float, float]
    lam: tuple[float, float]
    rho: float
    gamma: float
    horizon: float
    maturity: float
    spot: tuple[float, float]

    def __post_init__(self):
        vals = (self.r, *self.sigma, *self.lam, self.rho, self.gamma,
                self.horizon, self.maturity, *self.spot)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("market parameters must be finite")
        if not -1.0 < self.rho < 1.0:
            raise ParameterError(f"rho must lie in (-1, 1), got {self.rho}")
        # sigma = 0 is admitted only so the deterministic zero-volatility
        # limit can be exercised; every pricing operation requires sigma > 0.
        if any(s < 0 for s in self.sigma):
            raise ParameterError("volatilities must be nonnegative")
        if self.gamma <= 0 or self.gamma == 1.0:
            raise ParameterError(
                f"gamma must be positive and != 1 (CRRA domain), got {self.gamma}")
        if self.horizon <= 0:
            raise ParameterError("horizon must be positive")
        if self.maturity <= 0:
            raise ParameterError("maturity must be positive")
        if any(s <= 0 for s in self.spot):
            raise ParameterError("spot prices must be positive")

    @property
    def phi(self) -> np.ndarray:
        """Lower-triangular correlation factor of the Brownian pair."""
        return np.array([[1.0, 0.0],
                         [self.rho, math.sqrt(1.0 - self.rho ** 2)]])

    @property
    def phi_phi_t(self) -> np.ndarray:
        return np.array([[1.0, self.rho], [self.rho, 1.0]])

    def drift(self, measure: str) -> np.ndarray:
        if measure == "physical":
            return np.array([self.r + self.sigma[i] * self.lam[i] for i in (0, 1)])
        if measure == "risk-neutral":
            return np.array([self.r, self.r])
        raise ParameterError(f"unknown measure {measure!r}")

    @classmethod
    def from_mapping(cls, section) -> "MarketParams":
        missing = [k for k in MARKET_KEYS if k not in section]
        if missing:
            raise ParameterError(f"market section missing keys: {', '.join(missing)}")
        try:
            vals = {k: float(section[k]) for k in MARKET_KEYS}
        except ValueError as exc:
            raise ParameterError(f"non-numeric market value: {exc}") from exc
        return cls(
            r=vals["r"],
            sigma=(vals["sigma1"], vals["sigma2"]),
            lam=(vals["lambda1"], vals["lambda2"]),
            rho=vals["rho"],
            gamma=vals["gamma"],
            horizon=vals["horizon"],
            maturity=vals["maturity"],
            spot=(vals["spot1"], vals["spot2"]),
        )


def load_market_params(path) -> MarketParams:
    """Read MarketParams from the flat ``[market]`` section of a config file."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    read = parser.read(path)
    if not read:
        raise ParameterError(f"config file not found: {path}")
    if not parser.has_section("market"):
        raise ParameterError(f"no [market] section in {path}")
    return MarketParams.from_mapping(dict(parser["market"]))


def spawn_seed(root: int, *stream: int) -> int:
    """Derive a reproducible child seed from a root seed and stream ids."""
    ss = np.random.SeedSequence(entropy=(int(root), *[int(s) for s in stream]))
    return int(ss.generate_state(2, dtype=np.uint64)[0])


@dataclass(frozen=True)
class PathSet:
    """Simulated asset-price paths on a shared time grid.

    paths has shape (n_paths, n_times, 2) and starts at the spot pair.
    """

    times: np.ndarray
    paths: np.ndarray
    seed: int
    measure: str

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=(int(seed), int(block)))))


def iter_path_blocks(params: MarketParams, n_paths: int, n_steps: int,
                     measure: str, seed: int, *, t_end: float | None = None,
                     spot: Sequence[float] | None = None,
                     antithetic: bool = False, allow_zero_vol: bool = False):
    """Yield (start_index, block) pairs of exact-GBM price paths.

    Each block has shape (m, n_steps + 1, 2).  Blocks are keyed on
    (seed, block index) with the fixed size PATH_BLOCK, so path i is
    reproducible in isolation.  With ``antithetic`` the draws of every odd
    path are the negated draws of the preceding even path.
    """
    if n_paths < 1 or n_steps < 1:
        raise ParameterError("n_paths and n_steps must be >= 1")
    if measure not in MEASURES:
        raise ParameterError(f"measure must be one of {MEASURES}, got {measure!r}")
    if antithetic and n_paths % 2:
        raise ParameterError("antithetic sampling requires an even path count")
    if any(s == 0 for s in params.sigma) and not allow_zero_vol:
        raise ParameterError(
            "zero volatility rejected; pass allow_zero_vol=True for the "
            "deterministic limit")

    horizon = params.horizon if t_end is None else float(t_end)
    if horizon <= 0:
        raise ParameterError("path horizon must be positive")
    dt = horizon / n_steps
    sigma = np.asarray(params.sigma)
    mu = params.drift(measure)
    drift = (mu - 0.5 * sigma ** 2) * dt
    vol = sigma * math.sqrt(dt)
    rho = params.rho
    rho_c = math.sqrt(1.0 - rho * rho)
    spot = np.asarray(params.spot if spot is None else spot, dtype=float)
    if spot.shape != (2,) or np.any(spot <= 0):
        raise ParameterError("spot override must be a positive pair")

    for block_idx, start in enumerate(range(0, n_paths, PATH_BLOCK)):
        m = min(PATH_BLOCK, n_paths - start)
        rng = _block_rng(seed, block_idx)
        if antithetic:
            z = rng.standard_normal((m // 2, n_steps, 2))
            z = np.stack([z, -z], axis=1).reshape(m, n_steps, 2)
        else:
            z = rng.standard_normal((m, n_steps, 2))
        shocks = np.empty_like(z)
        shocks[..., 0] = z[..., 0]
        shocks[..., 1] = rho * z[..., 0] + rho_c * z[..., 1]
        log_inc = drift + vol * shocks
        block = np.empty((m, n_steps + 1, 2))
        block[:, 0, :] = spot
        block[:, 1:, :] = spot * np.exp(np.cumsum(log_inc, axis=1))
        yield start, block


def simulate_paths(params: MarketParams, n_paths: int, n_steps: int,
                   measure: str, seed: int, *, t_end: float | None = None,
                   antithetic: bool = False,
                   allow_zero_vol: bool = False) -> PathSet:
    """Simulate correlated GBM paths on a uniform grid over [0, horizon].

    Sampling is exact in distribution (lognormal stepping on the closed-form
    transition), deterministic for a fixed seed, and path i does not change
    when n_paths changes.
    """
    horizon = params.horizon if t_end is None else float(t_end)
    times = np.linspace(0.0, horizon, n_steps + 1)
    paths = np.empty((n_paths, n_steps + 1, 2))
    for start, block in iter_path_blocks(
            params, n_paths, n_steps, measure, seed, t_end=t_end,
            antithetic=antithetic, allow_zero_vol=allow_zero_vol):
        paths[start:start + block.shape[0]] = block
    return PathSet(times=times, paths=paths, seed=int(seed), measure=measure)


def export_paths_csv(pathset: PathSet, fileobj) -> None:
    """Write a PathSet as ``time,path_id,s1,s2`` rows (debugging aid)."""
    fileobj.write("time,path_id,s1,s2\n")
    for k, t in enumerate(pathset.times):
        for i in range(pathset.n_paths):
            s1, s2 = pathset.paths[i, k]
            fileobj.write(f"{t:.17g},{i},{s1:.17g},{s2:.17g}\n")


# ---------------------------------------------------------------------------
# Discretely rebalanced, self-financing wealth ledger
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RollLeg:
    """One rolled option position, held on a single underlying asset.

    strike_rule:
      * "fixed"    - constant strike ``value`` at every roll
      * "ratio"    - strike = ``value`` * current spot (constant moneyness)
      * "schedule" - strike = ``schedule(t)`` * current spot
    """

    asset: int
    family: str
    value: float = 0.0
    strike_rule: str = "fixed"
    style: str = "european"
    schedule: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.asset not in (0, 1):
            raise ParameterError("leg asset index must be 0 or 1")
        if self.family not in bsm.FAMILIES:
            raise ParameterError(f"unsupported roll family {self.family!r}")
        if self.strike_rule not in ("fixed", "ratio", "schedule"):
            raise ParameterError(f"unknown strike rule {self.strike_rule!r}")
        if self.strike_rule == "schedule" and self.schedule is None:
            raise ParameterError("schedule strike rule needs a schedule callable")
        if self.strike_rule != "schedule" and self.value < 0:
            raise ParameterError("strike value must be nonnegative")

    def strikes_at(self, t: float, spots: np.ndarray) -> np.ndarray:
        if self.strike_rule == "fixed":
            return np.full(spots.shape[0], self.value)
        if self.strike_rule == "ratio":
            return self.value * spots[:, self.asset]
        return self.schedule(t) * spots[:, self.asset]


@dataclass(frozen=True)
class RollStrategy:
    """Rebalancing schedule plus the per-date allocation rule.

    At every rebalance date all options are sold at model price and fresh
    ones with time-to-maturity ``params.maturity`` are bought; each leg's
    weight is exposure[asset] / f where f is the leg's relative sensitivity
    at purchase.  An empty leg tuple is the all-cash strategy.
    """

    n_rebalances: int
    legs: tuple[RollLeg, ...] = ()
    exposure: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.n_rebalances < 1:
            raise ParameterError("need at least one rebalance interval")
        assets = [leg.asset for leg in self.legs]
        if len(set(assets)) != len(assets):
            raise ParameterError("one roll leg per asset at most")


@dataclass(frozen=True)
class WealthResult:
    """Terminal-wealth sample of a simulated rolling strategy."""

    terminal: np.ndarray
    bankrupt: np.ndarray
    times: np.ndarray
    seed: int
    antithetic: bool

    @property
    def bankrupt_fraction(self) -> float:
        return float(np.mean(self.bankrupt))


def analytic_roll_pricer(leg: RollLeg, strikes: np.ndarray, spots: np.ndarray,
                         tau: float, params: MarketParams):
    """Default pricing oracle: closed-form European call/put/straddle."""
    if leg.style != "european":
        raise ParameterError(
            f"analytic roll pricer only handles European legs, got {leg.style!r}")
    return bsm.price_delta(leg.family, spots[:, leg.asset], strikes,
                           params.r, params.sigma[leg.asset], tau)


def simulate_wealth(params: MarketParams, strategy: RollStrategy,
                    pricing=None, n_paths: int = 10000, seed: int = 0,
                    *, antithetic: bool = True,
                    substeps: int = 1) -> WealthResult:
    """Simulate terminal wealth of a discretely rebalanced option portfolio.

    Between rebalances option units are held fixed and repriced off the
    simulated asset paths while cash accrues at r; at each rebalance the
    portfolio is marked to model, weights are reset, and options are rolled
    to fresh maturity.  Wealth starts at 1.  Paths whose wealth hits the
    bankruptcy floor are floored there and flagged.

    ``substeps`` refines the simulated path grid between rebalances (the
    ledger itself only looks at rebalance dates); runs at different
    frequencies can share draws by matching frequency * substeps.
    """
    if pricing is None:
        pricing = analytic_roll_pricer
    if substeps < 1:
        raise ParameterError("substeps must be >= 1")
    m = strategy.n_rebalances
    dt = params.horizon / m
    if strategy.legs and params.maturity - dt <= 0:
        raise CompositionInfeasibleError(
            f"options mature (T={params.maturity}) before the next rebalance "
            f"(dt={dt:.6g}); increase the frequency or the maturity",
            date=0.0)
    times = np.linspace(0.0, params.horizon, m + 1)
    terminal = np.empty(n_paths)
    bankrupt = np.zeros(n_paths, dtype=bool)

    for start, block in iter_path_blocks(params, n_paths, m * substeps,
                                         "physical", seed,
                                         antithetic=antithetic):
        nb = block.shape[0]
        wealth = np.ones(nb)
        alive = np.ones(nb, dtype=bool)
        for k in range(m):
            t = times[k]
            spots = block[:, k * substeps, :]
            spots_next = block[:, (k + 1) * substeps, :]
            growth = math.exp(params.r * dt)
            if not strategy.legs:
                wealth = wealth * growth
                continue
            position_value = np.zeros(nb)
            cash_weight = np.ones(nb)
            for leg in strategy.legs:
                strikes = leg.strikes_at(t, spots)
                price, delta = pricing(leg, strikes, spots, params.maturity, params)
                price = np.asarray(price, dtype=float)
                if np.any(price <= 0):
                    raise CompositionInfeasibleError(
                        f"non-positive option price at t={t:.6g} for {leg}",
                        date=t, spec=leg)
                f = delta * spots[:, leg.asset] * params.sigma[leg.asset] / price
                weight = strategy.exposure[leg.asset] / f
                units = weight * wealth / price
                value_next, _ = pricing(leg, strikes, spots_next,
                                        params.maturity - dt, params)
                value_next = np.asarray(value_next, dtype=float)
                if np.any(value_next <= 0):
                    raise CompositionInfeasibleError(
                        f"non-positive option value at t={times[k + 1]:.6g} "
                        f"for {leg}", date=times[k + 1], spec=leg)
                position_value += units * value_next
                cash_weight -= weight
            wealth = position_value + cash_weight * wealth * growth
            busted = wealth < BANKRUPTCY_FLOOR
            alive &= ~busted
            wealth = np.maximum(wealth, BANKRUPTCY_FLOOR)
        terminal[start:start + nb] = wealth
        bankrupt[start:start + nb] = ~alive

    return WealthResult(terminal=terminal, bankrupt=bankrupt, times=times,
                        seed=int(seed), antithetic=antithetic)
