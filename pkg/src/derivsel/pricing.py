"""Option pricing and relative-sensitivity entries for every family in scope.

European calls, puts, and straddles are priced in closed form; American
styles on a CRR binomial tree with the delta read off the first time
slice; Asian and basket payoffs by risk-neutral Monte Carlo with
antithetic variates and central-difference deltas sharing random draws
across bumps.

The relative sensitivity of an option to underlying k is
f = dO/dS_k * S_k * sigma_k / O, the option's instantaneous log-return
loading on that asset's risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import bsm
from .errors import ParameterError, SingularCompositionError, ZeroPriceError
from .market import MarketParams, iter_path_blocks

FAMILIES = ("call", "put", "straddle", "basket_call", "basket_put")
STYLES = ("european", "american", "asian")
UNDERLYINGS = ("s1", "s2", "basket")

# |f| below this is treated as zero sensitivity (singular composition).
SENSITIVITY_FLOOR = 1e-6


@dataclass(frozen=True)
class OptionSpec:
    """One derivative: payoff family, exercise style, underlying, strike, ttm.

    ``monitoring`` is the number of equally spaced averaging dates used by
    Asian styles (dates k * ttm / monitoring for k = 1..monitoring).
    """

    family: str
    style: str
    underlying: str
    strike: float
    ttm: float
    monitoring: int = 50

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        if self.style not in STYLES:
            raise ParameterError(f"unknown style {self.style!r}")
        if self.underlying not in UNDERLYINGS:
            raise ParameterError(f"unknown underlying {self.underlying!r}")
        if self.strike < 0:
            raise ParameterError("strike must be nonnegative")
        if self.ttm <= 0:
            raise ParameterError("time to maturity must be positive")
        if self.monitoring < 1:
            raise ParameterError("monitoring count must be >= 1")
        basket = self.family in ("basket_call", "basket_put")
        if basket != (self.underlying == "basket"):
            raise ParameterError(
                "basket families require the equal-weight basket underlying "
                "and vice versa")
        if basket and self.style == "american":
            raise ParameterError("American basket options are out of scope")

    @property
    def asset(self) -> int | None:
        """0/1 for one-asset specs, None for baskets."""
        if self.underlying == "s1":
            return 0
        if self.underlying == "s2":
            return 1
        return None

    def record(self) -> str:
        return (f"{self.family},{self.style},{self.underlying},"
                f"{self.strike:.17g},{self.ttm:.17g},{self.monitoring}")

    @classmethod
    def from_record(cls, text: str) -> "OptionSpec":
        parts = text.strip().split(",")
        if len(parts) != 6:
            raise ParameterError(f"option record needs 6 fields, got {text!r}")
        family, style, underlying, strike, ttm, monitoring = parts
        return cls(family=family, style=style, underlying=underlying,
                   strike=float(strike), ttm=float(ttm),
                   monitoring=int(monitoring))


@dataclass(frozen=True)
class PriceAndGreeks:
    """Price, per-underlying deltas and relative sensitivities f.

    ``delta`` and ``f`` have one entry per underlying the spec depends on
    (one for single-asset options, two for baskets).  Standard errors are
    zero for analytic and tree methods.
    """

    price: float
    delta: tuple[float, ...]
    f: tuple[float, ...]
    price_se: float = 0.0
    delta_se: tuple[float, ...] = ()
    method: str = "analytic"
    exercise_now: bool = False

    @property
    def degenerate(self) -> bool:
        """Price indistinguishable from zero at two standard errors."""
        return self.price <= 2.0 * self.price_se


@dataclass(frozen=True)
class PricingSettings:
    """Numeric knobs shared by the pricing routes.

    ``exercise_dates`` is the number of equally spaced dates at which an
    American option may be exercised (0 = every lattice node).  Simulation
    based American pricing only ever sees a discrete exercise grid, so the
    default mirrors the Asian monitoring count.
    """

    mc_paths: int = 200_000
    tree_steps: int = 2000
    exercise_dates: int = 50
    fd_bump: float = 1e-3
    antithetic: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.mc_paths < 2:
            raise ParameterError("mc_paths must be >= 2")
        if self.tree_steps < 1:
            raise ParameterError("tree_steps must be >= 1")
        if self.exercise_dates < 0:
            raise ParameterError("exercise_dates must be >= 0")
        if not 0 < self.fd_bump < 0.5:
            raise ParameterError("fd_bump must be a small positive fraction")


# ---------------------------------------------------------------------------
# Closed-form European routes
# ---------------------------------------------------------------------------

def bs_european(spot: float, strike: float, r: float, sigma: float,
                ttm: float, family: str) -> PriceAndGreeks:
    """Closed-form European call or put with delta and f."""
    if family not in ("call", "put"):
        raise ParameterError(f"bs_european prices calls and puts, not {family!r}")
    price, delta = bsm.price_delta(family, spot, strike, r, sigma, ttm)
    if price <= 0.0:
        raise ZeroPriceError(
            f"European {family} with strike {strike} has zero price")
    f = delta * spot * sigma / price
    return PriceAndGreeks(price=float(price), delta=(float(delta),),
                          f=(float(f),), delta_se=(0.0,), method="analytic")


def bs_straddle(spot: float, strike: float, r: float, sigma: float,
                ttm: float) -> PriceAndGreeks:
    """Closed-form European straddle (long call plus long put, same strike).

    Raises when the strike sits at the delta-zero exclusion point, where
    the sensitivity vanishes and any composition using it is singular.
    """
    price, delta = bsm.price_delta("straddle", spot, strike, r, sigma, ttm)
    if price <= 0.0:
        raise ZeroPriceError(f"straddle with strike {strike} has zero price")
    f = delta * spot * sigma / price
    if abs(f) < SENSITIVITY_FLOOR:
        raise SingularCompositionError(
            f"straddle strike {strike} sits at the delta-zero exclusion "
            f"point (|f| = {abs(f):.2e})")
    return PriceAndGreeks(price=float(price), delta=(float(delta),),
                          f=(float(f),), delta_se=(0.0,), method="analytic")


def straddle_exclusion_strike(spot: float, r: float, sigma: float,
                              ttm: float) -> float:
    """Strike at which the European straddle delta crosses zero."""
    return spot * math.exp((r + 0.5 * sigma * sigma) * ttm)


# ---------------------------------------------------------------------------
# Monte-Carlo route (Asian and basket payoffs; European as a cross-check)
# ---------------------------------------------------------------------------

def _mc_payoff(spec: OptionSpec, avg1: np.ndarray, avg2: np.ndarray) -> np.ndarray:
    if spec.family == "basket_call":
        return np.maximum(avg1 + avg2 - spec.strike, 0.0)
    if spec.family == "basket_put":
        return np.maximum(spec.strike - avg1 - avg2, 0.0)
    avg = avg1 if spec.asset == 0 else avg2
    if spec.family == "call":
        return np.maximum(avg - spec.strike, 0.0)
    if spec.family == "put":
        return np.maximum(spec.strike - avg, 0.0)
    return np.abs(avg - spec.strike)


def mc_price(spec: OptionSpec, spots, params: MarketParams, n_paths: int,
             seed: int, *, fd_bump: float = 1e-3,
             antithetic: bool = True) -> PriceAndGreeks:
    """Risk-neutral Monte-Carlo price with bump-and-reprice deltas.

    Deltas are central differences with a relative spot bump, re-using the
    same draws on both sides of every bump so the noise cancels.  Standard
    errors are reported for the price and each delta.  American styles are
    rejected (use the tree).
    """
    if spec.style == "american":
        raise ParameterError("American styles are priced on the tree, not by MC")
    spots = tuple(float(s) for s in spots)
    if len(spots) != 2 or any(s <= 0 for s in spots):
        raise ParameterError("spots must be a positive pair")
    if any(s <= 0 for s in params.sigma):
        raise ParameterError("Monte-Carlo pricing requires positive volatilities")
    if antithetic and n_paths % 2:
        n_paths += 1

    n_mon = spec.monitoring if spec.style == "asian" else 1
    assets = (0, 1) if spec.asset is None else (spec.asset,)
    bump_sizes = {a: fd_bump * spots[a] for a in assets}

    base_chunks: list[np.ndarray] = []
    diff_chunks: dict[int, list[np.ndarray]] = {a: [] for a in assets}
    for _, block in iter_path_blocks(
            params, n_paths, n_mon, "risk-neutral", seed, t_end=spec.ttm,
            spot=spots, antithetic=antithetic):
        avg1 = block[:, 1:, 0].mean(axis=1)
        avg2 = block[:, 1:, 1].mean(axis=1)
        base = _mc_payoff(spec, avg1, avg2)
        base_chunks.append(_pairwise(base, antithetic))
        for a in assets:
            # GBM paths scale linearly in the initial spot, so bumping the
            # spot with common random numbers is a rescaling of the averages.
            scale = 1.0 + fd_bump
            up = _mc_payoff(spec, avg1 * (scale if a == 0 else 1.0),
                            avg2 * (scale if a == 1 else 1.0))
            scale = 1.0 - fd_bump
            dn = _mc_payoff(spec, avg1 * (scale if a == 0 else 1.0),
                            avg2 * (scale if a == 1 else 1.0))
            diff_chunks[a].append(
                _pairwise((up - dn) / (2.0 * bump_sizes[a]), antithetic))

    disc = math.exp(-params.r * spec.ttm)
    base = np.concatenate(base_chunks)
    price = disc * float(base.mean())
    price_se = disc * float(base.std(ddof=1)) / math.sqrt(base.size)
    if price <= 2.0 * price_se:
        raise ZeroPriceError(
            f"MC price {price:.3e} within two standard errors "
            f"({price_se:.3e}) of zero; composition inadmissible: "
            f"{spec.record()}")

    deltas, delta_ses, fs = [], [], []
    for a in assets:
        d = np.concatenate(diff_chunks[a])
        delta = disc * float(d.mean())
        delta_se = disc * float(d.std(ddof=1)) / math.sqrt(d.size)
        deltas.append(delta)
        delta_ses.append(delta_se)
        fs.append(delta * spots[a] * params.sigma[a] / price)
    return PriceAndGreeks(price=price, delta=tuple(deltas), f=tuple(fs),
                          price_se=price_se, delta_se=tuple(delta_ses),
                          method="mc")


def _pairwise(values: np.ndarray, antithetic: bool) -> np.ndarray:
    """Collapse antithetic pairs so standard errors use independent samples."""
    if not antithetic:
        return values
    return values.reshape(-1, 2).mean(axis=1)


# ---------------------------------------------------------------------------
# Binomial-tree route for American styles
# ---------------------------------------------------------------------------

def _crr_leg(kind: str, spot: float, strike: float, r: float, sigma: float,
             tau: float, n_steps: int, exercise_dates: int = 50):
    """Price one American call or put leg on a CRR lattice.

    Early exercise is allowed on ``exercise_dates`` equally spaced dates
    (0 = every lattice node); the root is always an exercise date.  Returns
    (price, delta, exercise_now) with the delta read from the two first-step
    nodes and exercise_now reporting whether immediate exercise is optimal.
    """
    dt = tau / n_steps
    u = math.exp(sigma * math.sqrt(dt))
    d = 1.0 / u
    disc = math.exp(-r * dt)
    p = (math.exp(r * dt) - d) / (u - d)
    if not 0.0 < p < 1.0:
        raise ParameterError("tree step too coarse for these parameters")
    stride = 1
    if exercise_dates:
        stride = max(1, round(n_steps / exercise_dates))

    sign = 1.0 if kind == "call" else -1.0

    def intrinsic(prices):
        return np.maximum(sign * (prices - strike), 0.0)

    level = np.arange(n_steps + 1)
    values = intrinsic(spot * u ** (2.0 * level - n_steps))
    first_slice = None
    for i in range(n_steps - 1, 0, -1):
        values = disc * (p * values[1:i + 2] + (1.0 - p) * values[:i + 1])
        if i % stride == 0:
            nodes = spot * u ** (2.0 * np.arange(i + 1) - i)
            values = np.maximum(values, intrinsic(nodes))
        if i == 1:
            first_slice = values
    if first_slice is None:  # n_steps == 1
        first_slice = values
    continuation = disc * (p * first_slice[1] + (1.0 - p) * first_slice[0])
    root_intrinsic = float(intrinsic(np.array([spot]))[0])
    exercise_now = root_intrinsic > 0.0 and root_intrinsic >= continuation - 1e-12
    price = max(continuation, root_intrinsic)
    delta = (first_slice[1] - first_slice[0]) / (spot * (u - d))
    return float(price), float(delta), bool(exercise_now)


def tree_price_american(spec: OptionSpec, spot: float, params: MarketParams,
                        n_steps: int = 2000,
                        exercise_dates: int = 50) -> PriceAndGreeks:
    """CRR binomial price/delta for American calls, puts, and straddles.

    A straddle is carried as independently exercisable call and put legs.
    ``exercise_now`` flags specs whose immediate exercise is optimal at the
    given spot; such strikes are excluded from selection ranges.
    """
    if spec.style != "american":
        raise ParameterError("tree_price_american requires an American spec")
    if spec.asset is None:
        raise ParameterError("American basket options are out of scope")
    sigma = params.sigma[spec.asset]
    if sigma <= 0 or spot <= 0:
        raise ParameterError("tree pricing needs positive spot and volatility")

    legs = ("call", "put") if spec.family == "straddle" else (spec.family,)
    price = 0.0
    delta = 0.0
    exercise_now = False
    for kind in legs:
        if spec.strike == 0.0:
            # Degenerate strikes collapse the legs to the stock (call) or to
            # a worthless contract (put).
            leg_price, leg_delta, leg_ex = ((spot, 1.0, False)
                                            if kind == "call" else (0.0, 0.0, False))
        else:
            leg_price, leg_delta, leg_ex = _crr_leg(
                kind, spot, spec.strike, params.r, sigma, spec.ttm, n_steps,
                exercise_dates)
        price += leg_price
        delta += leg_delta
        exercise_now |= leg_ex
    f = delta * spot * sigma / price if price > 0 else math.inf
    return PriceAndGreeks(price=price, delta=(delta,), f=(f,),
                          delta_se=(0.0,), method="tree",
                          exercise_now=exercise_now)


def american_put_exercise_bound(spot: float, params: MarketParams, asset: int,
                                ttm: float, n_steps: int = 2000,
                                exercise_dates: int = 50,
                                tol: float = 1e-3) -> float:
    """Largest strike at which the American put is not exercised immediately.

    Located by bisecting the root-node exercise flag; above the bound the
    put's intrinsic value beats continuation at once.
    """
    def exercises(strike: float) -> bool:
        spec = OptionSpec("put", "american", "s1" if asset == 0 else "s2",
                          strike, ttm)
        return tree_price_american(spec, spot, params, n_steps,
                                   exercise_dates).exercise_now

    lo, hi = spot, 20.0 * spot
    if exercises(lo):
        raise ParameterError("American put exercises immediately at the money")
    while not exercises(hi):
        hi *= 2.0
        if hi > 1e6 * spot:
            raise ParameterError("no immediate-exercise strike found")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exercises(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Dispatcher and sensitivity matrices
# ---------------------------------------------------------------------------

def price_and_greeks(spec: OptionSpec, spots, params: MarketParams,
                     settings: PricingSettings | None = None,
                     seed: int | None = None) -> PriceAndGreeks:
    """Route a spec to its pricing method (analytic, tree, or MC)."""
    settings = settings or PricingSettings()
    spots = tuple(float(s) for s in spots)
    if spec.style == "american":
        return tree_price_american(spec, spots[spec.asset], params,
                                   settings.tree_steps,
                                   settings.exercise_dates)
    if spec.style == "european" and spec.asset is not None:
        spot = spots[spec.asset]
        sigma = params.sigma[spec.asset]
        if spec.family == "straddle":
            return bs_straddle(spot, spec.strike, params.r, sigma, spec.ttm)
        return bs_european(spot, spec.strike, params.r, sigma, spec.ttm,
                           spec.family)
    return mc_price(spec, spots, params, settings.mc_paths,
                    settings.seed if seed is None else seed,
                    fd_bump=settings.fd_bump, antithetic=settings.antithetic)


@dataclass(frozen=True)
class SensitivityMatrix:
    """Relative-sensitivity matrix of a two-option composition.

    Row i holds (f_i1, f_i2) for composition slot i; one-asset pairs are
    diagonal, (one-asset, basket) pairs lower-triangular.
    """

    matrix: np.ndarray
    cond: float
    results: tuple[PriceAndGreeks, PriceAndGreeks] | None = None

    @property
    def is_diagonal(self) -> bool:
        return self.matrix[0, 1] == 0.0 and self.matrix[1, 0] == 0.0


def sensitivity_matrix(composition, spots, params: MarketParams,
                       settings: PricingSettings | None = None) -> SensitivityMatrix:
    """Assemble the 2x2 sensitivity matrix of a composition.

    Slot 1 must be a one-asset option on asset 1 and slot 2 either a
    one-asset option on asset 2 or a basket, matching the diagonal and
    lower-triangular structures the allocation solver expects.
    """
    spec1, spec2 = composition
    if spec1.underlying != "s1":
        raise ParameterError("composition slot 1 must be written on asset 1")
    if spec2.underlying not in ("s2", "basket"):
        raise ParameterError(
            "composition slot 2 must be written on asset 2 or the basket")

    res1 = price_and_greeks(spec1, spots, params, settings)
    res2 = price_and_greeks(spec2, spots, params, settings)
    row1 = (res1.f[0], 0.0)
    row2 = (0.0, res2.f[0]) if spec2.asset is not None else tuple(res2.f)
    matrix = np.array([row1, row2])

    for idx in (0, 1):
        if abs(matrix[idx, idx]) < SENSITIVITY_FLOOR:
            raise SingularCompositionError(
                f"diagonal sensitivity f({idx + 1}{idx + 1}) = "
                f"{matrix[idx, idx]:.3e} below the singularity floor for "
                f"{composition[idx].record()}")
    cond = float(np.linalg.cond(matrix))
    return SensitivityMatrix(matrix=matrix, cond=cond, results=(res1, res2))
