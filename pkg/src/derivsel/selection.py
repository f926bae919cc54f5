"""Searches option families for the composition minimizing risky exposure.

One-asset selection is separable (each slot maximizes its own |f|), calls
and puts are monotone in strike so their winners sit on the range
boundary, straddles have an interior optimal strike on each side of the
delta-zero exclusion point, and basket selection is sequential: slot 1
maximizes |f11|, then the basket strike is searched given that loading.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import bsm
from .allocation import merton_eta, triangular_allocation
from .errors import (
    NoAdmissibleCandidateError,
    ParameterError,
    SingularCompositionError,
    ZeroPriceError,
)
from .market import MarketParams, spawn_seed
from .pricing import (
    SENSITIVITY_FLOOR,
    OptionSpec,
    PricingSettings,
    american_put_exercise_bound,
    bs_european,
    bs_straddle,
    mc_price,
    straddle_exclusion_strike,
    tree_price_american,
)

DEFAULT_ONE_ASSET_FAMILIES = (
    ("european", "call"),
    ("asian", "call"),
    ("european", "put"),
    ("asian", "put"),
    ("american", "put"),
)

STYLE_TAG = {"european": "euro", "asian": "asian", "american": "amer"}
_STYLE_RANK = {"european": 0, "asian": 1, "american": 2}
_KIND_RANK = {"call": 0, "put": 1, "straddle": 2, "basket_call": 3, "basket_put": 4}
_STYLE_ID = _STYLE_RANK
_KIND_ID = _KIND_RANK

_UNDERLYING = ("s1", "s2")


def family_tag(style: str, kind: str) -> str:
    return f"{STYLE_TAG[style]}_{kind}" if kind in ("call", "put") else kind


@dataclass(frozen=True)
class StrikeBounds:
    """Strike range as spot multiples: calls search [spot, upper * spot],
    puts [lower * spot, spot]; basket ranges scale the summed spot."""

    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 < self.lower <= 1.0:
            raise ParameterError("lower bound ratio must lie in (0, 1]")
        if self.upper < 1.0:
            raise ParameterError("upper bound ratio must be >= 1")

    @classmethod
    def from_strikes(cls, lower: float, upper: float, spot: float) -> "StrikeBounds":
        return cls(lower / spot, upper / spot)

    def call_range(self, spot: float) -> tuple[float, float]:
        return spot, self.upper * spot

    def put_range(self, spot: float) -> tuple[float, float]:
        return self.lower * spot, spot


@dataclass(frozen=True)
class CandidateRow:
    family: str
    style: str
    strike: float
    f: float
    pi: float
    admissible: bool


@dataclass(frozen=True)
class RegionCell:
    ra: float
    rb: float
    winner: str
    achieved_l1: float


@dataclass(frozen=True)
class SelectionOutcome:
    winner: OptionSpec | None
    achieved_l1: float
    candidates: list[CandidateRow]
    region: list[RegionCell] | None = None


def _parallel_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _one_asset_f(kind: str, style: str, asset: int, strike: float,
                 params: MarketParams, settings: PricingSettings,
                 seed: int) -> float:
    """Relative sensitivity of one candidate; NaN when inadmissible."""
    spec = OptionSpec(kind, style, _UNDERLYING[asset], strike, params.maturity)
    try:
        if style == "european":
            if kind == "straddle":
                res = bs_straddle(params.spot[asset], strike, params.r,
                                  params.sigma[asset], params.maturity)
            else:
                res = bs_european(params.spot[asset], strike, params.r,
                                  params.sigma[asset], params.maturity, kind)
        elif style == "american":
            res = tree_price_american(spec, params.spot[asset], params,
                                      settings.tree_steps,
                                      settings.exercise_dates)
            if res.exercise_now:
                return math.nan
        else:
            res = mc_price(spec, params.spot, params, settings.mc_paths, seed,
                           fd_bump=settings.fd_bump,
                           antithetic=settings.antithetic)
    except (ZeroPriceError, SingularCompositionError):
        return math.nan
    f = res.f[0]
    if not math.isfinite(f) or abs(f) < SENSITIVITY_FLOOR:
        return math.nan
    return f


def _strike_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    if lo <= 0:
        raise ParameterError("strike grid needs a positive lower bound")
    return np.geomspace(lo, hi, max(2, n))


def _pick_winner(rows: list[CandidateRow], spot: float) -> CandidateRow:
    """Largest |f|; ties prefer near-the-money, then calls, then European."""
    best, best_key = None, None
    for row in rows:
        if not row.admissible:
            continue
        key = (-abs(row.f), abs(row.strike - spot),
               _KIND_RANK[row.family], _STYLE_RANK[row.style])
        if best_key is None or key < best_key:
            best, best_key = row, key
    if best is None:
        raise NoAdmissibleCandidateError(
            "no candidate has sensitivity above the singularity floor")
    return best


def select_one_asset(asset: int, families, bounds: StrikeBounds,
                     params: MarketParams,
                     settings: PricingSettings | None = None,
                     curve_points: int = 200, mc_curve_points: int = 40,
                     threads: int = 1) -> SelectionOutcome:
    """Pick the option on one asset with the largest relative sensitivity.

    Calls are searched on [spot, B] and puts on [A, spot]; the winners of
    monotone families sit on the deepest out-of-the-money boundary, but the
    whole grid is evaluated rather than assumed.  American put ranges are
    intersected with the no-immediate-exercise region and the style is
    skipped when that intersection is empty.
    """
    settings = settings or PricingSettings()
    spot = params.spot[asset]
    eta_i = merton_eta(params).eta[asset]
    rows: list[CandidateRow] = []

    for style, kind in families:
        if kind not in ("call", "put"):
            raise ParameterError("one-asset selection covers calls and puts")
        lo, hi = (bounds.call_range(spot) if kind == "call"
                  else bounds.put_range(spot))
        if style == "american" and kind == "put":
            bound = american_put_exercise_bound(
                spot, params, asset, params.maturity, settings.tree_steps,
                settings.exercise_dates)
            hi = min(hi, bound - 1e-6 * spot)
            if hi < lo:
                continue  # exercised immediately across the whole range
        n_pts = curve_points if style == "european" else mc_curve_points
        strikes = _strike_grid(lo, hi, n_pts)

        def evaluate(item, style=style, kind=kind):
            idx, strike = item
            seed = spawn_seed(settings.seed, _STYLE_ID[style], _KIND_ID[kind],
                              asset, idx)
            return _one_asset_f(kind, style, asset, strike, params, settings,
                                seed)
        fs = _parallel_map(evaluate, list(enumerate(strikes)), threads)
        for strike, f in zip(strikes, fs):
            ok = math.isfinite(f)
            rows.append(CandidateRow(kind, style, float(strike),
                                     f if ok else math.nan,
                                     eta_i / f if ok else math.nan, ok))

    winner_row = _pick_winner(rows, spot)
    winner = OptionSpec(winner_row.family, winner_row.style,
                        _UNDERLYING[asset], winner_row.strike, params.maturity)
    return SelectionOutcome(winner=winner, achieved_l1=abs(winner_row.pi),
                            candidates=rows)


# ---------------------------------------------------------------------------
# Region maps over (R^A, R^B) strike-bound ratios
# ---------------------------------------------------------------------------

def _axis_sensitivities(params, asset, families, ra_values, rb_values,
                        settings, threads):
    """|f| per family along its strike axis (calls: R^B, puts: R^A).

    Returns {(style, kind): array}; NaN marks inadmissible strikes.  The
    winner in a monotone family is its deepest out-of-the-money strike, so
    each (R^A, R^B) cell only needs these boundary evaluations.
    """
    spot = params.spot[asset]
    exercise_bound = None
    if ("american", "put") in families:
        exercise_bound = american_put_exercise_bound(
            spot, params, asset, params.maturity, settings.tree_steps,
            settings.exercise_dates)

    jobs = []
    for style, kind in families:
        ratios = rb_values if kind == "call" else ra_values
        for idx, ratio in enumerate(ratios):
            jobs.append((style, kind, idx, ratio * spot))

    def evaluate(job):
        style, kind, idx, strike = job
        if (style, kind) == ("american", "put") and strike >= exercise_bound:
            return math.nan
        seed = spawn_seed(settings.seed, _STYLE_ID[style], _KIND_ID[kind],
                          asset, idx)
        return _one_asset_f(kind, style, asset, strike, params, settings, seed)

    values = _parallel_map(evaluate, jobs, threads)
    axes = {key: np.full(len(rb_values if key[1] == "call" else ra_values),
                         math.nan)
            for key in families}
    for job, value in zip(jobs, values):
        style, kind, idx, _ = job
        axes[(style, kind)][idx] = value
    return axes


def putcall_region_map(params: MarketParams, ra_values, rb_values,
                       asset: int = 1, families=None,
                       settings: PricingSettings | None = None,
                       threads: int = 1) -> SelectionOutcome:
    """Winning put/call family per (R^A, R^B) cell for one asset.

    achieved_l1 is the slot's own |eta / f|; cells where every candidate is
    inadmissible are tagged "none".
    """
    settings = settings or PricingSettings()
    families = tuple(families or DEFAULT_ONE_ASSET_FAMILIES)
    ra_values = np.asarray(ra_values, dtype=float)
    rb_values = np.asarray(rb_values, dtype=float)
    if np.any(ra_values <= 0) or np.any(ra_values > 1) or np.any(rb_values < 1):
        raise ParameterError("need 0 < R^A <= 1 <= R^B")
    eta_abs = abs(merton_eta(params).eta[asset])

    axes = _axis_sensitivities(params, asset, families, ra_values, rb_values,
                               settings, threads)
    cells = []
    for i, ra in enumerate(ra_values):
        for j, rb in enumerate(rb_values):
            best_tag, best_key = "none", None
            for style, kind in families:
                f = axes[(style, kind)][j if kind == "call" else i]
                if not math.isfinite(f):
                    continue
                strike = (rb if kind == "call" else ra) * params.spot[asset]
                key = (-abs(f), abs(strike - params.spot[asset]),
                       _KIND_RANK[kind], _STYLE_RANK[style])
                if best_key is None or key < best_key:
                    best_tag, best_key = family_tag(style, kind), key
            l1 = eta_abs / -best_key[0] if best_key is not None else math.nan
            cells.append(RegionCell(float(ra), float(rb), best_tag, l1))

    rows = [CandidateRow(kind, style, math.nan, math.nan, math.nan, True)
            for style, kind in families]
    return SelectionOutcome(winner=None, achieved_l1=math.nan,
                            candidates=rows, region=cells)


# ---------------------------------------------------------------------------
# Straddles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchOptimum:
    strike: float
    f: float
    pi: float


@dataclass(frozen=True)
class StraddleSelection:
    """Optimal straddle strike for one asset and style.

    exclusion_strike is the delta-zero point A splitting the feasible
    strike set; exercise_bound (American only) caps the right branch at
    the put leg's immediate-exercise strike."""

    asset: int
    style: str
    exclusion_strike: float
    exercise_bound: float | None
    left: BranchOptimum
    right: BranchOptimum | None
    winner: OptionSpec
    achieved_l1: float
    stationarity_residual: float | None = None


def _straddle_f(style, asset, strike, params, settings, seed):
    if strike <= 0:
        return params.sigma[asset]  # payoff degenerates to the asset itself
    f = _one_asset_f_straddle(style, asset, strike, params, settings, seed)
    return f


def _one_asset_f_straddle(style, asset, strike, params, settings, seed):
    spec = OptionSpec("straddle", style, _UNDERLYING[asset], strike,
                      params.maturity)
    try:
        if style == "european":
            res = bs_straddle(params.spot[asset], strike, params.r,
                              params.sigma[asset], params.maturity)
        elif style == "american":
            res = tree_price_american(spec, params.spot[asset], params,
                                      settings.tree_steps,
                                      settings.exercise_dates)
            if res.exercise_now:
                return math.nan
        else:
            res = mc_price(spec, params.spot, params, settings.mc_paths, seed,
                           fd_bump=settings.fd_bump,
                           antithetic=settings.antithetic)
    except (ZeroPriceError, SingularCompositionError):
        return math.nan
    return res.f[0]


def _straddle_delta(style, asset, strike, params, settings, seed, tau=None):
    tau = params.maturity if tau is None else tau
    spot = params.spot[asset]
    if style == "european":
        _, delta = bsm.price_delta("straddle", spot, strike, params.r,
                                   params.sigma[asset], tau)
        return float(delta), 0.0
    spec = OptionSpec("straddle", style, _UNDERLYING[asset], strike, tau)
    if style == "american":
        res = tree_price_american(spec, spot, params, settings.tree_steps,
                                  settings.exercise_dates)
        return res.delta[0], 0.0
    res = mc_price(spec, params.spot, params, settings.mc_paths, seed,
                   fd_bump=settings.fd_bump, antithetic=settings.antithetic)
    return res.delta[0], res.delta_se[0]


def straddle_exclusion(asset: int, style: str, params: MarketParams,
                       settings: PricingSettings | None = None,
                       tau: float | None = None) -> float:
    """Delta-zero strike A located with Brent's method.

    European straddles use the closed form; MC roots share one seed across
    strikes so the bracketed function is smooth, and are accepted once the
    delta at the root is within two standard errors of zero.
    """
    settings = settings or PricingSettings()
    tau = params.maturity if tau is None else tau
    spot = params.spot[asset]
    if style == "european":
        return straddle_exclusion_strike(spot, params.r, params.sigma[asset], tau)
    seed = spawn_seed(settings.seed, _STYLE_ID[style], _KIND_ID["straddle"],
                      asset, 9999)
    hi = 1.5 * straddle_exclusion_strike(spot, params.r, params.sigma[asset], tau)

    def delta_at(strike):
        return _straddle_delta(style, asset, strike, params, settings, seed,
                               tau)[0]

    root = brentq(delta_at, 1e-3 * spot, hi, xtol=1e-4 * spot)
    if style == "asian":
        delta, se = _straddle_delta(style, asset, root, params, settings,
                                    seed, tau)
        if abs(delta) > 2.0 * max(se, 1e-12):
            # refine the bracket around the crossing once more
            width = 0.05 * spot
            root = brentq(delta_at, root - width, root + width,
                          xtol=1e-5 * spot)
    return float(root)


def _maximize_abs_f(style, asset, params, settings, seed, lo, hi):
    if hi <= lo:
        return None

    def objective(strike):
        f = _straddle_f(style, asset, strike, params, settings, seed)
        return -abs(f) if math.isfinite(f) else 0.0

    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-4 * params.spot[asset]})
    candidates = [(res.x, -res.fun), (hi, -objective(hi))]
    strike, best = max(candidates, key=lambda c: c[1])
    if best <= SENSITIVITY_FLOOR:
        return None
    f = _straddle_f(style, asset, strike, params, settings, seed)
    eta_i = merton_eta(params).eta[asset]
    return BranchOptimum(strike=float(strike), f=float(f),
                         pi=float(eta_i / f))


def stationarity_residual(asset: int, strike: float, params: MarketParams,
                          step_frac: float = 1e-3) -> float:
    """Relative residual of the optimal-strike condition for European
    straddles: dDelta/dK * O - Delta * dO/dK = 0 at an interior optimum.

    The strike derivative of the delta is taken by central differences.
    """
    spot = params.spot[asset]
    sigma = params.sigma[asset]
    tau = params.maturity
    h = step_frac * spot
    price, delta = bsm.price_delta("straddle", spot, strike, params.r, sigma, tau)
    _, delta_up = bsm.price_delta("straddle", spot, strike + h, params.r, sigma, tau)
    _, delta_dn = bsm.price_delta("straddle", spot, strike - h, params.r, sigma, tau)
    cross = (delta_up - delta_dn) / (2.0 * h)
    dk = bsm.strike_derivative("straddle", spot, strike, params.r, sigma, tau)
    lhs = cross * price
    rhs = delta * dk
    scale = abs(lhs) + abs(rhs)
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def select_straddle(asset: int, style: str, params: MarketParams,
                    settings: PricingSettings | None = None) -> StraddleSelection:
    """Optimal straddle strike: best |f| over both feasible branches.

    The feasible strikes are [0, A) and (A, inf) (American: (A, B]); the
    branch maximizer is found with a bounded scalar optimizer and the
    global winner is the branch with the larger |f|.  For European style
    the winner is cross-checked against the stationarity condition.
    """
    settings = settings or PricingSettings()
    if style not in STYLE_TAG:
        raise ParameterError(f"unknown straddle style {style!r}")
    spot = params.spot[asset]
    seed = spawn_seed(settings.seed, _STYLE_ID[style], _KIND_ID["straddle"],
                      asset, 7777)
    a_strike = straddle_exclusion(asset, style, params, settings)
    margin = 1e-3 * spot

    exercise_bound = None
    right_hi = 4.0 * a_strike
    if style == "american":
        exercise_bound = american_put_exercise_bound(
            spot, params, asset, params.maturity, settings.tree_steps,
            settings.exercise_dates)
        right_hi = exercise_bound - 1e-6 * spot

    left = _maximize_abs_f(style, asset, params, settings, seed,
                           1e-6 * spot, a_strike - margin)
    right = _maximize_abs_f(style, asset, params, settings, seed,
                            a_strike + margin, right_hi)
    if left is None and right is None:
        raise NoAdmissibleCandidateError(
            f"no admissible straddle strike for style {style!r}")
    if right is None or (left is not None and abs(left.f) >= abs(right.f)):
        best = left
    else:
        best = right

    residual = None
    if style == "european":
        residual = stationarity_residual(asset, best.strike, params)

    winner = OptionSpec("straddle", style, _UNDERLYING[asset], best.strike,
                        params.maturity)
    return StraddleSelection(asset=asset, style=style,
                             exclusion_strike=a_strike,
                             exercise_bound=exercise_bound,
                             left=left, right=right, winner=winner,
                             achieved_l1=abs(best.pi),
                             stationarity_residual=residual)


def straddle_ratio_path(asset: int, params: MarketParams, times,
                        style: str = "european",
                        settings: PricingSettings | None = None) -> np.ndarray:
    """Optimal strike-to-spot ratio at each time, rolling toward maturity.

    At time t the held option has ttm = maturity - t, so the ratio drifts
    as maturity approaches; it does not depend on the spot level
    (Black-Scholes homogeneity), which is what makes a ratio-based rolling
    rule well defined.
    """
    if style != "european":
        raise ParameterError("ratio paths are computed for European straddles")
    settings = settings or PricingSettings()
    spot = params.spot[asset]
    sigma = params.sigma[asset]
    eta_i = merton_eta(params).eta[asset]
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(times >= params.maturity):
        raise ParameterError("ratio path times must satisfy 0 <= t < maturity")

    ratios = np.empty(times.shape)
    for idx, t in enumerate(times):
        tau = params.maturity - t

        def objective(strike):
            price, delta = bsm.price_delta("straddle", spot, strike,
                                           params.r, sigma, tau)
            if price <= 0:
                return 0.0
            return -abs(delta * spot * sigma / price)

        a_strike = straddle_exclusion_strike(spot, params.r, sigma, tau)
        left = minimize_scalar(objective, bounds=(1e-6 * spot,
                                                  a_strike - 1e-3 * spot),
                               method="bounded",
                               options={"xatol": 1e-6 * spot})
        right = minimize_scalar(objective, bounds=(a_strike + 1e-3 * spot,
                                                   4.0 * a_strike),
                                method="bounded",
                                options={"xatol": 1e-6 * spot})
        best = left if left.fun <= right.fun else right
        ratios[idx] = best.x / spot
    return ratios


# ---------------------------------------------------------------------------
# Basket selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasketPoint:
    k1: float
    k2: float
    l1: float
    pi1: float
    pi2: float
    f21: float
    f22: float


@dataclass(frozen=True)
class BasketSelection:
    family: str
    slot1: OptionSpec
    winner: OptionSpec
    achieved_l1: float
    surface: list[BasketPoint]


def _basket_f(family, strike, params, settings, seed):
    spec = OptionSpec(family, "european", "basket", strike, params.maturity)
    try:
        res = mc_price(spec, params.spot, params, settings.mc_paths, seed,
                       fd_bump=settings.fd_bump,
                       antithetic=settings.antithetic)
    except ZeroPriceError:
        return math.nan, math.nan
    return res.f[0], res.f[1]


def select_basket(slot1: OptionSpec, family: str, bounds: StrikeBounds,
                  params: MarketParams,
                  settings: PricingSettings | None = None,
                  k2_points: int = 25, slot1_strikes=None,
                  threads: int = 1) -> BasketSelection:
    """Search the basket strike minimizing total l1 exposure.

    Slot 1 is a European call on asset 1; its sensitivity scales that
    slot's weight while pi2 = eta2 / f22 is carried by the basket alone.
    The whole (K1, K2) surface is evaluated by grid (monotonicity in K2 is
    observed, not assumed) and the winner is reported for the first K1.
    """
    settings = settings or PricingSettings()
    if family not in ("basket_call", "basket_put"):
        raise ParameterError("basket selection needs a basket family")
    if not (slot1.family == "call" and slot1.style == "european"
            and slot1.underlying == "s1"):
        raise ParameterError("slot 1 must be a European call on asset 1")
    eta = merton_eta(params)
    total = params.spot[0] + params.spot[1]
    lo, hi = (bounds.call_range(total) if family == "basket_call"
              else bounds.put_range(total))
    k2_values = _strike_grid(lo, hi, k2_points)
    k1_values = [slot1.strike] if slot1_strikes is None else list(slot1_strikes)

    def evaluate(item):
        idx, k2 = item
        seed = spawn_seed(settings.seed, 3, _KIND_ID[family], idx)
        return _basket_f(family, k2, params, settings, seed)

    basket_fs = _parallel_map(evaluate, list(enumerate(k2_values)), threads)

    surface: list[BasketPoint] = []
    best = None
    for k1 in k1_values:
        f11 = bs_european(params.spot[0], k1, params.r, params.sigma[0],
                          params.maturity, "call").f[0]
        for k2, (f21, f22) in zip(k2_values, basket_fs):
            if not (math.isfinite(f21) and math.isfinite(f22)):
                continue
            if abs(f22) < SENSITIVITY_FLOOR:
                raise SingularCompositionError(
                    f"basket sensitivity f22 = {f22:.3e} is singular at "
                    f"strike {k2:.6g}")
            alloc = triangular_allocation(f11, f21, f22, eta)
            point = BasketPoint(float(k1), float(k2), alloc.l1,
                                float(alloc.pi[0]), float(alloc.pi[1]),
                                f21, f22)
            surface.append(point)
            if k1 == k1_values[0] and (best is None or point.l1 < best.l1):
                best = point
    if best is None:
        raise NoAdmissibleCandidateError("no admissible basket strike")

    winner = OptionSpec(family, "european", "basket", best.k2, params.maturity)
    return BasketSelection(family=family, slot1=slot1, winner=winner,
                           achieved_l1=best.l1, surface=surface)


def basket_region_map(params: MarketParams, ra_values, rb_values,
                      slot1_strike: float, settings: PricingSettings | None = None,
                      one_asset_families=None, threads: int = 1,
                      optimize_slot1: bool = False,
                      slot1_strikes=None) -> SelectionOutcome:
    """Winning slot-2 candidate per (R^A, R^B) cell, baskets included.

    Candidates are the one-asset put/call families on asset 2 plus basket
    calls and puts on the summed spot; cells compare total l1 (both slots)
    given the fixed slot-1 European call.  With ``optimize_slot1`` the
    slot-1 strike is the |f11|-maximizing entry of ``slot1_strikes``, which
    is the sequential-selection rule (slot 1 is chosen independently of
    slot 2).
    """
    settings = settings or PricingSettings()
    families = tuple(one_asset_families or DEFAULT_ONE_ASSET_FAMILIES)
    ra_values = np.asarray(ra_values, dtype=float)
    rb_values = np.asarray(rb_values, dtype=float)
    eta = merton_eta(params)

    if optimize_slot1:
        pool = list(slot1_strikes or [slot1_strike])
        slot1_strike = max(
            pool, key=lambda k: abs(bs_european(
                params.spot[0], k, params.r, params.sigma[0],
                params.maturity, "call").f[0]))
    f11 = bs_european(params.spot[0], slot1_strike, params.r, params.sigma[0],
                      params.maturity, "call").f[0]

    axes = _axis_sensitivities(params, 1, families, ra_values, rb_values,
                               settings, threads)
    total = params.spot[0] + params.spot[1]

    def basket_axis(family, ratios):
        def evaluate(item):
            idx, ratio = item
            seed = spawn_seed(settings.seed, 3, _KIND_ID[family], idx)
            return _basket_f(family, ratio * total, params, settings, seed)
        return _parallel_map(evaluate, list(enumerate(ratios)), threads)

    basket_call_axis = basket_axis("basket_call", rb_values)
    basket_put_axis = basket_axis("basket_put", ra_values)

    def one_asset_l1(f2):
        return abs(eta.eta[0] / f11) + abs(eta.eta[1] / f2)

    def basket_l1(f21, f22):
        return triangular_allocation(f11, f21, f22, eta).l1

    cells = []
    spot2 = params.spot[1]
    for i, ra in enumerate(ra_values):
        for j, rb in enumerate(rb_values):
            entries = []
            for style, kind in families:
                f = axes[(style, kind)][j if kind == "call" else i]
                if math.isfinite(f):
                    strike = (rb if kind == "call" else ra) * spot2
                    entries.append((one_asset_l1(f), abs(strike - spot2),
                                    _KIND_RANK[kind], _STYLE_RANK[style],
                                    family_tag(style, kind)))
            f21, f22 = basket_call_axis[j]
            if math.isfinite(f22) and abs(f22) >= SENSITIVITY_FLOOR:
                entries.append((basket_l1(f21, f22),
                                abs(rb * total - total),
                                _KIND_RANK["basket_call"], 0, "basket_call"))
            f21, f22 = basket_put_axis[i]
            if math.isfinite(f22) and abs(f22) >= SENSITIVITY_FLOOR:
                entries.append((basket_l1(f21, f22),
                                abs(ra * total - total),
                                _KIND_RANK["basket_put"], 0, "basket_put"))
            if entries:
                best = min(entries)
                cells.append(RegionCell(float(ra), float(rb), best[-1], best[0]))
            else:
                cells.append(RegionCell(float(ra), float(rb), "none", math.nan))

    return SelectionOutcome(winner=None, achieved_l1=math.nan, candidates=[],
                            region=cells)
