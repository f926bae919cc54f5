"""Vectorized Black-Scholes-Merton price/delta kernels.

Kept free of package imports so both the path simulator and the pricing
layer can share one implementation.
"""

import numpy as np
from scipy.special import ndtr

FAMILIES = ("call", "put", "straddle")


def d1_d2(spot, strike, r, sigma, tau):
    """d1/d2 terms; requires spot > 0, strike > 0, sigma > 0, tau > 0."""
    spot = np.asarray(spot, dtype=float)
    strike = np.asarray(strike, dtype=float)
    vol = sigma * np.sqrt(tau)
    d1 = (np.log(spot / strike) + (r + 0.5 * sigma * sigma) * tau) / vol
    return d1, d1 - vol


def price_delta(family, spot, strike, r, sigma, tau):
    """Price and spot-delta of a European call, put, or straddle.

    Vectorized over ``spot`` and ``strike``.  A zero strike degenerates the
    call and the straddle to the asset itself (price = spot, delta = 1) and
    the put to a worthless contract (price = 0, delta = 0); callers decide
    whether a zero price is an error.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown European family: {family!r}")
    spot = np.asarray(spot, dtype=float)
    strike = np.asarray(strike, dtype=float)
    spot, strike = np.broadcast_arrays(spot, strike)
    if np.any(spot <= 0):
        raise ValueError("spot must be positive")
    if np.any(strike < 0):
        raise ValueError("strike must be nonnegative")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if tau <= 0:
        raise ValueError("time to maturity must be positive")

    positive = strike > 0
    k_safe = np.where(positive, strike, 1.0)
    d1, d2 = d1_d2(spot, k_safe, r, sigma, tau)
    disc_k = strike * np.exp(-r * tau)

    if family == "call":
        price = spot * ndtr(d1) - disc_k * ndtr(d2)
        delta = ndtr(d1)
        price0, delta0 = spot, np.ones_like(spot)
    elif family == "put":
        price = disc_k * ndtr(-d2) - spot * ndtr(-d1)
        delta = -ndtr(-d1)
        price0, delta0 = np.zeros_like(spot), np.zeros_like(spot)
    else:  # straddle = call + put at the same strike
        price = spot * (2.0 * ndtr(d1) - 1.0) - disc_k * (2.0 * ndtr(d2) - 1.0)
        delta = 2.0 * ndtr(d1) - 1.0
        price0, delta0 = spot, np.ones_like(spot)

    price = np.where(positive, price, price0)
    delta = np.where(positive, delta, delta0)
    if price.ndim == 0:
        return float(price), float(delta)
    return price, delta


def strike_derivative(family, spot, strike, r, sigma, tau):
    """dPrice/dStrike, closed form; requires strike > 0."""
    d1, d2 = d1_d2(spot, strike, r, sigma, tau)
    disc = np.exp(-r * tau)
    if family == "call":
        return -disc * ndtr(d2)
    if family == "put":
        return disc * ndtr(-d2)
    if family == "straddle":
        return -disc * (2.0 * ndtr(d2) - 1.0)
    raise ValueError(f"unknown European family: {family!r}")
