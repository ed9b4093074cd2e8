"""Independent reference calculations used by the tests.

Nothing here imports the pricing or CVA code under test; each oracle
rebuilds its quantity from the model definition by a different route.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm


def flat_df(z: float, t: float) -> float:
    return math.exp(-z * t)


def hw_phi_flat(a: float, sigma: float, z: float, t: float) -> float:
    """Shift of the Hull-White short rate on a flat curve: f + (sigma^2 / 2a^2)(1 - e^{-at})^2."""
    return z + 0.5 * (sigma / a) ** 2 * (1.0 - math.exp(-a * t)) ** 2


def hw_bond_textbook(a: float, sigma: float, z: float, t: float, T: float, r: float) -> float:
    """P(t,T) from the A/B formulas on a flat curve, scalar arithmetic only."""
    B = (1.0 - math.exp(-a * (T - t))) / a
    lnA = math.log(flat_df(z, T) / flat_df(z, t)) + B * z - sigma**2 / (4 * a) * (1 - math.exp(-2 * a * t)) * B**2
    return math.exp(lnA - B * r)


def hw_bond_moments(a: float, sigma: float, z: float, t: float, T: float, r: float) -> float:
    """P(t,T) = E[exp(-I)] for Gaussian I = integral of r over [t,T]: exp(-m + v/2).

    The deterministic part of the mean is integrated numerically.
    """
    tau = T - t
    x_t = r - hw_phi_flat(a, sigma, z, t)
    B = (1.0 - math.exp(-a * tau)) / a
    shift, _ = quad(lambda s: hw_phi_flat(a, sigma, z, s), t, T, epsabs=1e-14, epsrel=1e-13)
    mean = x_t * B + shift
    var = sigma**2 / a**2 * (tau - 2 * B + (1 - math.exp(-2 * a * tau)) / (2 * a))
    return math.exp(-mean + 0.5 * var)


def swap_value_textbook(a, sigma, z, t, r, fixed_rate, start, maturity, notional=1.0,
                        pay_fixed=True, reset_bond=None):
    """Annual-coupon swap as a bond portfolio.

    The floating leg is ``P(t, next reset) - P(t, maturity)``; inside an
    accrual period the running coupon pays 1/P(reset, pay) at ``pay``,
    where ``reset_bond`` = P(reset, pay) was fixed at the reset date.
    """
    n = int(round(maturity - start))
    pays = [start + k for k in range(1, n + 1)]
    live = [p for p in pays if p > t + 1e-12]
    P = lambda T: hw_bond_textbook(a, sigma, z, t, T, r)
    fixed = fixed_rate * sum(P(T) for T in live)
    if t <= start + 1e-12:
        floating = P(start) - P(maturity)
    else:
        nxt = live[0]
        floating = P(nxt) / reset_bond - P(maturity)
    v = notional * (floating - fixed)
    return v if pay_fixed else -v


def forward_measure_short_rate(a, sigma, z, T0):
    """Mean and sd of r(T0) under the T0-forward measure, flat curve, r(0) = phi(0)."""
    mean_x = -(sigma**2 / a**2) * ((1 - math.exp(-a * T0)) - 0.5 * (1 - math.exp(-2 * a * T0)))
    sd = sigma * math.sqrt((1 - math.exp(-2 * a * T0)) / (2 * a))
    return hw_phi_flat(a, sigma, z, T0) + mean_x, sd


def swaption_mc(a, sigma, z, expiry, tenor, strike, notional, n_samples, seed):
    """Direct Monte Carlo of the cash-settled payer payoff at expiry.

    Samples r(T0) under the T0-forward measure; price = P(0,T0) E[payoff].
    Returns (price, standard error).
    """
    mean, sd = forward_measure_short_rate(a, sigma, z, expiry)
    rng = np.random.default_rng(seed)
    r = mean + sd * rng.standard_normal(n_samples)
    pays = expiry + np.arange(1, int(round(tenor)) + 1)
    B = (1.0 - np.exp(-a * (pays - expiry))) / a
    lnA = np.log(np.exp(-z * pays) / math.exp(-z * expiry)) + B * z \
        - sigma**2 / (4 * a) * (1 - math.exp(-2 * a * expiry)) * B**2
    bonds = np.exp(lnA[None, :] - np.outer(r, B))
    swap = 1.0 - bonds[:, -1] - strike * bonds.sum(axis=1)
    payoff = notional * np.maximum(swap, 0.0)
    df = math.exp(-z * expiry)
    return df * payoff.mean(), df * payoff.std(ddof=1) / math.sqrt(n_samples)


def im_brute_force(a, sigma, z, fixed_rate, maturity, notional, mpor, confidence, n_samples, seed):
    """Quantile of the MPoR value change of a spot-starting payer swap at t=0.

    r(mpor) is drawn exactly from its conditional law given r(0) = phi(0);
    the swap is fully repriced. The running float coupon was fixed at 0.
    """
    r0 = hw_phi_flat(a, sigma, z, 0.0)
    e = math.exp(-a * mpor)
    x_sd = sigma * math.sqrt((1 - math.exp(-2 * a * mpor)) / (2 * a))
    rng = np.random.default_rng(seed)
    x = x_sd * rng.standard_normal(n_samples)
    r = x + hw_phi_flat(a, sigma, z, mpor)
    assert e > 0
    v0 = swap_value_textbook(a, sigma, z, 0.0, r0, fixed_rate, 0.0, maturity, notional)
    reset_bond = flat_df(z, 1.0)
    dv = np.array([
        swap_value_textbook(a, sigma, z, mpor, ri, fixed_rate, 0.0, maturity, notional,
                            reset_bond=reset_bond)
        for ri in r
    ]) - v0
    return float(np.quantile(dv, confidence)), float(np.quantile(-dv, confidence))


def cva_grid_scan(exposure, im, weights, target, step=1e-3, alpha_max=5.0, extend_to=50.0):
    """Linear-interpolated crossing of CVA(alpha) = target on an alpha grid.

    ``exposure`` = V - VM - IM per node, ``im`` per node, ``weights`` per
    node (LGD * DF * PD / n_paths). Evaluates every node at every grid
    point; the grid is extended while no crossing is found.
    """
    x = np.asarray(exposure, float).ravel()
    m = np.asarray(im, float).ravel()
    w = np.asarray(weights, float).ravel()
    keep = x > 0
    x, m, w = x[keep], m[keep], w[keep]

    def cva(alphas: np.ndarray) -> np.ndarray:
        out = np.empty(alphas.size)
        for i, al in enumerate(alphas):
            out[i] = np.sum(w * np.maximum(x - al * m, 0.0))
        return out

    lo = 0.0
    while lo < extend_to:
        hi = min(lo + alpha_max, extend_to)
        grid = np.round(np.arange(lo, hi + 0.5 * step, step), 12)
        f = cva(grid) - target
        if f[0] <= 0:
            return float(grid[0])
        idx = np.nonzero(f <= 0.0)[0]
        if idx.size:
            j = idx[0]
            a0, a1, f0, f1 = grid[j - 1], grid[j], f[j - 1], f[j]
            return float(a0 + f0 * (a1 - a0) / (f0 - f1))
        lo = hi
    raise RuntimeError("no crossing on the scanned range")


def lag_values_by_hand(values: list[float], lag_steps: int) -> list[float]:
    """VM at step k is the value at step max(k - lag_steps, 0)."""
    return [values[max(k - lag_steps, 0)] for k in range(len(values))]


def normal_quantile(p: float) -> float:
    return float(norm.ppf(p))
