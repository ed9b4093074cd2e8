"""Closed-form Hull-White valuation of swaps and cash-settled European swaptions.

Single-curve conventions: unit accrual fractions (1/frequency), float legs
valued by bond replication. The swaption uses Jamshidian's decomposition
into zero-coupon bond options.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .rates import HullWhiteParams, PathCube, zero_coupon_bond

DEFAULT_NOTIONAL = 1_000_000.0
UNDERLYING_TENOR = 5.0
FD_BUMP = 1e-4
_EPS_T = 1e-12


def _schedule(start: float, end: float, freq: int) -> np.ndarray:
    n = (end - start) * freq
    if abs(n - round(n)) > 1e-9 or round(n) < 1:
        raise ValueError(f"[{start}, {end}] is not a whole number of periods at frequency {freq}")
    n = int(round(n))
    return start + np.arange(1, n + 1) / freq


@dataclass(frozen=True)
class SwapSpec:
    notional: float
    fixed_rate: float
    pay_fixed: bool
    start: float
    maturity: float
    fixed_freq: int = 1
    float_freq: int = 1

    def __post_init__(self) -> None:
        if not self.maturity > self.start >= 0.0:
            raise ValueError("swap needs maturity > start >= 0")
        if not self.notional > 0.0:
            raise ValueError("swap notional must be > 0")
        if self.fixed_freq < 1 or self.float_freq < 1:
            raise ValueError("payment frequencies must be >= 1")
        # validates both schedules eagerly
        _schedule(self.start, self.maturity, self.fixed_freq)
        _schedule(self.start, self.maturity, self.float_freq)

    @property
    def fixed_dates(self) -> np.ndarray:
        return _schedule(self.start, self.maturity, self.fixed_freq)

    @property
    def float_dates(self) -> np.ndarray:
        return _schedule(self.start, self.maturity, self.float_freq)

    @property
    def reset_dates(self) -> np.ndarray:
        d = self.float_dates
        return np.concatenate(([self.start], d[:-1]))

    @property
    def final_time(self) -> float:
        return self.maturity

    def with_rate(self, rate: float) -> "SwapSpec":
        return replace(self, fixed_rate=float(rate))


@dataclass(frozen=True)
class SwaptionSpec:
    """European option to enter ``underlying`` at ``expiry``; payer if the underlying pays fixed."""

    expiry: float
    underlying: SwapSpec
    cash_settled: bool = True

    def __post_init__(self) -> None:
        if not self.expiry > 0.0:
            raise ValueError("swaption expiry must be > 0")
        if abs(self.underlying.start - self.expiry) > _EPS_T:
            raise ValueError("swaption underlying must start at expiry")

    @property
    def strike(self) -> float:
        return self.underlying.fixed_rate

    @property
    def payer(self) -> bool:
        return self.underlying.pay_fixed

    @property
    def notional(self) -> float:
        return self.underlying.notional

    @property
    def final_time(self) -> float:
        return self.expiry


Trade = Union[SwapSpec, SwaptionSpec]


@dataclass(frozen=True)
class NettingSet:
    trade: Trade
    label: str = ""

    @property
    def notional(self) -> float:
        return self.trade.notional

    @property
    def final_time(self) -> float:
        return self.trade.final_time

    def fixing_times(self) -> list[float]:
        """Simulation dates whose state the valuation needs besides the exposure grid."""
        if isinstance(self.trade, SwapSpec):
            return [float(t) for t in self.trade.reset_dates]
        return []


def annuity(params: HullWhiteParams, spec: SwapSpec, r, t: float):
    dates = spec.fixed_dates
    live = dates[dates > t + _EPS_T]
    if live.size == 0:
        return np.zeros_like(np.asarray(r, float))
    p = zero_coupon_bond(params, np.asarray(r, float)[..., None], t, live)
    return p.sum(axis=-1) / spec.fixed_freq


def par_rate(params: HullWhiteParams, spec: SwapSpec) -> float:
    """Fixed rate that makes the swap worth zero today."""
    df = params.curve.discount_factor
    ann = float(np.sum(df(spec.fixed_dates))) / spec.fixed_freq
    if ann <= 0.0:
        raise ValueError("degenerate annuity")
    return (df(spec.start) - df(spec.maturity)) / ann


def _swap_value_delta(params, spec: SwapSpec, r, t: float, reset_rate=None):
    """Payer-side value and dV/dr of the unpaid flows at (t, r)."""
    r = np.asarray(r, float)
    if t >= spec.maturity - _EPS_T:
        z = np.zeros_like(r)
        return z, z
    N = spec.notional
    fixed = spec.fixed_dates
    live = fixed[fixed > t + _EPS_T]
    p_fix = zero_coupon_bond(params, r[..., None], t, live)
    b_fix = params.B(t, live)
    fixed_v = spec.fixed_rate / spec.fixed_freq * p_fix.sum(axis=-1)
    fixed_d = -spec.fixed_rate / spec.fixed_freq * (p_fix * b_fix).sum(axis=-1)

    p_end = zero_coupon_bond(params, r, t, spec.maturity)
    b_end = params.B(t, spec.maturity)
    if t < spec.start - _EPS_T:
        p_start = zero_coupon_bond(params, r, t, spec.start)
        float_v = p_start - p_end
        float_d = -params.B(t, spec.start) * p_start + b_end * p_end
    else:
        fl = spec.float_dates
        i = int(np.searchsorted(fl, t + _EPS_T, side="right"))
        pay = fl[i]
        reset = spec.start if i == 0 else fl[i - 1]
        p_pay = zero_coupon_bond(params, r, t, pay)
        if abs(t - reset) <= _EPS_T:
            # fixing at t: the coupon is known from here on, only its discounting moves
            coupon_v = np.ones_like(r)
            coupon_d = -params.B(t, pay) * coupon_v
        else:
            if reset_rate is None:
                raise ValueError(f"valuation at t={t} needs the short rate at reset date {reset}")
            p_reset = zero_coupon_bond(params, np.asarray(reset_rate, float), reset, pay)
            coupon_v = p_pay / p_reset
            coupon_d = -params.B(t, pay) * coupon_v
        float_v = coupon_v - p_end
        float_d = coupon_d + b_end * p_end
    return N * (float_v - fixed_v), N * (float_d - fixed_d)


def _sign(spec: SwapSpec) -> float:
    return 1.0 if spec.pay_fixed else -1.0


def value_swap(params: HullWhiteParams, spec: SwapSpec, r, t: float, reset_rate=None):
    """Swap value at state ``r`` and time ``t``; zero at and after maturity.

    ``reset_rate`` is the short rate observed at the current float period's
    reset date, needed only strictly inside an accrual period.
    """
    v, _ = _swap_value_delta(params, spec, r, t, reset_rate)
    return _sign(spec) * v


def swap_delta(params: HullWhiteParams, spec: SwapSpec, r, t: float, reset_rate=None):
    """Closed-form dV/dr of :func:`value_swap`."""
    _, d = _swap_value_delta(params, spec, r, t, reset_rate)
    return _sign(spec) * d


@lru_cache(maxsize=256)
def _jamshidian_strikes(params: HullWhiteParams, spec: SwaptionSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    und = spec.underlying
    dates = und.fixed_dates
    coupons = np.full(dates.size, und.fixed_rate / und.fixed_freq)
    coupons[-1] += 1.0
    T0 = spec.expiry

    def excess(r: float) -> float:
        return float(np.dot(coupons, zero_coupon_bond(params, r, T0, dates))) - 1.0

    lo, hi = -0.5, 0.5
    while excess(lo) < 0.0:
        lo *= 2.0
    while excess(hi) > 0.0:
        hi *= 2.0
    r_star = brentq(excess, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    strikes = zero_coupon_bond(params, r_star, T0, dates)
    return dates, coupons, np.asarray(strikes)


def zero_bond_option(params: HullWhiteParams, r, t: float, T: float, S: float, X: float, call: bool):
    """European option at time t, expiring T, on the bond maturing at S, strike X."""
    r = np.asarray(r, float)
    p_T = zero_coupon_bond(params, r, t, T)
    p_S = zero_coupon_bond(params, r, t, S)
    sig_p = float(params.short_rate_stdev(T - t) * params.B(T, S))
    if sig_p < 1e-14:
        fwd = p_S - X * p_T
        return np.maximum(fwd, 0.0) if call else np.maximum(-fwd, 0.0)
    h = np.log(p_S / (p_T * X)) / sig_p + 0.5 * sig_p
    if call:
        return p_S * norm.cdf(h) - X * p_T * norm.cdf(h - sig_p)
    return X * p_T * norm.cdf(sig_p - h) - p_S * norm.cdf(-h)


def forward_swap_value(params: HullWhiteParams, spec: SwaptionSpec, r, t: float):
    """Value at t of the forward-starting underlying swap, on the swaption's side."""
    return value_swap(params, spec.underlying, r, t)


def value_swaption(params: HullWhiteParams, spec: SwaptionSpec, r, t: float):
    """Long European swaption value; the cash-settled intrinsic payoff at expiry."""
    if t > spec.expiry + _EPS_T:
        raise ValueError(f"swaption expired at {spec.expiry}; got t={t}")
    r = np.asarray(r, float)
    N = spec.notional
    if t >= spec.expiry - _EPS_T:
        return np.maximum(value_swap(params, spec.underlying, r, spec.expiry), 0.0)
    dates, coupons, strikes = _jamshidian_strikes(params, spec)
    # payer swaption = put on the coupon bond struck at par
    total = np.zeros_like(r)
    for S, c, X in zip(dates, coupons, strikes):
        total = total + c * zero_bond_option(params, r, t, spec.expiry, S, X, call=not spec.payer)
    return N * total


def swaption_delta(params: HullWhiteParams, spec: SwaptionSpec, r, t: float, bump: float = FD_BUMP):
    """Central finite-difference dV/dr."""
    r = np.asarray(r, float)
    up = value_swaption(params, spec, r + bump, t)
    dn = value_swaption(params, spec, r - bump, t)
    return (up - dn) / (2.0 * bump)


def value_trade(params: HullWhiteParams, trade: Trade, r, t: float, reset_rate=None):
    r = np.asarray(r, float)
    if t >= trade.final_time - _EPS_T and isinstance(trade, SwapSpec):
        return np.zeros_like(r)
    if t > trade.final_time + _EPS_T:
        return np.zeros_like(r)
    if isinstance(trade, SwapSpec):
        return value_swap(params, trade, r, t, reset_rate)
    return value_swaption(params, trade, r, t)


def trade_delta(params: HullWhiteParams, trade: Trade, r, t: float, reset_rate=None):
    r = np.asarray(r, float)
    if t >= trade.final_time - _EPS_T:
        return np.zeros_like(r)
    if isinstance(trade, SwapSpec):
        return swap_delta(params, trade, r, t, reset_rate)
    return swaption_delta(params, trade, r, t)


def make_atm_swap(params: HullWhiteParams, maturity: float, notional: float = DEFAULT_NOTIONAL,
                  pay_fixed: bool = True, start: float = 0.0, freq: int = 1) -> SwapSpec:
    spec = SwapSpec(notional, 0.0, pay_fixed, start, maturity, freq, freq)
    return spec.with_rate(par_rate(params, spec))


def make_swaption(params: HullWhiteParams, expiry: float, tenor: float = UNDERLYING_TENOR,
                  notional: float = DEFAULT_NOTIONAL, payer: bool = True,
                  strike: float | None = None, freq: int = 1) -> SwaptionSpec:
    """Swaption on a ``tenor``-year swap; ATM (forward par) strike when ``strike`` is None."""
    und = SwapSpec(notional, 0.0, payer, expiry, expiry + tenor, freq, freq)
    k = par_rate(params, und) if strike is None else strike
    return SwaptionSpec(expiry, und.with_rate(k))


@dataclass(frozen=True)
class ValueCube:
    """Netting-set values on the exposure grid and at the lagged margin dates.

    ``values[p, k]`` is the value at ``times[k]``; ``lag_values[p, k]`` the
    value at ``lag_times[k]`` (``None`` for cubes built from raw arrays).
    """

    times: np.ndarray
    values: np.ndarray
    mpor: float | None = None
    lag_times: np.ndarray | None = None
    lag_values: np.ndarray | None = None
    notional: float = DEFAULT_NOTIONAL
    settled_flows: np.ndarray | None = None

    def __post_init__(self) -> None:
        values = np.atleast_2d(np.asarray(self.values, float))
        times = np.asarray(self.times, float)
        if values.shape[1] != times.size:
            raise ValueError("value cube columns must match the time grid")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)
        if self.lag_values is not None and np.shape(self.lag_values) != values.shape:
            raise ValueError("lagged values must match the value cube shape")
        if self.settled_flows is not None and np.shape(self.settled_flows) != values.shape:
            raise ValueError("settled flows must match the value cube shape")

    @property
    def exposure_values(self) -> np.ndarray:
        """Value plus trade flows settled inside each node's MPoR window."""
        if self.settled_flows is None:
            return self.values
        return self.values + self.settled_flows

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]


def _reset_state(paths: PathCube, trade: Trade, t: float):
    if not isinstance(trade, SwapSpec) or t <= trade.start + _EPS_T or t >= trade.maturity - _EPS_T:
        return None
    fl = trade.float_dates
    i = int(np.searchsorted(fl, t + _EPS_T, side="right"))
    reset = trade.start if i == 0 else fl[i - 1]
    return paths.rate_at(reset)


def value_column(params: HullWhiteParams, trade: Trade, paths: PathCube, t: float) -> np.ndarray:
    """Trade value across paths at simulated date ``t``."""
    if t > trade.final_time + _EPS_T:
        return np.zeros(paths.n_paths)
    return value_trade(params, trade, paths.rate_at(t), t, _reset_state(paths, trade, t))


def delta_column(params: HullWhiteParams, trade: Trade, paths: PathCube, t: float) -> np.ndarray:
    if t >= trade.final_time - _EPS_T:
        return np.zeros(paths.n_paths)
    return trade_delta(params, trade, paths.rate_at(t), t, _reset_state(paths, trade, t))


def settled_flows(params: HullWhiteParams, trade: Trade, paths: PathCube, lo: float, hi: float) -> np.ndarray:
    """Net trade cashflows with payment dates in (lo, hi], on the trade's side."""
    out = np.zeros(paths.n_paths)
    if not isinstance(trade, SwapSpec) or hi <= lo:
        return out
    N = trade.notional
    fixed = trade.fixed_dates
    n_fixed = np.count_nonzero((fixed > lo + _EPS_T) & (fixed <= hi + _EPS_T))
    out -= n_fixed * N * trade.fixed_rate / trade.fixed_freq
    for reset, pay in zip(trade.reset_dates, trade.float_dates):
        if lo + _EPS_T < pay <= hi + _EPS_T:
            out += N * (1.0 / zero_coupon_bond(params, paths.rate_at(reset), reset, pay) - 1.0)
    return _sign(trade) * out


def build_value_cube(params: HullWhiteParams, netting_set: NettingSet, paths: PathCube) -> ValueCube:
    """Value the netting set at every (path, exposure date) and lagged margin date."""
    trade = netting_set.trade
    grid = paths.grid
    cache: dict[float, np.ndarray] = {}

    def col(t: float) -> np.ndarray:
        if t not in cache:
            cache[t] = value_column(params, trade, paths, t)
        return cache[t]

    values = np.column_stack([col(t) for t in grid.times])
    lag_times = grid.lag_times
    lag_values = np.column_stack([col(float(t)) for t in lag_times])
    flows = np.column_stack(
        [settled_flows(params, trade, paths, float(lo), hi) for lo, hi in zip(lag_times, grid.times)]
    )
    return ValueCube(grid.array, values, grid.mpor, lag_times, lag_values, netting_set.notional, flows)


__all__ = [
    "SwapSpec",
    "SwaptionSpec",
    "NettingSet",
    "ValueCube",
    "par_rate",
    "annuity",
    "value_swap",
    "swap_delta",
    "value_swaption",
    "swaption_delta",
    "zero_bond_option",
    "forward_swap_value",
    "value_trade",
    "trade_delta",
    "make_atm_swap",
    "make_swaption",
    "build_value_cube",
    "settled_flows",
    "value_column",
    "delta_column",
]
