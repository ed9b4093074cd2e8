"""One-factor Hull-White short rate: closed-form bonds and exact path simulation.

The short rate is split as r(t) = x(t) + phi(t) where x is a zero-mean
Ornstein-Uhlenbeck process and phi fits the initial discount curve. Paths
are sampled with the exact Gaussian transition of (x, integral of x), so no
time-discretization bias enters anything downstream.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .market import DiscountCurve

DEFAULT_A = 0.05
DEFAULT_SIGMA = 0.01
DEFAULT_MPOR_DAYS = 10
DAYS_PER_YEAR = 365.0
_TIME_DECIMALS = 12


@dataclass(frozen=True)
class HullWhiteParams:
    a: float
    sigma: float
    curve: DiscountCurve

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError(f"mean reversion a must be > 0, got {self.a}")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"volatility sigma must be > 0, got {self.sigma}")

    def B(self, t, T):
        """B(t,T) = (1 - exp(-a (T-t))) / a."""
        return -np.expm1(-self.a * (np.asarray(T, float) - np.asarray(t, float))) / self.a

    def phi(self, t):
        """Deterministic shift so that r = x + phi reprices the curve."""
        t = np.asarray(t, float)
        return self.curve.forward_rate(t) + 0.5 * (self.sigma / self.a * np.expm1(-self.a * t)) ** 2

    def initial_short_rate(self) -> float:
        return float(self.phi(0.0))

    def x_variance(self, dt):
        """Var[x(s+dt) | x(s)] = sigma^2 (1 - exp(-2 a dt)) / (2a)."""
        dt = np.asarray(dt, float)
        return self.sigma**2 * -np.expm1(-2.0 * self.a * dt) / (2.0 * self.a)

    def short_rate_stdev(self, dt):
        """Conditional standard deviation of the short rate over a horizon."""
        return np.sqrt(self.x_variance(dt))

    def integrated_shift(self, t):
        """Integral of phi over [0, t]."""
        t = np.asarray(t, float)
        a, s = self.a, self.sigma
        bracket = t + 2.0 * np.expm1(-a * t) / a - np.expm1(-2.0 * a * t) / (2.0 * a)
        return -np.log(self.curve.discount_factor(t)) + s**2 / (2.0 * a**2) * bracket


def zero_coupon_bond(params: HullWhiteParams, r, t: float, T):
    """Affine bond price P(t,T) = A(t,T) exp(-B(t,T) r) at short-rate state ``r``."""
    t = float(t)
    T_arr = np.asarray(T, float)
    if np.any(T_arr < t - 1e-14):
        raise ValueError(f"bond maturity {T} precedes valuation time {t}")
    curve = params.curve
    B = params.B(t, T_arr)
    log_a = (
        np.log(curve.discount_factor(T_arr) / curve.discount_factor(t))
        + B * curve.forward_rate(t)
        - params.sigma**2 / (4.0 * params.a) * -np.expm1(-2.0 * params.a * t) * B**2
    )
    return np.exp(log_a - B * np.asarray(r, float))


@dataclass(frozen=True)
class TimeGrid:
    """Exposure dates t_0 = 0 < ... < t_N and the margin period of risk."""

    times: tuple[float, ...]
    mpor: float = DEFAULT_MPOR_DAYS / DAYS_PER_YEAR

    def __post_init__(self) -> None:
        t = np.round(np.asarray(self.times, float), _TIME_DECIMALS)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time grid needs at least two dates")
        if t[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("time grid must be strictly increasing")
        if not self.mpor > 0.0:
            raise ValueError("margin period of risk must be > 0")
        object.__setattr__(self, "times", tuple(float(x) for x in t))

    @classmethod
    def monthly(cls, horizon: float, mpor: float = DEFAULT_MPOR_DAYS / DAYS_PER_YEAR) -> "TimeGrid":
        n = int(math.floor(horizon * 12 + 1e-9))
        times = [k / 12.0 for k in range(n + 1)]
        if horizon - times[-1] > 1e-9:
            times.append(float(horizon))
        return cls(tuple(times), mpor)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.times)

    @property
    def lag_times(self) -> np.ndarray:
        """Last margin date before each exposure date, clamped at 0."""
        return np.round(np.maximum(self.array - self.mpor, 0.0), _TIME_DECIMALS)

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class PathCube:
    """Simulated short-rate states on the union of exposure, lag and fixing dates.

    ``rates`` and ``integrated`` have shape (n_paths, len(sim_times));
    ``integrated`` holds the pathwise integral of r from 0.
    """

    params: HullWhiteParams
    grid: TimeGrid
    seed: int
    sim_times: np.ndarray
    rates: np.ndarray
    integrated: np.ndarray
    _lookup: dict = field(repr=False, compare=False)

    @property
    def n_paths(self) -> int:
        return self.rates.shape[0]

    def index_of(self, t: float) -> int:
        key = round(float(t), _TIME_DECIMALS)
        try:
            return self._lookup[key]
        except KeyError:
            raise KeyError(f"time {t} was not simulated") from None

    def has_time(self, t: float) -> bool:
        return round(float(t), _TIME_DECIMALS) in self._lookup

    def rate_at(self, t: float) -> np.ndarray:
        return self.rates[:, self.index_of(t)]

    def deflator_at(self, t: float) -> np.ndarray:
        """Money-market deflator exp(-integral of r over [0, t])."""
        return np.exp(-self.integrated[:, self.index_of(t)])

    @property
    def grid_index(self) -> np.ndarray:
        return np.array([self.index_of(t) for t in self.grid.times])

    @property
    def lag_index(self) -> np.ndarray:
        return np.array([self.index_of(t) for t in self.grid.lag_times])

    @property
    def short_rate(self) -> np.ndarray:
        return self.rates[:, self.grid_index]

    @property
    def lag_short_rate(self) -> np.ndarray:
        return self.rates[:, self.lag_index]


def path_normals(seed: int, path: int, n: int) -> np.ndarray:
    """Standard normals for one path from a Philox stream keyed by (seed, path)."""
    bitgen = np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, 0, int(path)])
    return np.random.Generator(bitgen).standard_normal((n, 2))


def _draw_normals(seed: int, n_paths: int, n_steps: int, workers: int) -> np.ndarray:
    out = np.empty((n_paths, n_steps, 2))

    def fill(chunk: range) -> None:
        for p in chunk:
            out[p] = path_normals(seed, p, n_steps)

    if workers <= 1 or n_paths < 2:
        fill(range(n_paths))
    else:
        bounds = np.linspace(0, n_paths, workers + 1).astype(int)
        chunks = [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, chunks))
    return out


def simulation_times(grid: TimeGrid, extra_times: Iterable[float] = ()) -> np.ndarray:
    extra = [t for t in extra_times if 0.0 <= t <= grid.horizon]
    all_t = np.concatenate([grid.array, grid.lag_times, np.asarray(extra, float)])
    return np.unique(np.round(all_t, _TIME_DECIMALS))


def simulate_paths(
    params: HullWhiteParams,
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    *,
    extra_times: Iterable[float] = (),
    workers: int = 1,
) -> PathCube:
    """Sample Hull-White short-rate paths exactly on the grid (plus lag dates).

    Each path draws from its own counter-based stream, so the result is the
    same for any ``workers`` count.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    times = simulation_times(grid, extra_times)
    dt = np.diff(times)
    a, s = params.a, params.sigma
    e1 = np.exp(-a * dt)
    var_x = params.x_variance(dt)
    mean_i = -np.expm1(-a * dt) / a
    var_i = s**2 / a**2 * (dt + 2.0 * np.expm1(-a * dt) / a - np.expm1(-2.0 * a * dt) / (2.0 * a))
    cov = s**2 / (2.0 * a**2) * np.expm1(-a * dt) ** 2
    sd_x = np.sqrt(var_x)
    load_i = np.divide(cov, sd_x, out=np.zeros_like(cov), where=sd_x > 0)
    resid_i = np.sqrt(np.maximum(var_i - load_i**2, 0.0))

    z = _draw_normals(seed, n_paths, dt.size, max(1, int(workers)))
    x = np.zeros((n_paths, times.size))
    ix = np.zeros((n_paths, times.size))
    for j in range(dt.size):
        z1 = z[:, j, 0]
        z2 = z[:, j, 1]
        x[:, j + 1] = x[:, j] * e1[j] + sd_x[j] * z1
        ix[:, j + 1] = ix[:, j] + x[:, j] * mean_i[j] + load_i[j] * z1 + resid_i[j] * z2

    rates = x + params.phi(times)[None, :]
    integrated = ix + params.integrated_shift(times)[None, :]
    lookup = {round(float(t), _TIME_DECIMALS): i for i, t in enumerate(times)}
    return PathCube(params, grid, int(seed), times, rates, integrated, lookup)


def default_workers() -> int:
    return os.cpu_count() or 1


__all__ = [
    "HullWhiteParams",
    "TimeGrid",
    "PathCube",
    "zero_coupon_bond",
    "simulate_paths",
    "simulation_times",
    "path_normals",
]
