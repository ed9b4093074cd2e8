"""Deterministic market data: discount curve, rating-keyed credit curves, LGD.

Times are year fractions (ACT/365), rates are continuously compounded
decimals. All objects are immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

RATING_ORDER = ("AAA", "AA", "A", "BBB", "BB", "B", "CCC")

# 1-year default probabilities in basis points. AAA and CCC are the anchor
# ratings; the others are overridable desk defaults.
DEFAULT_PD_1Y_BPS = {
    "AAA": 1.0,
    "AA": 3.0,
    "A": 8.0,
    "BBB": 20.0,
    "BB": 90.0,
    "B": 550.0,
    "CCC": 2682.0,
}
DEFAULT_LGD = 0.6
DEFAULT_ZERO_RATE = 0.02
DEFAULT_CURVE_HORIZON = 30.0


class MarketConfigError(ValueError):
    """Raised when a market config cannot be parsed or violates an invariant."""


@dataclass(frozen=True)
class DiscountCurve:
    """Zero curve with linear interpolation in the zero rate.

    Before the first pillar the zero rate is held flat; evaluation beyond
    the last pillar is an error.
    """

    times: tuple[float, ...]
    zero_rates: tuple[float, ...]

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        z = np.asarray(self.zero_rates, dtype=float)
        if t.ndim != 1 or t.size == 0 or t.shape != z.shape:
            raise MarketConfigError("discount_curve: need matching, non-empty pillar lists")
        if t[0] < 0.0:
            raise MarketConfigError("discount_curve.t: first pillar must be >= 0")
        if np.any(np.diff(t) <= 0.0):
            raise MarketConfigError("discount_curve.t: pillar times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(z))):
            raise MarketConfigError("discount_curve: non-finite pillar")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "zero_rates", tuple(float(x) for x in z))

    @classmethod
    def flat(cls, rate: float, horizon: float = DEFAULT_CURVE_HORIZON) -> "DiscountCurve":
        return cls((0.0, float(horizon)), (float(rate), float(rate)))

    @property
    def last_time(self) -> float:
        return self.times[-1]

    def _check(self, t: np.ndarray) -> None:
        if np.any(t < 0.0):
            raise ValueError("discount curve evaluated at negative time")
        if np.any(t > self.last_time * (1.0 + 1e-12)):
            raise ValueError(f"discount curve evaluated beyond last pillar {self.last_time}")

    def zero_rate(self, t):
        """Interpolated zero rate z(t); scalar in, scalar out."""
        tt = np.asarray(t, dtype=float)
        self._check(tt)
        z = np.interp(tt, self.times, self.zero_rates)
        return float(z) if z.ndim == 0 else z

    def discount_factor(self, t):
        """DF(t) = exp(-z(t) t)."""
        tt = np.asarray(t, dtype=float)
        df = np.exp(-np.asarray(self.zero_rate(tt)) * tt)
        return float(df) if df.ndim == 0 else df

    def forward_rate(self, t):
        """Instantaneous forward f(0,t) = z(t) + t z'(t).

        The slope is the right derivative, so at a pillar the forward of the
        following segment is returned.
        """
        tt = np.asarray(t, dtype=float)
        self._check(tt)
        times = np.asarray(self.times)
        rates = np.asarray(self.zero_rates)
        if times.size == 1:
            slope = np.zeros_like(tt)
        else:
            seg_slope = np.diff(rates) / np.diff(times)
            seg_slope = np.concatenate(([0.0], seg_slope, [0.0]))
            idx = np.searchsorted(times, tt, side="right")
            slope = seg_slope[idx]
        f = np.interp(tt, times, rates) + tt * slope
        return float(f) if f.ndim == 0 else f


def discount_factor(curve: DiscountCurve, t):
    return curve.discount_factor(t)


@dataclass(frozen=True)
class CreditCurve:
    """Flat-hazard default model for one rating."""

    rating: str
    hazard: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.hazard) or self.hazard < 0.0:
            raise MarketConfigError(f"ratings[{self.rating}].hazard must be >= 0, got {self.hazard}")

    @classmethod
    def from_pd_1y(cls, rating: str, pd_1y: float) -> "CreditCurve":
        """Calibrate the flat hazard so that 1 - S(1) equals ``pd_1y``."""
        if not 0.0 <= pd_1y < 1.0:
            raise MarketConfigError(f"ratings[{rating}].pd_1y_bps must lie in [0, 10000)")
        return cls(rating, -math.log1p(-pd_1y))

    @property
    def pd_1y(self) -> float:
        return -math.expm1(-self.hazard)

    def survival(self, t):
        return np.exp(-self.hazard * np.asarray(t, dtype=float))

    def marginal_default_prob(self, t1, t2):
        """Unconditional probability of default in (t1, t2]: S(t1) - S(t2)."""
        a = np.asarray(t1, dtype=float)
        b = np.asarray(t2, dtype=float)
        if np.any(a < 0.0) or np.any(b <= a):
            raise ValueError("marginal default probability needs 0 <= t1 < t2")
        # exp(-l a) - exp(-l b) written to keep precision for tiny hazards
        p = np.exp(-self.hazard * a) * -np.expm1(-self.hazard * (b - a))
        return float(p) if p.ndim == 0 else p

    def conditional_default_prob(self, t1, t2):
        """Probability of default in (t1, t2] given survival to t1: 1 - S(t2)/S(t1)."""
        a = np.asarray(t1, dtype=float)
        b = np.asarray(t2, dtype=float)
        if np.any(a < 0.0) or np.any(b <= a):
            raise ValueError("conditional default probability needs 0 <= t1 < t2")
        p = -np.expm1(-self.hazard * (b - a))
        return float(p) if p.ndim == 0 else p


def marginal_default_prob(curve: CreditCurve, t1, t2):
    return curve.marginal_default_prob(t1, t2)


@dataclass(frozen=True)
class LgdAssumption:
    lgd: float = DEFAULT_LGD

    def __post_init__(self) -> None:
        if not (0.0 <= self.lgd <= 1.0):
            raise MarketConfigError(f"lgd must lie in [0, 1], got {self.lgd}")


@dataclass(frozen=True)
class RatingTable:
    """Ordered rating -> CreditCurve map, best rating first."""

    curves: tuple[CreditCurve, ...]
    reference_rating: str = "AAA"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        labels = [c.rating for c in self.curves]
        if len(set(labels)) != len(labels):
            raise MarketConfigError("ratings: duplicate labels")
        if self.reference_rating not in labels:
            raise MarketConfigError(f"reference_rating {self.reference_rating!r} missing from ratings")
        known = [c for c in self.curves if c.rating in RATING_ORDER]
        known.sort(key=lambda c: RATING_ORDER.index(c.rating))
        for better, worse in zip(known, known[1:]):
            if worse.hazard < better.hazard:
                raise MarketConfigError(
                    f"ratings: hazard of {worse.rating} below that of {better.rating}"
                )
        object.__setattr__(self, "_index", {c.rating: c for c in self.curves})

    @classmethod
    def from_pd_bps(cls, pd_bps: Mapping[str, float], reference_rating: str = "AAA") -> "RatingTable":
        curves = tuple(CreditCurve.from_pd_1y(k, v / 1e4) for k, v in pd_bps.items())
        return cls(curves, reference_rating)

    @classmethod
    def default(cls) -> "RatingTable":
        return cls.from_pd_bps(DEFAULT_PD_1Y_BPS)

    @property
    def labels(self) -> list[str]:
        return [c.rating for c in self.curves]

    @property
    def reference(self) -> CreditCurve:
        return self._index[self.reference_rating]

    def __getitem__(self, rating: str) -> CreditCurve:
        try:
            return self._index[rating]
        except KeyError:
            raise KeyError(f"unknown rating {rating!r}") from None

    def __contains__(self, rating: object) -> bool:
        return rating in self._index


@dataclass(frozen=True)
class MarketData:
    curve: DiscountCurve
    ratings: RatingTable
    lgd: LgdAssumption

    def __iter__(self):
        return iter((self.curve, self.ratings, self.lgd))


def default_market_dict() -> dict[str, Any]:
    return {
        "discount_curve": [
            {"t": 0.0, "zero_rate": DEFAULT_ZERO_RATE},
            {"t": DEFAULT_CURVE_HORIZON, "zero_rate": DEFAULT_ZERO_RATE},
        ],
        "ratings": [{"label": k, "pd_1y_bps": v} for k, v in DEFAULT_PD_1Y_BPS.items()],
        "reference_rating": "AAA",
        "lgd": DEFAULT_LGD,
    }


def _require(d: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in d:
        raise MarketConfigError(f"{where}: missing field {key!r}")
    return d[key]


def market_from_dict(d: Mapping[str, Any]) -> MarketData:
    """Build validated market objects from the JSON-compatible mapping."""
    if not isinstance(d, Mapping):
        raise MarketConfigError("market config must be a mapping")
    pillars = _require(d, "discount_curve", "market")
    try:
        times = [float(_require(p, "t", "discount_curve[]")) for p in pillars]
        rates = [float(_require(p, "zero_rate", "discount_curve[]")) for p in pillars]
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MarketConfigError):
            raise
        raise MarketConfigError(f"discount_curve: {exc}") from None
    curve = DiscountCurve(tuple(times), tuple(rates))

    curves = []
    for entry in _require(d, "ratings", "market"):
        label = str(_require(entry, "label", "ratings[]"))
        if "hazard" in entry:
            curves.append(CreditCurve(label, float(entry["hazard"])))
        else:
            bps = float(_require(entry, "pd_1y_bps", f"ratings[{label}]"))
            curves.append(CreditCurve.from_pd_1y(label, bps / 1e4))
    ratings = RatingTable(tuple(curves), str(_require(d, "reference_rating", "market")))
    lgd = LgdAssumption(float(d.get("lgd", DEFAULT_LGD)))
    return MarketData(curve, ratings, lgd)


def market_to_dict(market: MarketData) -> dict[str, Any]:
    return {
        "discount_curve": [
            {"t": t, "zero_rate": z} for t, z in zip(market.curve.times, market.curve.zero_rates)
        ],
        "ratings": [{"label": c.rating, "hazard": c.hazard} for c in market.ratings.curves],
        "reference_rating": market.ratings.reference_rating,
        "lgd": market.lgd.lgd,
    }


def load_market_config(path: str | Path) -> MarketData:
    """Read a JSON market config; returns ``(curve, ratings, lgd)`` (unpackable)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MarketConfigError(f"{path}: {exc}") from None
    return market_from_dict(raw)


def write_market_config(market: MarketData, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(market_to_dict(market), indent=2))
    return path


__all__ = [
    "RATING_ORDER",
    "DEFAULT_PD_1Y_BPS",
    "MarketConfigError",
    "DiscountCurve",
    "CreditCurve",
    "LgdAssumption",
    "RatingTable",
    "MarketData",
    "discount_factor",
    "marginal_default_prob",
    "default_market_dict",
    "market_from_dict",
    "market_to_dict",
    "load_market_config",
    "write_market_config",
]
