"""Run configuration: JSON schema, defaults and validation."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .cva import DEFAULT_PD_WEIGHTING, PD_WEIGHTINGS
from .instruments import DEFAULT_NOTIONAL, UNDERLYING_TENOR
from .margin import DEFAULT_CONFIDENCE
from .market import MarketConfigError, MarketData, default_market_dict, load_market_config, market_from_dict
from .rates import DAYS_PER_YEAR, DEFAULT_A, DEFAULT_MPOR_DAYS, DEFAULT_SIGMA

DEFAULT_PATHS = 10_000
DEFAULT_SEED = 20170601
MIN_PATHS = 100
REPORT_FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TradeConfig:
    type: str
    notional: float = DEFAULT_NOTIONAL
    maturity_years: float | None = None
    pay_fixed: bool = True
    expiry_years: float | None = None
    underlying_tenor_years: float = UNDERLYING_TENOR
    strike: float | str = "atm"
    frequency: int = 1
    label: str = ""

    def __post_init__(self) -> None:
        if self.type not in ("swap", "swaption"):
            raise ConfigError(f"trade.type must be 'swap' or 'swaption', got {self.type!r}")
        if self.type == "swap" and not (self.maturity_years and self.maturity_years > 0):
            raise ConfigError("swap trade needs maturity_years > 0")
        if self.type == "swaption" and not (self.expiry_years and self.expiry_years > 0):
            raise ConfigError("swaption trade needs expiry_years > 0")
        if not self.notional > 0:
            raise ConfigError("trade.notional must be > 0")
        if isinstance(self.strike, str) and self.strike != "atm":
            raise ConfigError("trade.strike must be 'atm' or a number")
        if not self.label:
            if self.type == "swap":
                name = f"swap_{self.maturity_years:g}y"
            else:
                name = f"swaption_{self.expiry_years:g}y_{self.underlying_tenor_years:g}y"
            object.__setattr__(self, "label", name)


def default_trades() -> list[dict[str, Any]]:
    swaps = [{"type": "swap", "maturity_years": m} for m in (3, 5, 7, 10)]
    swaptions = [{"type": "swaption", "expiry_years": e, "underlying_tenor_years": 5} for e in (3, 5)]
    return swaps + swaptions


def default_config_dict() -> dict[str, Any]:
    return {
        "market": default_market_dict(),
        "model": {"a": DEFAULT_A, "sigma": DEFAULT_SIGMA},
        "simulation": {"n_paths": DEFAULT_PATHS, "seed": DEFAULT_SEED, "grid": "monthly", "workers": 1},
        "mpor_days": DEFAULT_MPOR_DAYS,
        "margin": {"confidence": DEFAULT_CONFIDENCE, "mpor_days": DEFAULT_MPOR_DAYS, "vm_lag": "mpor"},
        "credit": {"pd_weighting": DEFAULT_PD_WEIGHTING},
        "solver": {"tol": None, "max_iter": 100},
        "trades": default_trades(),
        "ratings": None,
        "output": {"dir": "simim_out", "formats": ["csv", "json"]},
    }


@dataclass(frozen=True)
class RunConfig:
    market: MarketData
    a: float = DEFAULT_A
    sigma: float = DEFAULT_SIGMA
    n_paths: int = DEFAULT_PATHS
    seed: int = DEFAULT_SEED
    grid: str | tuple[float, ...] = "monthly"
    workers: int = 1
    confidence: float = DEFAULT_CONFIDENCE
    mpor_days: float = DEFAULT_MPOR_DAYS
    pd_weighting: str = DEFAULT_PD_WEIGHTING
    tol: float | None = None
    max_iter: int = 100
    trades: tuple[TradeConfig, ...] = ()
    ratings: tuple[str, ...] = ()
    output_dir: str = "simim_out"
    formats: tuple[str, ...] = REPORT_FORMATS
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.n_paths < MIN_PATHS:
            raise ConfigError(f"simulation.n_paths must be >= {MIN_PATHS}")
        if not self.trades:
            raise ConfigError("trades must be nonempty")
        labels = [t.label for t in self.trades]
        if len(set(labels)) != len(labels):
            raise ConfigError("trade labels must be unique")
        for r in self.ratings:
            if r not in self.market.ratings:
                raise ConfigError(f"rating {r!r} not in the rating table")
        if self.market.ratings.reference_rating not in self.ratings:
            raise ConfigError("ratings list must include the reference rating")
        if not 0.5 < self.confidence < 1.0:
            raise ConfigError("margin.confidence must lie in (0.5, 1)")
        if not self.mpor_days > 0:
            raise ConfigError("mpor_days must be > 0")
        if self.pd_weighting not in PD_WEIGHTINGS:
            raise ConfigError(f"credit.pd_weighting must be one of {PD_WEIGHTINGS}")
        bad = set(self.formats) - set(REPORT_FORMATS)
        if bad or "csv" not in self.formats:
            raise ConfigError(f"output.formats must include csv and be drawn from {REPORT_FORMATS}")
        if self.workers < 1:
            raise ConfigError("simulation.workers must be >= 1")
        if self.a <= 0 or self.sigma <= 0:
            raise ConfigError("model.a and model.sigma must be > 0")
        horizon = self.market.curve.last_time
        for t in self.trades:
            end = t.maturity_years if t.type == "swap" else t.expiry_years + t.underlying_tenor_years
            if end > horizon:
                raise ConfigError(f"trade {t.label} runs past the discount curve ({horizon}y)")

    @property
    def mpor(self) -> float:
        return self.mpor_days / DAYS_PER_YEAR


def _merge(base: dict, override: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def config_from_dict(raw: Mapping[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Validate a JSON-compatible mapping; missing sections take the defaults."""
    if not isinstance(raw, Mapping):
        raise ConfigError("config must be a JSON object")
    raw = dict(raw)
    ratings_raw = raw.get("ratings")
    if ratings_raw and isinstance(ratings_raw[0], Mapping):
        # a top-level rating table belongs to the market section
        raw.pop("ratings")
        raw["market"] = {**raw.get("market", {}), "ratings": ratings_raw}
    if "discount_curve" in raw:
        market_keys = ("discount_curve", "reference_rating", "lgd")
        raw["market"] = {**raw.get("market", {}), **{k: raw.pop(k) for k in market_keys if k in raw}}
    d = _merge(default_config_dict(), raw)
    try:
        market_raw = d["market"]
        if isinstance(market_raw, str):
            mpath = Path(market_raw)
            if base_dir is not None and not mpath.is_absolute():
                mpath = base_dir / mpath
            market = load_market_config(mpath)
        else:
            market = market_from_dict(market_raw)
    except OSError as exc:
        raise ConfigError(f"market: {exc}") from None
    except MarketConfigError as exc:
        raise ConfigError(str(exc)) from None

    sim = d["simulation"]
    grid = sim.get("grid", "monthly")
    if isinstance(grid, list):
        grid = tuple(float(x) for x in grid)
    elif grid != "monthly":
        raise ConfigError("simulation.grid must be 'monthly' or a list of dates")
    margin = d["margin"]
    mpor_days = float(margin.get("mpor_days", d.get("mpor_days", DEFAULT_MPOR_DAYS)))
    if "mpor_days" in raw and "mpor_days" not in raw.get("margin", {}):
        mpor_days = float(raw["mpor_days"])
    if margin.get("vm_lag", "mpor") != "mpor":
        raise ConfigError("margin.vm_lag supports only 'mpor'")
    try:
        trades = tuple(TradeConfig(**t) for t in d["trades"])
    except TypeError as exc:
        raise ConfigError(f"trades: {exc}") from None
    ratings = d.get("ratings") or market.ratings.labels
    out = d["output"]
    try:
        return RunConfig(
            market=market,
            a=float(d["model"]["a"]),
            sigma=float(d["model"]["sigma"]),
            n_paths=int(sim.get("n_paths", DEFAULT_PATHS)),
            seed=int(sim.get("seed", DEFAULT_SEED)),
            grid=grid,
            workers=int(sim.get("workers", 1)),
            confidence=float(margin.get("confidence", DEFAULT_CONFIDENCE)),
            mpor_days=mpor_days,
            pd_weighting=str(d["credit"].get("pd_weighting", DEFAULT_PD_WEIGHTING)),
            tol=d["solver"].get("tol"),
            max_iter=int(d["solver"].get("max_iter", 100)),
            trades=trades,
            ratings=tuple(ratings),
            output_dir=str(out.get("dir", "simim_out")),
            formats=tuple(out.get("formats", REPORT_FORMATS)),
            source=d,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, path.parent)


def write_default_config(path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(default_config_dict(), indent=2))
    return path
