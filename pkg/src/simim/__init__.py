"""Counterparty-specific initial margin: simulation, margining, CVA and alpha calibration."""

__version__ = "0.1.0"

from .alpha import AlphaSolution, AlphaSurface, solve_alpha, solve_alpha_surface  # noqa: E402
from .config import ConfigError, RunConfig, config_from_dict, load_config  # noqa: E402
from .cva import compute_cva, compute_cva_uncollateralized, compute_rho_decomposition  # noqa: E402
from .margin import MarginProfile, apply_alpha, margin_profile  # noqa: E402
from .market import DiscountCurve, LgdAssumption, RatingTable, load_market_config  # noqa: E402
from .rates import HullWhiteParams, TimeGrid, simulate_paths  # noqa: E402

__all__ = [
    "__version__",
    "AlphaSolution",
    "AlphaSurface",
    "ConfigError",
    "DiscountCurve",
    "HullWhiteParams",
    "LgdAssumption",
    "MarginProfile",
    "RatingTable",
    "RunConfig",
    "TimeGrid",
    "apply_alpha",
    "compute_cva",
    "compute_cva_uncollateralized",
    "compute_rho_decomposition",
    "config_from_dict",
    "load_config",
    "load_market_config",
    "margin_profile",
    "simulate_paths",
    "solve_alpha",
    "solve_alpha_surface",
]
