"""Collateralized CVA quadrature and its rho decomposition.

Time integral: exposure at the left end of each grid interval, weighted by
the interval's default probability, LGD and DF at the left end. Exposures
are floored pathwise before averaging.

Two interval weightings are available. ``"conditional"`` (default) uses the
default probability over (t_k, t_{k+1}] given survival to t_k, which is
ordered pointwise by hazard; ``"unconditional"`` uses S(t_k) - S(t_{k+1}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instruments import ValueCube
from .margin import MarginProfile
from .market import CreditCurve, DiscountCurve, LgdAssumption


@dataclass(frozen=True)
class ExposureResult:
    cva: float
    discounted_ee: np.ndarray
    interval_pd: np.ndarray
    lgd: float
    n_paths: int
    alpha: float
    rating: str

    def recompute(self) -> float:
        return float(np.sum(self.discounted_ee * self.interval_pd) * self.lgd)


@dataclass(frozen=True)
class RhoDecomposition:
    rho1: float
    rho2: float
    rho3: float
    cva: float

    @property
    def reconstructed(self) -> float:
        return self.rho1 + self.rho2 + self.rho3


PD_WEIGHTINGS = ("conditional", "unconditional")
DEFAULT_PD_WEIGHTING = "conditional"


def interval_pd(times: np.ndarray, credit: CreditCurve, weighting: str = DEFAULT_PD_WEIGHTING) -> np.ndarray:
    """Default probability of (t_k, t_{k+1}] per grid date; 0 for the last date."""
    times = np.asarray(times, float)
    pd = np.zeros(times.size)
    if weighting == "conditional":
        pd[:-1] = credit.conditional_default_prob(times[:-1], times[1:])
    elif weighting == "unconditional":
        pd[:-1] = credit.marginal_default_prob(times[:-1], times[1:])
    else:
        raise ValueError(f"pd weighting must be one of {PD_WEIGHTINGS}, got {weighting!r}")
    return pd


def bucket_weights(times, credit: CreditCurve, lgd: LgdAssumption, curve: DiscountCurve,
                   weighting: str = DEFAULT_PD_WEIGHTING) -> np.ndarray:
    """LGD * DF(t_k) * PD(t_k, t_{k+1}) per grid date."""
    times = np.asarray(times, float)
    return lgd.lgd * curve.discount_factor(times) * interval_pd(times, credit, weighting)


def cva_from_exposures(exposures: np.ndarray, df: np.ndarray, pd: np.ndarray, lgd: float) -> float:
    """Quadrature core: sum_k mean_p(E[p, k]) * DF_k * PD_k * LGD."""
    ee = np.mean(np.maximum(np.atleast_2d(exposures), 0.0), axis=0)
    return float(np.sum(ee * df * pd) * lgd)


def _check_aligned(values: ValueCube, margins: MarginProfile) -> None:
    if values.shape != margins.shape:
        raise ValueError(f"value cube {values.shape} and margin profile {margins.shape} misaligned")


def compute_cva(
    values: ValueCube,
    margins: MarginProfile,
    alpha: float,
    credit: CreditCurve,
    lgd: LgdAssumption,
    curve: DiscountCurve,
    weighting: str = DEFAULT_PD_WEIGHTING,
) -> ExposureResult:
    """CVA with exposure (V - VM - (1 + alpha) IM)+."""
    _check_aligned(values, margins)
    if not alpha >= 0.0:
        raise ValueError("alpha must be >= 0")
    exposure = np.maximum(values.exposure_values - margins.vm - (1.0 + alpha) * margins.im, 0.0)
    df = curve.discount_factor(values.times)
    pd = interval_pd(values.times, credit, weighting)
    dee = df * np.mean(exposure, axis=0)
    cva = float(np.sum(dee * pd) * lgd.lgd)
    return ExposureResult(cva, dee, pd, lgd.lgd, values.n_paths, float(alpha), credit.rating)


def compute_cva_uncollateralized(
    values: ValueCube, credit: CreditCurve, lgd: LgdAssumption, curve: DiscountCurve,
    weighting: str = DEFAULT_PD_WEIGHTING,
) -> ExposureResult:
    return compute_cva(values, MarginProfile.zeros(values.shape), 0.0, credit, lgd, curve, weighting)


def compute_rho_decomposition(
    values: ValueCube,
    margins: MarginProfile,
    alpha: float,
    credit: CreditCurve,
    lgd: LgdAssumption,
    curve: DiscountCurve,
    weighting: str = DEFAULT_PD_WEIGHTING,
) -> RhoDecomposition:
    _check_aligned(values, margins)
    x = values.exposure_values - margins.vm - margins.im
    add_on = alpha * margins.im
    theta = (x > 0.0).astype(float)
    theta_a = (x - add_on > 0.0).astype(float)
    w = bucket_weights(values.times, credit, lgd, curve, weighting)

    def agg(node: np.ndarray) -> float:
        return float(np.sum(np.mean(node, axis=0) * w))

    rho1 = agg(x * theta)
    rho2 = agg(x * (theta_a - theta))
    rho3 = -agg(add_on * theta_a)
    cva = compute_cva(values, margins, alpha, credit, lgd, curve, weighting).cva
    return RhoDecomposition(rho1, rho2, rho3, cva)


class CvaKernel:
    """CVA(alpha) on fixed paths, restricted to nodes that can carry exposure.

    Only nodes with V - VM - IM > 0 contribute for any alpha >= 0, so the
    kernel keeps those entries and their bucket weights.
    """

    def __init__(self, values: ValueCube, margins: MarginProfile, credit: CreditCurve,
                 lgd: LgdAssumption, curve: DiscountCurve, weighting: str = DEFAULT_PD_WEIGHTING):
        _check_aligned(values, margins)
        x = values.exposure_values - margins.vm - margins.im
        w = bucket_weights(values.times, credit, lgd, curve, weighting) / values.n_paths
        live = (x > 0.0) & (w[None, :] > 0.0)
        self.x0 = x[live]
        self.im = margins.im[live]
        self.w = np.broadcast_to(w, x.shape)[live]
        self.rating = credit.rating

    def __call__(self, alpha: float) -> float:
        return float(np.dot(self.w, np.maximum(self.x0 - alpha * self.im, 0.0)))

    def uncovered(self) -> float:
        """CVA left as alpha -> infinity (nodes with positive exposure but zero IM)."""
        return float(np.dot(self.w, np.where(self.im > 0.0, 0.0, self.x0)))

    @property
    def kinks(self) -> np.ndarray:
        """Alphas where a node's exposure reaches zero."""
        with np.errstate(divide="ignore"):
            k = self.x0 / self.im
        return np.sort(k[np.isfinite(k)])


__all__ = [
    "DEFAULT_PD_WEIGHTING",
    "PD_WEIGHTINGS",
    "ExposureResult",
    "RhoDecomposition",
    "interval_pd",
    "bucket_weights",
    "cva_from_exposures",
    "compute_cva",
    "compute_cva_uncollateralized",
    "compute_rho_decomposition",
    "CvaKernel",
]
